#pragma once

// Acceptance criteria AC1-AC13 as callable checks. Shared by the acceptance
// binary and the CLI, which attaches the verdicts of a scenario to its JSON.

#include <functional>
#include <string>
#include <vector>

#include "eulerspec/approxeig.hpp"
#include "eulerspec/lyapunov.hpp"

namespace eulerspec::acceptance {

struct Verdict {
  std::string id;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

Verdict ac1();
Verdict ac2();
Verdict ac3();
Verdict ac4();
Verdict ac5();
Verdict ac6();
Verdict ac7();
Verdict ac8();
Verdict ac9();
Verdict ac10();
Verdict ac11();
Verdict ac12();
Verdict ac13();

// Verdicts from results the caller already holds.
Verdict ac9_from(const approxeig::ResidualReport& shear);
Verdict ac10_from(const approxeig::ResidualReport& cellular);
Verdict ac11_from(const approxeig::ResidualReport& rigid);

struct Criterion {
  std::string id;
  std::function<Verdict()> run;
};
const std::vector<Criterion>& criteria();

/// Run one criterion, catching library errors into a failed verdict and
/// recording the wall time.
Verdict evaluate(const Criterion& c);

}  // namespace eulerspec::acceptance
