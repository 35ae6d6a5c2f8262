// Prints one pass/fail line per acceptance criterion; exit status 1 when any
// criterion fails. Optional arguments restrict the run to the given ids.

#include <cstdio>
#include <set>
#include <string>

#include "acceptance.hpp"

int main(int argc, char** argv) {
  using namespace eulerspec::acceptance;
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && !only.count(c.id)) continue;
    auto v = evaluate(c);
    std::printf("%-5s %s  %7.1fs  %s\n", v.id.c_str(), v.pass ? "PASS" : "FAIL", v.seconds, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed ? 1 : 0;
}
