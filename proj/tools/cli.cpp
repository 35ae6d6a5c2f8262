#include "cli.hpp"

#include <openssl/evp.h>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "acceptance.hpp"
#include "eulerspec/approxeig.hpp"
#include "eulerspec/lyapunov.hpp"
#include "eulerspec/operators.hpp"
#include "eulerspec/orbits.hpp"
#include "json.hpp"

#ifndef EULERSPEC_VERSION
#define EULERSPEC_VERSION "unknown"
#endif

namespace eulerspec::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::vector<std::string> config_arguments(std::istream& is) {
  std::vector<std::string> out;
  std::string line;
  int n = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++n;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw Error(ErrorKind::InvalidInput, "config line " + std::to_string(n) + ": expected key=value");
    out.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
  }
  return out;
}

namespace {

struct Config {
  std::string scenario;
  std::string flow = "cellular";
  double T = 30.0;
  int grid = 64;
  int M = 4;
  int m = 0;
  double lambda = 1.0;
  std::vector<double> N, s, xi;
  double delta = 0.05;
  std::string sweep, beta, symmetrization;
  std::uint64_t seed = 1;
  int samples = 50;
  std::vector<double> center{0.2, 0.2};
  double sigma = 0.3;
  double target = 30.0;
  double horizon = 0.0;
  std::string out = ".";
  std::string exec = "parallel";
  bool verdicts = true;
};

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

// Keys accepted by each scenario, in echo order.
const std::map<std::string, std::vector<std::string>>& scenario_keys() {
  static const std::map<std::string, std::vector<std::string>> k{
      {"flow-info", {"flow", "grid", "out", "verdicts"}},
      {"lyapunov", {"flow", "T", "grid", "out", "exec", "verdicts"}},
      {"bas", {"flow", "T", "m", "samples", "seed", "out", "verdicts"}},
      {"spectrum", {"flow", "M", "m", "out", "verdicts"}},
      {"approx-eig",
       {"flow", "sweep", "m", "lambda", "xi", "N", "s", "delta", "M", "beta", "symmetrization", "out", "exec",
        "verdicts"}},
      {"semigroup-growth", {"flow", "m", "T", "grid", "center", "sigma", "out", "exec", "verdicts"}},
      {"orbits", {"flow", "grid", "target", "horizon", "out"}},
      {"report", {"out"}},
  };
  return k;
}

std::string value_of(const Config& c, const std::string& key) {
  if (key == "flow") return c.flow;
  if (key == "T") return num(c.T);
  if (key == "grid") return std::to_string(c.grid);
  if (key == "M") return std::to_string(c.M);
  if (key == "m") return std::to_string(c.m);
  if (key == "lambda") return num(c.lambda);
  if (key == "N") return list(c.N);
  if (key == "s") return list(c.s);
  if (key == "xi") return list(c.xi);
  if (key == "delta") return num(c.delta);
  if (key == "sweep") return c.sweep;
  if (key == "beta") return c.beta;
  if (key == "symmetrization") return c.symmetrization;
  if (key == "seed") return std::to_string(c.seed);
  if (key == "samples") return std::to_string(c.samples);
  if (key == "center") return list(c.center);
  if (key == "sigma") return num(c.sigma);
  if (key == "target") return num(c.target);
  if (key == "horizon") return num(c.horizon);
  if (key == "out") return c.out;
  if (key == "exec") return c.exec;
  if (key == "verdicts") return c.verdicts ? "true" : "false";
  return {};
}

// Scenario defaults that differ from the struct defaults.
void scenario_defaults(Config& c) {
  if (c.scenario == "flow-info") c.grid = 64;
  if (c.scenario == "spectrum") c.M = 4, c.m = 0;
  if (c.scenario == "semigroup-growth") c.T = 8.0, c.grid = 256, c.m = 1;
  if (c.scenario == "orbits") c.grid = 32;
}

fields::TrigVelocityField parse_flow(const std::string& spec) {
  // Preset name, or "stream:k1,k2,re,im;..." listing both k and -k.
  if (spec.rfind("stream:", 0) != 0) {
    auto names = fields::preset_names();
    if (std::find(names.begin(), names.end(), spec) == names.end())
      throw Error(ErrorKind::InvalidInput, "unknown flow '" + spec + "'");
    return fields::preset(spec);
  }
  std::vector<std::pair<fields::ModeIndex, Complex>> coeffs;
  std::stringstream ss(spec.substr(7));
  std::string item;
  int radius = 0;
  while (std::getline(ss, item, ';')) {
    std::replace(item.begin(), item.end(), ',', ' ');
    std::istringstream is(item);
    int k1, k2;
    double re, im;
    if (!(is >> k1 >> k2 >> re >> im)) throw Error(ErrorKind::InvalidInput, "bad stream entry '" + item + "'");
    coeffs.push_back({{k1, k2}, {re, im}});
    radius = std::max({radius, std::abs(k1), std::abs(k2)});
  }
  if (coeffs.empty()) throw Error(ErrorKind::InvalidInput, "empty stream specification");
  return fields::velocity_from_stream(fields::FourierScalarField::from_coefficients(radius, coeffs));
}

kernels::Exec exec_of(const Config& c) { return c.exec == "serial" ? kernels::Exec::Serial : kernels::Exec::Parallel; }

void validate(const Config& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::InvalidInput, m); };
  parse_flow(c.flow);
  if (c.exec != "serial" && c.exec != "parallel") bad("exec must be serial or parallel");
  if (!(c.T > 0.0)) bad("T must be positive");
  if (c.m < 0) bad("m must be nonnegative");
  const auto& s = c.scenario;
  if (s == "flow-info" && c.grid < 4) bad("grid must be at least 4");
  if (s == "lyapunov" && c.grid < 16) bad("grid must be at least 16");
  if (s == "bas" && c.samples < 1) bad("samples must be positive");
  if (s == "spectrum" && (c.M < 1 || c.M > operators::kDenseCeiling))
    bad("M must be in [1, " + std::to_string(operators::kDenseCeiling) + "]");
  if (s == "approx-eig") {
    for (double v : c.N)
      if (!(v > 0.0)) bad("N values must be positive");
    for (double v : c.s)
      if (!(v > 0.0 && v < 1.0)) bad("s values must lie in (0, 1)");
    if (!(c.delta > 0.0)) bad("delta must be positive");
    if (c.M < 4) bad("M must be at least 4");
    if (!c.beta.empty()) approxeig::beta_variant_from_string(c.beta);
    if (!c.symmetrization.empty() && c.symmetrization != "partner" && c.symmetrization != "mean-projection")
      bad("symmetrization must be partner or mean-projection");
    if (!c.sweep.empty()) approxeig::named_sweep(c.sweep);
  }
  if (s == "semigroup-growth") {
    if (c.m > 2) bad("m must be 0, 1 or 2");
    if (c.grid < 16 || c.grid % 2) bad("grid must be even and at least 16");
    if (c.center.size() != 2) bad("center takes two values");
    if (!(c.sigma > 0.0)) bad("sigma must be positive");
  }
  if (s == "orbits") {
    if (c.grid < 2) bad("grid must be at least 2");
    if (!(c.target > 0.0)) bad("target must be positive");
    if (c.horizon < 0.0) bad("horizon must be nonnegative");
  }
}

bool given(const CLI::App& sub, const std::string& key) {
  auto* o = sub.get_option_no_throw("--" + key);
  return o && o->count() > 0;
}

struct Outcome {
  std::string csv;
  json summary = json::object();
  std::vector<acceptance::Verdict> verdicts;
};

std::vector<acceptance::Verdict> run_criteria(const std::vector<std::string>& ids) {
  std::vector<acceptance::Verdict> v;
  for (const auto& c : acceptance::criteria())
    if (std::find(ids.begin(), ids.end(), c.id) != ids.end()) v.push_back(acceptance::evaluate(c));
  return v;
}

Outcome flow_info(const Config& c) {
  Outcome o;
  auto u = parse_flow(c.flow);
  auto a = fields::find_stagnation_points(u, c.grid);
  std::ostringstream os;
  os << std::setprecision(17) << "x1,x2,kind,exponent,residual\n";
  json pts = json::array();
  for (const auto& p : a.points) {
    os << p.location.x1 << ',' << p.location.x2 << ',' << to_string(p.kind) << ',' << p.exponent << ',' << p.residual
       << '\n';
    pts.push_back({{"x1", p.location.x1}, {"x2", p.location.x2}, {"kind", to_string(p.kind)}, {"exponent", p.exponent}});
  }
  o.csv = os.str();
  auto pred = orbits::long_orbit_predicate(u);
  o.summary = {{"stagnation_count", a.points.size()},
               {"hyperbolic", a.count(fields::StagnationKind::Hyperbolic)},
               {"center", a.count(fields::StagnationKind::Center)},
               {"degenerate_lines", a.degenerate_lines.size()},
               {"unresolved_cells", a.unresolved.size()},
               {"stagnation_points", pts},
               {"long_orbits", pred.value},
               {"max_speed", u.max_speed()}};
  if (c.verdicts) {
    std::vector<std::string> ids{"AC1"};
    if (c.flow == "cellular") ids.insert(ids.end(), {"AC2", "AC3"});
    o.verdicts = run_criteria(ids);
  }
  return o;
}

Outcome lyapunov_run(const Config& c) {
  Outcome o;
  auto u = parse_flow(c.flow);
  lyapunov::LyapunovOptions opt;
  opt.exec = exec_of(c);
  auto g = lyapunov::global_exponent(u, c.T, c.grid, opt);
  std::ostringstream os;
  lyapunov::write_exponent_field_csv(os, g);
  o.csv = os.str();
  o.summary = {{"Lambda", g.value},
               {"grid_value", g.grid_value},
               {"grid_argmax", {g.grid_argmax.x1, g.grid_argmax.x2}},
               {"stagnation_value", g.stagnation_value},
               {"provenance", g.provenance},
               {"stagnation_exponents", lyapunov::stagnation_exponents(u)}};
  if (c.verdicts && c.flow == "cellular") o.verdicts = run_criteria({"AC5", "AC13"});
  return o;
}

Outcome bas_run(const Config& c) {
  Outcome o;
  auto u = parse_flow(c.flow);
  lyapunov::BasSampleSpec spec{.count = std::size_t(c.samples), .seed = c.seed};
  auto init = lyapunov::make_bas_samples(u, spec);
  auto e = c.m == 0 ? lyapunov::bas_max_exponent(u, spec, c.T) : lyapunov::weighted_b_exponent(u, c.m, spec, c.T);
  std::ostringstream os;
  os << std::setprecision(17) << "index,x1,x2,xi1,xi2,exponent\n";
  for (std::size_t i = 0; i < init.size(); ++i)
    os << i << ',' << init[i].x.x() << ',' << init[i].x.y() << ',' << init[i].xi.x() << ',' << init[i].xi.y() << ','
       << e.per_sample[i] << '\n';
  o.csv = os.str();
  o.summary = {{c.m == 0 ? "mu" : "mu_m", e.value}, {"argmax", e.argmax}, {"m", c.m}};
  if (c.verdicts && c.flow == "cellular") o.verdicts = run_criteria({"AC4", "AC6"});
  return o;
}

Outcome spectrum_run(const Config& c) {
  Outcome o;
  auto u = parse_flow(c.flow);
  auto L = operators::assemble_L(u, c.M);
  auto ev = operators::spectrum(L, c.m);
  std::ostringstream os;
  operators::write_spectrum_csv(os, ev);
  o.csv = os.str();
  double max_re = ev.empty() ? 0.0 : std::max_element(ev.begin(), ev.end(), [](Complex a, Complex b) {
                                       return a.real() < b.real();
                                     })->real();
  o.summary = {{"modes", L.box.size()}, {"eigenvalues", ev.size()}, {"max_real_part", max_re}};
  if (c.flow == "rigid")
    o.summary["note"] = "on [0, 2 pi]^2 the rigid spectrum is {-i k1}, i.e. i Z; 2 pi i Z is the unit-torus form";
  if (c.verdicts) {
    if (c.flow == "cellular") o.verdicts = run_criteria({"AC7"});
    if (c.flow == "rigid") o.verdicts = run_criteria({"AC8"});
  }
  return o;
}

Outcome approx_eig_run(const Config& c, const CLI::App& sub) {
  Outcome o;
  std::string name = c.sweep;
  if (name.empty()) {
    if (c.flow == "cellular") name = "cellular-hyperbolic";
    else if (c.flow == "shear") name = "shear-long-orbit";
    else if (c.flow == "rigid") name = "rigid-lattice";
    else throw Error(ErrorKind::InvalidInput, "flow '" + c.flow + "' needs an explicit sweep");
  }
  auto spec = approxeig::named_sweep(name);
  if (!c.sweep.empty() && spec.flow != c.flow && given(sub, "flow"))
    throw Error(ErrorKind::InvalidInput, "sweep '" + name + "' runs on flow '" + spec.flow + "'");
  bool overridden = false;
  auto set = [&](const char* k) {
    bool g = given(sub, k);
    overridden = overridden || g;
    return g;
  };
  if (set("m")) spec.m = c.m;
  if (set("lambda")) spec.lambda = c.lambda;
  if (set("xi")) spec.xi = c.xi;
  if (set("N")) spec.N = c.N;
  if (set("s")) spec.s = c.s;
  if (set("delta")) spec.delta = c.delta;
  if (set("M")) spec.M = c.M;
  if (set("beta")) spec.beta = approxeig::beta_variant_from_string(c.beta);
  if (set("symmetrization"))
    spec.symmetrization = c.symmetrization == "partner" ? approxeig::Symmetrization::Partner
                                                        : approxeig::Symmetrization::MeanProjection;
  if (spec.beta == approxeig::BetaVariant::Appendix && spec.m < 1)
    throw Error(ErrorKind::InvalidInput, "the appendix beta needs m >= 1");
  spec.exec = exec_of(c);
  auto rep = approxeig::sweep(spec);
  std::ostringstream os;
  approxeig::write_report_csv(os, rep);
  o.csv = os.str();
  json notes = json::array();
  for (const auto& r : rep.rows)
    if (!r.note.empty()) notes.push_back({{"N", r.N}, {"s", r.s}, {"xi", r.xi}, {"note", r.note}});
  o.summary = {{"sweep", name},
               {"rows", rep.rows.size()},
               {"decreasing_in_N", rep.trend.decreasing_in_N},
               {"max_xi_variation", rep.trend.max_xi_variation},
               {"max_ratio_to_predicted", rep.trend.max_ratio_to_predicted},
               {"flagged_rows", rep.trend.flagged_rows},
               {"notes", notes}};
  if (c.verdicts && !overridden) {
    if (name == "shear-long-orbit") o.verdicts.push_back(acceptance::ac9_from(rep));
    if (name == "cellular-hyperbolic") o.verdicts.push_back(acceptance::ac10_from(rep));
    if (name == "rigid-lattice") o.verdicts.push_back(acceptance::ac11_from(rep));
  }
  return o;
}

Outcome growth_run(const Config& c) {
  Outcome o;
  auto u = parse_flow(c.flow);
  auto seed = operators::gaussian_bump({c.center[0], c.center[1]}, c.sigma);
  operators::GrowthOptions opt;
  opt.push.grid = c.grid;
  opt.push.tail_index = c.m;
  opt.push.exec = exec_of(c);
  if (c.verdicts && c.flow == "cellular") o.verdicts = run_criteria({"AC12"});
  auto g = operators::semigroup_growth(u, c.m, seed, c.T, opt);
  std::ostringstream os;
  os << std::setprecision(17) << "t,log_norm\n";
  for (auto [t, v] : g.trace) os << t << ',' << v << '\n';
  o.csv = os.str();
  o.summary = {{"rate", g.value}, {"max_tail", g.max_tail}, {"aliasing_warning", g.aliasing_warning}, {"route", g.route}};
  return o;
}

Outcome orbits_run(const Config& c) {
  Outcome o;
  auto u = parse_flow(c.flow);
  const double horizon = c.horizon > 0.0 ? c.horizon : 1.2 * c.target + 1.0;
  auto scan = orbits::longest_orbit_scan(u, c.target, c.grid, horizon);
  std::ostringstream os;
  orbits::write_periods_csv(os, scan.samples);
  o.csv = os.str();
  auto pred = orbits::long_orbit_predicate(u);
  o.summary = {{"found", scan.found},
               {"longest_finite", scan.longest_finite},
               {"refinement_steps", scan.refinement_steps},
               {"long_orbit_predicate", pred.value},
               {"provenance", pred.provenance}};
  if (scan.found)
    o.summary["witness"] = {{"x1", scan.witness.point.x1}, {"x2", scan.witness.point.x2}, {"period", scan.witness.period}};
  return o;
}

json verdicts_json(const std::vector<acceptance::Verdict>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back({{"id", x.id}, {"pass", x.pass}, {"detail", x.detail}, {"seconds", x.seconds}});
  return a;
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot write " + p.string());
  f << s;
}

int criterion_number(const std::string& id) { return std::stoi(id.substr(2)); }

int report(const Config& c, std::ostream& out, std::ostream& err) {
  std::map<std::string, json> matrix;
  json problems = json::array();
  std::vector<fs::path> files;
  if (fs::is_directory(c.out))
    for (const auto& e : fs::directory_iterator(c.out))
      if (e.path().extension() == ".json" && e.path().filename().string().rfind("report-", 0) != 0)
        files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    json j;
    try {
      std::ifstream f(p);
      j = json::parse(f);
    } catch (const std::exception& e) {
      problems.push_back({{"artifact", p.filename().string()}, {"error", "unreadable JSON"}});
      continue;
    }
    if (!j.contains("csv") || !j.contains("csv_sha256")) continue;
    fs::path csv = fs::path(c.out) / j["csv"].get<std::string>();
    std::ifstream f(csv, std::ios::binary);
    std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (!f.good() && body.empty()) {
      problems.push_back({{"artifact", csv.filename().string()}, {"error", to_string(ErrorKind::MissingArtifact)}});
      continue;
    }
    if (sha256_hex(body) != j["csv_sha256"].get<std::string>()) {
      problems.push_back({{"artifact", csv.filename().string()}, {"error", to_string(ErrorKind::Checksum)}});
      continue;
    }
    for (const auto& v : j.value("verdicts", json::array())) {
      auto id = v["id"].get<std::string>();
      json entry = {{"status", v["pass"].get<bool>() ? "pass" : "fail"},
                    {"detail", v["detail"]},
                    {"artifact", p.filename().string()}};
      // Several artifacts may carry the same criterion; any failure wins.
      if (!matrix.count(id) || entry["status"] == "fail") matrix[id] = entry;
    }
  }
  json rows = json::array();
  std::size_t missing = 0;
  for (int i = 1; i <= 13; ++i) {
    std::string id = "AC" + std::to_string(i);
    json row = {{"id", id}};
    if (matrix.count(id)) {
      for (auto& [k, v] : matrix[id].items()) row[k] = v;
    } else {
      row["status"] = "missing";
      ++missing;
    }
    rows.push_back(row);
    out << std::left << std::setw(5) << id << ' ' << row["status"].get<std::string>() << '\n';
  }
  json r = {{"scenario", "report"}, {"version", EULERSPEC_VERSION}, {"criteria", rows}, {"problems", problems}};
  std::string text = r.dump(2) + "\n";
  write_file(fs::path(c.out) / ("report-" + sha256_hex(text).substr(0, 12) + ".json"), text);
  if (!problems.empty()) {
    err << json{{"error", {{"kind", to_string(ErrorKind::Checksum)}, {"artifacts", problems}}}}.dump() << '\n';
    return kIncomplete;
  }
  if (missing) {
    err << json{{"error", {{"kind", to_string(ErrorKind::MissingArtifact)}, {"missing", missing}}}}.dump() << '\n';
    return kIncomplete;
  }
  return kOk;
}

void error_record(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Spectral diagnostics of the linearized 2D Euler equation on the torus", "eulerspec"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", EULERSPEC_VERSION);
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> help{
      {"flow-info", "stagnation points and their classification"},
      {"lyapunov", "global Lyapunov exponent on a grid"},
      {"bas", "maximal b-exponent of the bicharacteristic amplitude system"},
      {"spectrum", "eigenvalues of the Galerkin operator L"},
      {"approx-eig", "approximate eigenfunction residual sweep"},
      {"semigroup-growth", "growth rate of w o phi_t in H_m"},
      {"orbits", "long periodic orbit scan"},
      {"report", "aggregate the verdicts of previous runs"},
  };
  for (const auto& [name, keys] : scenario_keys()) {
    auto* s = app.add_subcommand(name, help.at(name));
    s->add_option("--config", "flat key=value file (keys as below)");
    for (const auto& k : keys) {
      const std::string f = "--" + k;
      if (k == "flow") s->add_option(f, c.flow, "preset (rigid, shear, cellular) or stream:k1,k2,re,im;...");
      if (k == "T") s->add_option(f, c.T, "time horizon");
      if (k == "grid") s->add_option(f, c.grid, "grid size per side");
      if (k == "M") s->add_option(f, c.M, "mode box |k_i| <= M");
      if (k == "m") s->add_option(f, c.m, "Sobolev index");
      if (k == "lambda") s->add_option(f, c.lambda, "exponent (sign picks the stable/unstable side)");
      if (k == "N") s->add_option(f, c.N, "half-lengths")->delimiter(',');
      if (k == "s") s->add_option(f, c.s, "half-widths")->delimiter(',');
      if (k == "xi") s->add_option(f, c.xi, "imaginary parts")->delimiter(',');
      if (k == "delta") s->add_option(f, c.delta, "base point offset from the saddle");
      if (k == "sweep") s->add_option(f, c.sweep, "named sweep");
      if (k == "beta") s->add_option(f, c.beta, "tent | indicator | appendix");
      if (k == "symmetrization") s->add_option(f, c.symmetrization, "partner | mean-projection");
      if (k == "seed") s->add_option(f, c.seed, "random seed");
      if (k == "samples") s->add_option(f, c.samples, "number of samples");
      if (k == "center") s->add_option(f, c.center, "bump centre x1,x2")->delimiter(',');
      if (k == "sigma") s->add_option(f, c.sigma, "bump width");
      if (k == "target") s->add_option(f, c.target, "target period");
      if (k == "horizon") s->add_option(f, c.horizon, "return-time horizon (0: 1.2 target + 1)");
      if (k == "out") s->add_option(f, c.out, "output directory");
      if (k == "exec") s->add_option(f, c.exec, "serial | parallel");
      if (k == "verdicts") s->add_option(f, c.verdicts, "evaluate the acceptance criteria tied to this run");
    }
    subs[name] = s;
  }

  // Splice a --config file in after the subcommand; a key given twice is an
  // error.
  std::vector<std::string> args;
  std::set<std::string> seen;
  try {
    for (std::size_t i = 0; i < args_in.size(); ++i) {
      const auto& a = args_in[i];
      std::string path;
      if (a == "--config" && i + 1 < args_in.size()) path = args_in[++i];
      else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
      if (path.empty()) {
        args.push_back(a);
        continue;
      }
      std::ifstream f(path);
      if (!f) throw Error(ErrorKind::InvalidInput, "cannot read config " + path);
      for (auto& kv : config_arguments(f)) args.push_back(kv);
    }
    for (const auto& a : args)
      if (a.rfind("--", 0) == 0) {
        auto key = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
        if (key != "help" && !seen.insert(key).second)
          throw Error(ErrorKind::InvalidInput, "key '" + key + "' given more than once");
      }
  } catch (const Error& e) {
    error_record(err, to_string(e.kind()), e.what());
    return kValidation;
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_record(err, "invalid-input", e.what());
    return kValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  c.scenario = sub->get_name();
  {
    // Re-apply scenario defaults to keys the user did not set.
    Config d;
    d.scenario = c.scenario;
    scenario_defaults(d);
    if (!given(*sub, "grid")) c.grid = d.grid;
    if (!given(*sub, "M")) c.M = d.M;
    if (!given(*sub, "m")) c.m = d.m;
    if (!given(*sub, "T")) c.T = d.T;
  }
  try {
    validate(c);
  } catch (const Error& e) {
    error_record(err, to_string(e.kind()), e.what());
    return kValidation;
  }

  if (c.scenario == "report") {
    try {
      return report(c, out, err);
    } catch (const std::exception& e) {
      error_record(err, "report", e.what());
      return kComputation;
    }
  }

  json config = json::object();
  std::string canon = c.scenario + "\n";
  for (const auto& k : scenario_keys().at(c.scenario)) {
    if (k == "out") continue;  // where, not what
    config[k] = value_of(c, k);
    canon += k + "=" + value_of(c, k) + "\n";
  }
  const std::string stem = c.scenario + "-" + sha256_hex(canon).substr(0, 12);
  const fs::path dir(c.out);

  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  json error;
  bool invalid = false;
  try {
    if (c.scenario == "flow-info") o = flow_info(c);
    else if (c.scenario == "lyapunov") o = lyapunov_run(c);
    else if (c.scenario == "bas") o = bas_run(c);
    else if (c.scenario == "spectrum") o = spectrum_run(c);
    else if (c.scenario == "approx-eig") o = approx_eig_run(c, *sub);
    else if (c.scenario == "semigroup-growth") o = growth_run(c);
    else if (c.scenario == "orbits") o = orbits_run(c);
  } catch (const Error& e) {
    error = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    invalid = e.kind() == ErrorKind::InvalidInput;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    fs::create_directories(dir);
    write_file(dir / (stem + ".csv"), o.csv);
    json j = {{"scenario", c.scenario},
              {"config", config},
              {"version", EULERSPEC_VERSION},
              {"libraries",
               {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"compiler", __VERSION__}}},
              {"wall_clock_seconds", wall},
              {"status", error.is_null() ? "ok" : "error"},
              {"summary", o.summary},
              {"verdicts", verdicts_json(o.verdicts)},
              {"csv", stem + ".csv"},
              {"csv_sha256", sha256_hex(o.csv)}};
    if (!error.is_null()) j["error"] = error;
    write_file(dir / (stem + ".json"), j.dump(2) + "\n");
  } catch (const std::exception& e) {
    error_record(err, "io", e.what());
    return kComputation;
  }
  out << (dir / (stem + ".csv")).string() << '\n' << (dir / (stem + ".json")).string() << '\n';
  for (const auto& v : o.verdicts) out << v.id << ' ' << (v.pass ? "pass" : "fail") << '\n';
  if (!error.is_null()) {
    err << json{{"error", error}}.dump() << '\n';
    return invalid ? kValidation : kComputation;
  }
  return kOk;
}

}  // namespace eulerspec::cli
