#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using eulerspec::cli::run;
using json = nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("eulerspec-cli-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int call(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  int rc = run(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

std::vector<fs::path> with_extension(const fs::path& dir, const std::string& ext, const std::string& prefix) {
  std::vector<fs::path> r;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ext && e.path().filename().string().rfind(prefix, 0) == 0) r.push_back(e.path());
  std::sort(r.begin(), r.end());
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("sha256 and config parsing") {
  CHECK(eulerspec::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::istringstream is("# comment\nflow = rigid\n\nM=4  # trailing\n");
  auto a = eulerspec::cli::config_arguments(is);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == "--flow=rigid");
  CHECK(a[1] == "--M=4");
  std::istringstream bad("flow rigid\n");
  CHECK_THROWS(eulerspec::cli::config_arguments(bad));
}

TEST_CASE("validation errors exit 2 with a JSON record") {
  TempDir d;
  std::string err;
  CHECK(call({"spectrum", "--bogus=1"}, nullptr, &err) == eulerspec::cli::kValidation);
  CHECK(json::parse(err)["error"]["kind"] == "invalid-input");
  CHECK(call({"spectrum", "--M=40"}, nullptr, &err) == eulerspec::cli::kValidation);
  CHECK(call({"spectrum", "--flow=swirl"}, nullptr, &err) == eulerspec::cli::kValidation);
  CHECK(call({"lyapunov", "--T=-1"}) == eulerspec::cli::kValidation);
  // Keys of another scenario are unknown here.
  std::ofstream(d.path / "c.cfg") << "flow=rigid\nsweep=rigid-lattice\n";
  CHECK(call({"spectrum", "--config", (d.path / "c.cfg").string()}) == eulerspec::cli::kValidation);
  std::ofstream(d.path / "dup.cfg") << "flow=rigid\n";
  CHECK(call({"spectrum", "--config", (d.path / "dup.cfg").string(), "--flow=shear"}) == eulerspec::cli::kValidation);
  CHECK(with_extension(d.path, ".json", "spectrum").empty());
}

TEST_CASE("flow-info lists the eight cellular stagnation points") {
  TempDir d;
  REQUIRE(call({"flow-info", "--flow=cellular", "--verdicts=false", "--out=" + d.path.string()}) == 0);
  auto js = with_extension(d.path, ".json", "flow-info-");
  REQUIRE(js.size() == 1);
  auto j = json::parse(slurp(js[0]));
  CHECK(j["summary"]["stagnation_count"] == 8);
  CHECK(j["summary"]["hyperbolic"] == 4);
  CHECK(j["summary"]["center"] == 4);
  CHECK(j["config"]["flow"] == "cellular");
  CHECK(j["csv_sha256"] == eulerspec::cli::sha256_hex(slurp(d.path / j["csv"].get<std::string>())));
}

TEST_CASE("spectrum of the rigid flow, deterministic artifacts") {
  TempDir d;
  const std::vector<std::string> args{"spectrum", "--flow=rigid", "--M=4", "--out=" + d.path.string()};
  REQUIRE(call(args) == 0);
  auto csv = with_extension(d.path, ".csv", "spectrum-");
  REQUIRE(csv.size() == 1);
  std::string first = slurp(csv[0]);
  std::istringstream is(first);
  std::string line;
  std::getline(is, line);
  CHECK(line == "re,im");
  std::map<long, int> count;
  while (std::getline(is, line)) {
    double re = std::stod(line.substr(0, line.find(','))), im = std::stod(line.substr(line.find(',') + 1));
    CHECK(std::abs(re) < 1e-10);
    CHECK(std::abs(im - std::round(im)) < 1e-10);
    ++count[std::lround(im)];
  }
  for (long k = -4; k <= 4; ++k) CHECK(count[k] == (k == 0 ? 8 : 9));
  auto j = json::parse(slurp(with_extension(d.path, ".json", "spectrum-")[0]));
  REQUIRE(j["verdicts"].size() == 1);
  CHECK(j["verdicts"][0]["id"] == "AC8");
  CHECK(j["verdicts"][0]["pass"] == true);
  // Same config, same file name and bytes.
  REQUIRE(call(args) == 0);
  CHECK(with_extension(d.path, ".csv", "spectrum-").size() == 1);
  CHECK(slurp(csv[0]) == first);
  // A config file yields the same artifact as the flags.
  std::ofstream(d.path / "s.cfg") << "flow=rigid\nM=4\n";
  REQUIRE(call({"spectrum", "--config=" + (d.path / "s.cfg").string(), "--out=" + d.path.string()}) == 0);
  CHECK(with_extension(d.path, ".csv", "spectrum-").size() == 1);
}

TEST_CASE("report: missing criteria and corrupted CSV") {
  TempDir d;
  const std::string out = "--out=" + d.path.string();
  REQUIRE(call({"spectrum", "--flow=rigid", out}) == 0);
  std::string text;
  CHECK(call({"report", out}, &text) == eulerspec::cli::kIncomplete);
  CHECK(text.find("AC8   pass") != std::string::npos);
  CHECK(text.find("AC1   missing") != std::string::npos);
  auto rep = with_extension(d.path, ".json", "report-");
  REQUIRE(!rep.empty());
  auto j = json::parse(slurp(rep[0]));
  CHECK(j["criteria"].size() == 13);
  CHECK(j["criteria"][0]["status"] == "missing");

  auto csv = with_extension(d.path, ".csv", "spectrum-");
  std::ofstream(csv[0], std::ios::app) << "0,1\n";
  std::string err;
  CHECK(call({"report", out}, nullptr, &err) == eulerspec::cli::kIncomplete);
  CHECK(err.find("checksum") != std::string::npos);
}

TEST_CASE("approx-eig with overrides writes the residual table") {
  TempDir d;
  REQUIRE(call({"approx-eig", "--flow=shear", "--m=0", "--N=2", "--s=0.4", "--xi=0.37", "--beta=tent",
                "--symmetrization=mean-projection", "--M=32", "--out=" + d.path.string()}) == 0);
  auto csv = with_extension(d.path, ".csv", "approx-eig-");
  REQUIRE(csv.size() == 1);
  std::string body = slurp(csv[0]);
  CHECK(body.rfind("scenario,m,lambda,xi,N,s,residual,predicted,kg_norm,tail,inj\n", 0) == 0);
  auto j = json::parse(slurp(with_extension(d.path, ".json", "approx-eig-")[0]));
  CHECK(j["summary"]["rows"] == 1);
  CHECK(j["verdicts"].empty());  // parameters differ from the criterion
  CHECK(call({"approx-eig", "--flow=shear", "--beta=appendix", "--m=0", "--out=" + d.path.string()}) ==
        eulerspec::cli::kValidation);
}
