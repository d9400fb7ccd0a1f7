#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldptails_cli/app.hpp"
#include "ldptails_cli/parse.hpp"
#include "ldptails_cli/selftest.hpp"

namespace fs = std::filesystem;
using namespace ldptails;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ldptails");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Value of "key=value" in the tool's stdout.
std::string field(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ldptails_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("validate-weights") {
  const auto dir = scratch("validate");
  auto r = run({"validate-weights", "--scheme", "uniform", "--assumption", "B", "--out", dir.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(field(r.out, "s1") == "1");
  CHECK(field(r.out, "s") == "1");
  CHECK(field(r.out, "b_pass") == "true");
  CHECK(fs::exists(dir / "assumption_b.csv"));
  CHECK(fs::exists(dir / "assumption_report.json"));

  r = run({"validate-weights", "--scheme", "perturbed-uniform:0.25", "--assumption", "A", "--out", dir.string()});
  CHECK(r.code == cli::kExitCheckFailed);
  CHECK(field(r.out, "a2_pass") == "false");
  const auto report = nlohmann::json::parse(slurp(dir / "assumption_report.json"));
  CHECK(report.at("a2_pass") == false);
  CHECK(fs::exists(dir / "assumption_a.csv"));

  r = run({"validate-weights", "--scheme", "kernel:epanechnikov", "--assumption", "B", "--out", dir.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(std::stod(field(r.out, "s")) == doctest::Approx(0.75).epsilon(1e-9));

  r = run({"validate-weights", "--scheme", "wobbly", "--out", dir.string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("rate") {
  const auto dir = scratch("rate");
  auto r = run({"rate", "--formula", "stretched", "--x", "4", "--m", "2", "--s", "1", "--s1", "1", "--r", "0.5",
                "--out", dir.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("4,1.4142135623730951,stretched") != std::string::npos);
  CHECK(slurp(dir / "rates.csv") == r.out);

  r = run({"rate", "--formula", "kernel", "--kernel", "epanechnikov", "--x", "3", "--m", "2", "--r", "0.5",
           "--out", dir.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("3,1.1547005383792515,kernel") != std::string::npos);

  r = run({"rate", "--formula", "random-weight", "--theta", "uniform:0:1", "--x", "4", "--m", "2", "--r", "0.5",
           "--out", dir.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("4,1,random_weight") != std::string::npos);

  r = run({"rate", "--formula", "random-weight", "--e-theta", "2", "--m-star", "1", "--x", "4", "--out",
           dir.string()});
  CHECK(r.code == cli::kExitUsage);

  r = run({"rate", "--formula", "cramer,chi_star", "--law", "bernoulli:0.5", "--x-grid", "0.5:1.5:5", "--out",
           dir.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("1.5,inf,cramer") != std::string::npos);
  CHECK(r.out.find("1.5,nan,chi_star") != std::string::npos);
}

TEST_CASE("simulate: synthetic mode has constant rho") {
  const auto dir = scratch("synthetic");
  const auto r = run({"simulate", "--model", "weibull:0.5", "--scheme", "uniform", "--n-grid", "16,64,256", "--x",
                      "4", "--mode", "synthetic", "--synthetic-rate", "1", "--out", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  std::istringstream csv(slurp(dir / "estimates.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    CHECK(f.at(6) == "1");
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("simulate: infeasible x fails before sampling") {
  const auto dir = scratch("infeasible");
  const auto r = run({"simulate", "--model", "weibull:0.5", "--scheme", "uniform", "--n-grid", "16", "--x", "1.5",
                      "--out", dir.string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK_FALSE(fs::exists(dir / "estimates.csv"));
}

TEST_CASE("simulate: manifest replay is byte-identical across worker counts") {
  const auto a = scratch("replay_a");
  const auto b = scratch("replay_b");
  auto r = run({"simulate", "--model", "weibull:0.5", "--scheme", "kernel:epanechnikov", "--n-grid", "8,32", "--x",
                "3", "--replications", "9000", "--seed", "12", "--workers", "1", "--out", a.string()});
  REQUIRE(r.code == cli::kExitOk);
  r = run({"simulate", "--config", (a / "manifest.json").string(), "--workers", "3", "--out", b.string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(slurp(a / "estimates.csv") == slurp(b / "estimates.csv"));
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest.at("plan").at("seed") == 12);
}

TEST_CASE("simulate: paired quenched and annealed share a target") {
  const auto dir = scratch("paired");
  const auto r = run({"simulate", "--model", "weibull:0.5", "--scheme", "self_normalized", "--n-grid", "32", "--x",
                      "4", "--replications", "2000", "--mode", "paired", "--theta-seeds", "3", "--out", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  const std::string csv = slurp(dir / "estimates.csv");
  CHECK(csv.find("big_jump_is:quenched:1,32,4,2000") != std::string::npos);
  CHECK(csv.find("big_jump_is:quenched:3,32,4,2000") != std::string::npos);
  CHECK(csv.find("big_jump_is:annealed,32,4,2000") != std::string::npos);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    CHECK(f.at(7) == "1");
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("selftest exit codes") {
  auto r = run({"selftest"});
  CHECK(r.code == cli::kExitOk);
  r = run({"selftest", "--tol", "0"});
  CHECK(r.code == cli::kExitCheckFailed);
  CHECK(r.out.find("FAIL") != std::string::npos);
  const std::string corrupted =
      R"({"family":"karamata","anchor":1,"eta_limit":0,"eps_table":[[1,0.1],[10,0.3]],"eps_max":0.5,"horizon":10,"tail_tol":0})";
  r = run({"selftest", "--inject-svf", corrupted});
  CHECK(r.code == cli::kExitCheckFailed);
}

TEST_CASE("selftest suites pass at default tolerances") {
  const cli::SelftestOptions opts;
  CHECK(cli::integration_by_parts_suite(opts).failures() == 0);
  CHECK(cli::slowly_varying_suite(opts).failures() == 0);
  const auto lattice = cli::rate_lattice_suite(opts);
  CHECK(lattice.failures() == 0);
  CHECK(lattice.checks.size() >= 1);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"explode"}).code == cli::kExitUsage);
  CHECK(run({"rate", "--formula", "stretched", "--x", "four"}).code == cli::kExitUsage);
}

TEST_CASE("short-form parsers") {
  CHECK(cli::to_double("2.5") == 2.5);
  CHECK_THROWS(cli::to_double("2.5x"));
  CHECK(cli::parse_doubles(nlohmann::json("1,2,3")) == std::vector<double>{1, 2, 3});
  CHECK(cli::parse_sizes(nlohmann::json::array({4, 8})) == std::vector<std::size_t>{4, 8});
  CHECK(cli::parse_model(nlohmann::json("shifted-weibull:0.5:-1")).survival(3.0) ==
        doctest::Approx(std::exp(-2.0)));
  CHECK(cli::parse_scheme(nlohmann::json("kernel:quartic")).tag() ==
        WeightScheme(KernelWeights{KernelSpec::quartic()}).tag());
  CHECK(cli::parse_law(nlohmann::json("poisson:2")).mean() == 2.0);
}
