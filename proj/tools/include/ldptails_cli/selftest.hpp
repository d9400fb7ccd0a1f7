#pragma once

// Numeric identity suites run by `ldptails selftest`.
//
// Every check produces a nonnegative residual and passes when
// residual < tolerance (strictly), so a tolerance of 0 fails every check.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ldptails::cli {

struct SelftestOptions {
  /// Replaces every suite tolerance when set.
  std::optional<double> tol;
  /// Extra slowly varying specs (JSON) pushed through the svf suite.
  std::vector<nlohmann::json> injected_svf;
  std::uint64_t seed = 1;
};

struct CheckResult {
  std::string suite;
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct SelftestReport {
  std::vector<CheckResult> checks;
  std::size_t failures() const;
};

inline constexpr double kIbpTolerance = 1e-6;
inline constexpr double kSvfDeviationTolerance = 0.05;
inline constexpr double kClosureTolerance = 1e-3;
inline constexpr double kLatticeTolerance = 1e-13;

SelftestReport integration_by_parts_suite(const SelftestOptions& opts);
SelftestReport slowly_varying_suite(const SelftestOptions& opts);
SelftestReport rate_lattice_suite(const SelftestOptions& opts, int queries = 1000);
SelftestReport run_selftest(const SelftestOptions& opts);

}  // namespace ldptails::cli
