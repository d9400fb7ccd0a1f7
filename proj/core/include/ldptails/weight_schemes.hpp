#pragma once

// Triangular weight arrays a_j(n), j = 1..n, and numerical diagnostics for the
// two weight regularity conditions:
//   B: sum_j a_j(n) -> s1 != 0 and n max_j a_j(n) -> s;
//   A: n^{nu-1} sum_j a_j(n)^nu = s_nu R(nu, n) with R(nu, n) -> 1 and
//      |R(nu, n) - 1| <= r_nu (1 + delta_n)^nu / n.
// Both are statements about limits; the reports below are finite-grid
// surrogates and say so in their output.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ldptails {

enum class KernelShape { kEpanechnikov, kUniform, kTriangular, kQuartic, kPiecewiseTable };

/// Symmetric kernel on [-1, 1]. A piecewise table is given on [0, 1] as
/// linearly interpolated (node, value) pairs and mirrored to [-1, 0].
class KernelSpec {
 public:
  static KernelSpec epanechnikov();
  static KernelSpec uniform();
  static KernelSpec triangular();
  static KernelSpec quartic();
  /// Throws InvariantViolation if the mirrored table does not integrate to 1
  /// within 1e-8 or is negative somewhere.
  static KernelSpec piecewise_table(std::vector<double> nodes, std::vector<double> values);

  KernelShape shape() const noexcept { return shape_; }
  std::string name() const;
  const std::vector<double>& table_nodes() const noexcept { return nodes_; }
  const std::vector<double>& table_values() const noexcept { return values_; }

  /// k(u) for u in [-1, 1] (endpoints inclusive); 0 outside.
  double operator()(double u) const;
  double sup() const noexcept { return sup_; }
  double integral() const noexcept { return integral_; }

 private:
  KernelSpec(KernelShape shape, std::vector<double> nodes, std::vector<double> values);
  void validate_and_cache();

  KernelShape shape_;
  std::vector<double> nodes_;
  std::vector<double> values_;
  double sup_ = 0.0;
  double integral_ = 0.0;
};

/// sup of k over [-1, 1]: closed form for named kernels, otherwise a
/// 10^4-point scan refined by golden-section search on each monotone run.
double kernel_sup(const KernelSpec& k);

/// Scan-and-refine supremum of an arbitrary function on [lo, hi].
double scan_sup(const std::function<double(double)>& f, double lo, double hi,
                std::size_t points = 10000);

struct ThetaUniform {
  double lo = 0.0;  // theta = lo + (hi - lo) u, u in (0, 1)
  double hi = 1.0;
};

struct ThetaDegenerate {
  double value = 1.0;
};

/// Bounded, positive weight-generating law.
class ThetaDistribution {
 public:
  using Law = std::variant<ThetaUniform, ThetaDegenerate>;

  explicit ThetaDistribution(Law law);

  const Law& law() const noexcept { return law_; }
  double sample(double u) const;
  double mean() const;
  /// Essential supremum M*.
  double ess_sup() const;

 private:
  Law law_;
};

struct UniformWeights {};
struct KernelWeights {
  KernelSpec kernel;
};
struct SelfNormalizedRandom {
  ThetaDistribution theta;
  std::uint64_t seed = 0;
};
struct MixedSignThirds {};
struct PerturbedUniform {
  double epsilon = 0.25;
};
struct CustomTable {
  std::map<std::size_t, std::vector<double>> rows;
};

/// Limits (s1, s) of the weight sequence when they are known in closed form.
struct WeightLimits {
  double s1 = 1.0;
  double s = 1.0;
};

class WeightScheme {
 public:
  using Kind = std::variant<UniformWeights, KernelWeights, SelfNormalizedRandom, MixedSignThirds,
                            PerturbedUniform, CustomTable>;

  explicit WeightScheme(Kind kind);

  const Kind& kind() const noexcept { return kind_; }
  std::string tag() const;
  bool nonnegative() const;
  bool is_self_normalized() const noexcept {
    return std::holds_alternative<SelfNormalizedRandom>(kind_);
  }
  /// Copy with the theta seed replaced (self-normalized schemes only).
  WeightScheme with_theta_seed(std::uint64_t seed) const;
  /// Closed-form (s1, s) where known; CustomTable has none and throws.
  WeightLimits limits() const;

 private:
  Kind kind_;
};

/// The row (a_1(n), ..., a_n(n)). Throws DomainError for n = 0 or a custom
/// table without row n.
std::vector<double> generate(const WeightScheme& scheme, std::size_t n);

/// theta_1..theta_n of a self-normalized scheme; theta_j depends only on
/// (seed, j), so extending n reuses earlier values.
std::vector<double> theta_values(const SelfNormalizedRandom& scheme, std::size_t n);

/// Self-normalizes theta into weights theta_j / sum theta.
std::vector<double> normalize_weights(std::span<const double> theta);

struct AssumptionReport {
  std::vector<std::size_t> n_grid;
  std::vector<double> s1_sequence;     // sum_j a_j(n)
  std::vector<double> namax_sequence;  // n max_j a_j(n)
  double s1_estimate = 0.0;
  double s_estimate = 0.0;
  std::vector<double> s_nu;                  // nu = 1..nu_max
  std::vector<std::vector<double>> r_table;  // r_table[nu-1][k] = R(nu, n_grid[k])
  std::vector<double> r_nu_envelope;         // max_n n |R(nu,n) - 1| / (1 + delta)^nu
  std::vector<double> growth_exponent;       // log-log slope of n |R(nu,n) - 1| in n
  double delta = 0.0;
  bool envelope_flag = false;
  bool b_pass = false;
  bool a1_pass = false;
  bool a2_pass = false;
  std::vector<std::string> diagnostics;
};

/// A sequence on the grid counts as convergent when its last three values
/// agree within tol (relative to max(1, |v|)), or when its consecutive
/// differences keep one sign and contract with ratio in (0, 1).
bool grid_converges(std::span<const double> values, double tol);

/// Limit estimate: Aitken delta-squared on the last three values when the
/// differences contract and exceed rounding noise, otherwise the last value.
double grid_limit(std::span<const double> values);

/// Fills the B-part of the report. b_pass needs both sequences to converge
/// on the grid and |s1| > tol. Requires >= 3 increasing grid points, last >= 1000.
AssumptionReport assumption_b_report(const WeightScheme& scheme, std::span<const std::size_t> n_grid,
                                     double tol);

/// Fills the B-part and the A-part. a1_pass: every n^{nu-1} sum a_j^nu
/// converges on the grid. a2_pass is the finite-grid surrogate for the error
/// envelope: for every nu, n |R(nu, n) - 1| / (1 + delta)^nu must not grow
/// with n (log-log slope <= kEnvelopeGrowthLimit). Throws
/// DegenerateSchemeError when some |s_nu| < 1e-15.
AssumptionReport assumption_a_report(const WeightScheme& scheme, int nu_max,
                                     std::span<const std::size_t> n_grid, double tol);

inline constexpr double kEnvelopeGrowthLimit = 0.25;

struct ImplicationResult {
  bool a_pass = false;
  bool b_pass = false;
};

/// Runs both reports on a nonnegative scheme.
ImplicationResult implication_check(const WeightScheme& scheme, int nu_max,
                                    std::span<const std::size_t> n_grid, double tol);

/// Nonnegative schemes exercised by the validators and the self-test.
std::vector<WeightScheme> scheme_catalogue();

/// CSV with columns n,s1,n_amax.
void write_b_csv(const AssumptionReport& report, std::ostream& out);
/// CSV with columns nu,n,R.
void write_a_csv(const AssumptionReport& report, std::ostream& out);

void to_json(nlohmann::json& j, const KernelSpec& k);
KernelSpec kernel_from_json(const nlohmann::json& j);
/// Named kernel: epanechnikov, uniform, triangular, quartic.
KernelSpec kernel_from_name(const std::string& name);
void to_json(nlohmann::json& j, const WeightScheme& scheme);
WeightScheme weight_scheme_from_json(const nlohmann::json& j);
std::string to_text(const WeightScheme& scheme);
WeightScheme weight_scheme_from_text(const std::string& text);

}  // namespace ldptails
