#pragma once

// Closed-form rates for weighted sums of stretched-exponential variables and
// the Legendre-Fenchel machinery for the light-tailed comparison.
//
// With Sum a_j(n) -> s1, n max a_j(n) -> s and E X = m, the rate at speed
// b(n) n^r is ((x - s1 m)/s)^r for x > s1 m. Unreachable deviations in the
// light-tailed transforms return +infinity rather than throwing.

#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ldptails/weight_schemes.hpp"

namespace ldptails {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct RateQuery {
  double x = 0.0;
  double m = 0.0;
  double s = 1.0;
  double s1 = 1.0;
  double r = 0.5;
};

/// ((x - s1 m)/s)^r. Throws DomainError for x <= s1 m, s <= 0 or r outside (0, 1).
double stretched_rate(const RateQuery& q);
/// (x - m)^r.
double iid_rate(double x, double m, double r);
/// [(e_theta/m_star)(x - m)]^r; throws DomainError when e_theta > m_star.
double random_weight_rate(double x, double m, double r, double e_theta, double m_star);
/// (sup k)^{-r} (x - m)^r.
double kernel_rate(double x, double m, double r, const KernelSpec& k);
/// (x - m/3)^alpha, the speed-n^alpha rate of the mixed-sign thirds scheme.
double mixed_sign_rate(double x, double m, double alpha);

struct Bernoulli {
  double p = 0.5;
};
struct Normal {
  double mu = 0.0;
  double sigma = 1.0;
};
struct Poisson {
  double lambda = 1.0;
};
/// Uniform law on the given sample points.
struct Empirical {
  std::vector<double> points;
};

/// Light-tailed law with finite cumulant generating function, plus the weight
/// constants s_nu (nu = 1, 2, ...) used by the cumulant series chi. Missing
/// s_nu are taken as 1, which is the uniform-weight case.
class LightTailedSpec {
 public:
  using Law = std::variant<Bernoulli, Normal, Poisson, Empirical>;

  /// Throws DomainError for invalid parameters and InvariantViolation when
  /// Lambda(0) != 0 or Lambda fails the convexity check on [-4, 4].
  explicit LightTailedSpec(Law law, std::vector<double> s_nu = {});

  const Law& law() const noexcept { return law_; }
  const std::vector<double>& weight_constants() const noexcept { return s_nu_; }
  double weight_constant(int nu) const;
  std::string name() const;

  /// Lambda(t) = log E e^{tX}.
  double cgf(double t) const;
  double cgf_derivative(double t) const;
  double mean() const;
  /// Essential supremum (may be +infinity).
  double ess_sup() const;
  /// P(X = ess_sup); 0 for atomless laws or unbounded support.
  double top_atom() const;
  /// Cumulants c_1..c_nu_max.
  std::vector<double> cumulants(int nu_max) const;

 private:
  Law law_;
  std::vector<double> s_nu_;
};

/// sup_{t >= 0} { t x - Lambda(t) }: 0 at or below the mean, +infinity above
/// the essential supremum, -log P(X = ess_sup) at the supremum.
double cramer_rate(const LightTailedSpec& spec, double x);

struct ChiStarResult {
  double value = 0.0;
  double t_opt = 0.0;
  /// max of the last two series terms over |partial sum| at t_opt.
  double diagnostic = 0.0;
};

inline constexpr int kDefaultNuMax = 40;
inline constexpr double kSeriesGuard = 1e-8;

/// sup_{t >= 0} { t x - chi(t) } with chi(t) = sum_{nu <= nu_max} s_nu c_nu t^nu / nu!.
/// Throws SeriesDomainError when the truncation diagnostic exceeds 1 while
/// bracketing or exceeds `guard` at the optimum.
ChiStarResult chi_star(const LightTailedSpec& spec, double x, int nu_max = kDefaultNuMax,
                       double guard = kSeriesGuard);

/// Sweepable formulas for the rate CSV.
struct StretchedFormula {
  double m = 0.0;
  double s = 1.0;
  double s1 = 1.0;
  double r = 0.5;
};
struct IidFormula {
  double m = 0.0;
  double r = 0.5;
};
struct RandomWeightFormula {
  double m = 0.0;
  double r = 0.5;
  double e_theta = 0.5;
  double m_star = 1.0;
};
struct KernelFormula {
  double m = 0.0;
  double r = 0.5;
  KernelSpec kernel = KernelSpec::epanechnikov();
};
struct MixedSignFormula {
  double m = 0.0;
  double alpha = 0.5;
};
struct CramerFormula {
  LightTailedSpec spec{Normal{}};
};
struct ChiStarFormula {
  LightTailedSpec spec{Normal{}};
  int nu_max = kDefaultNuMax;
};

using RateFormula = std::variant<StretchedFormula, IidFormula, RandomWeightFormula, KernelFormula,
                                 MixedSignFormula, CramerFormula, ChiStarFormula>;

/// Throws DomainError for contradictory parameters (for example e_theta > m_star).
void validate_formula(const RateFormula& f);
std::string formula_tag(const RateFormula& f);
/// "key=value;..." description of the formula parameters.
std::string formula_params(const RateFormula& f);
/// Rate at x; points outside the formula's domain give +infinity, chi_star
/// points where the truncated series is untrusted give NaN.
double evaluate_formula(const RateFormula& f, double x);

struct RateRow {
  double x = 0.0;
  double rate = 0.0;
  std::string formula;
  std::string params;
};

std::vector<RateRow> rate_sweep(std::span<const RateFormula> formulas, std::span<const double> xs);
/// CSV with columns x,rate,formula,params.
void write_rate_csv(std::span<const RateRow> rows, std::ostream& out);

}  // namespace ldptails
