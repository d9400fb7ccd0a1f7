#pragma once

// Slowly varying functions used as tail envelopes b, c1, c2.
//
// Only validated parametric families are representable, so slow variation is
// something the library can check rather than assume:
//   Constant(c)            l(t) = c
//   PowerOfLog(p, shift)   l(t) = log(shift + t)^p,        shift >= 1
//   IteratedLog(p)         l(t) = log(log(e^2 + t))^p
//   Karamata(a, eta, eps)  l(t) = exp(eta + int_a^t eps(u)/u du), eps piecewise constant
// plus pointwise products, sums and real powers of those.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ldptails::svf {

class SlowlyVaryingSpec;
using SpecPtr = std::shared_ptr<const SlowlyVaryingSpec>;

struct Constant {
  double value = 1.0;
};

struct PowerOfLog {
  double power = 1.0;
  double shift = 1.0;
};

struct IteratedLog {
  double power = 1.0;
};

/// eps(u) = value of the last breakpoint at or below u; zero before the first
/// breakpoint. The final segment extends to infinity.
struct EpsBreakpoint {
  double at = 1.0;
  double value = 0.0;
};

struct Karamata {
  double anchor = 1.0;  // lower limit a of the integral
  double eta_limit = 0.0;
  std::vector<EpsBreakpoint> eps_table;
  double eps_max = 1.0;   // |eps(u)| <= eps_max everywhere
  double horizon = 1.0;   // |eps(u)| <= tail_tol for u >= horizon
  double tail_tol = 0.0;
};

struct Product {
  SpecPtr lhs;
  SpecPtr rhs;
};

struct Sum {
  SpecPtr lhs;
  SpecPtr rhs;
};

struct Power {
  SpecPtr base;
  double exponent = 1.0;
};

class SlowlyVaryingSpec {
 public:
  using Family = std::variant<Constant, PowerOfLog, IteratedLog, Karamata, Product, Sum, Power>;

  static constexpr double kDefaultFloor = 1.0;

  /// Throws DomainError for out-of-range parameters and InvariantViolation
  /// when a Karamata table is unbounded or does not vanish past its horizon.
  explicit SlowlyVaryingSpec(Family family, double domain_floor = kDefaultFloor);

  static SlowlyVaryingSpec constant(double value);
  static SlowlyVaryingSpec power_of_log(double power, double shift = 1.0);
  static SlowlyVaryingSpec iterated_log(double power);
  static SlowlyVaryingSpec karamata(Karamata params);
  static SlowlyVaryingSpec product(SlowlyVaryingSpec lhs, SlowlyVaryingSpec rhs);
  static SlowlyVaryingSpec sum(SlowlyVaryingSpec lhs, SlowlyVaryingSpec rhs);
  static SlowlyVaryingSpec power(SlowlyVaryingSpec base, double exponent);

  const Family& family() const noexcept { return family_; }
  double domain_floor() const noexcept { return domain_floor_; }

  /// True for Constant(c); lets callers skip evaluation in hot loops.
  bool is_constant() const noexcept;

  double operator()(double t) const;

  friend bool operator==(const SlowlyVaryingSpec& a, const SlowlyVaryingSpec& b);

 private:
  double evaluate_unclamped(double t) const;

  Family family_;
  double domain_floor_;
};

/// l(t); t below the domain floor evaluates at the floor. Throws DomainError
/// for t <= 0.
double evaluate(const SlowlyVaryingSpec& spec, double t);

/// |l(a t)/l(t) - 1|.
double slow_variation_deviation(const SlowlyVaryingSpec& spec, double a, double t);

/// l(g(t) t)/l(t); tends to 1 whenever g(t) -> g_limit in (0, inf).
double ratio_with_scaling(const SlowlyVaryingSpec& spec, double g_limit,
                          const std::function<double(double)>& g, double t);

/// |l(m(a t))/l(m(t)) - 1| for the composition l o m. Composition is only a
/// diagnostic; it is not a constructible spec. Requires m(t) -> infinity.
double composition_deviation(const SlowlyVaryingSpec& outer, const SlowlyVaryingSpec& inner,
                             double a, double t);

/// |log l(t)| / log t, which tends to 0 for slowly varying l. Requires t > 1.
double log_growth_ratio(const SlowlyVaryingSpec& spec, double t);

/// Whether t^alpha l(t) is strictly increasing and t^-alpha l(t) strictly
/// decreasing along the increasing grid.
bool potter_monotone(const SlowlyVaryingSpec& spec, double alpha, std::span<const double> grid);

/// Shipped instances, with parameters inside the documented ranges
/// (|p| <= 0.25 for PowerOfLog, |p| <= 0.5 for IteratedLog, Karamata with
/// |eta| + eps_max log(horizon/a) <= 0.9).
std::vector<SlowlyVaryingSpec> catalogue();

void to_json(nlohmann::json& j, const SlowlyVaryingSpec& spec);
SlowlyVaryingSpec spec_from_json(const nlohmann::json& j);

std::string to_text(const SlowlyVaryingSpec& spec);
SlowlyVaryingSpec from_text(const std::string& text);

}  // namespace ldptails::svf
