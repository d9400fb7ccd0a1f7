#pragma once

// Stretched-exponential laws: P(X >= t) sandwiched between
// c1(t) exp(-b(t) t^r) and c2(t) exp(-b(t) t^r) for t >= t_star.
//
// Families:
//   ExactWeibull          P(X > t) = exp(-t^r), t >= 0 (b = c1 = c2 = 1)
//   ShiftedExactWeibull   ExactWeibull + offset (b = 1, constant c1 <= 1 <= c2)
//   BoundedBelowEnvelope  tabulated survival c(t) exp(-b(t) t^r) with
//                         c = sqrt(c1 c2), log-linear in t on [x_min, t_star)
//
// A StretchedLower(alpha) lower tail is available on ExactWeibull only. The
// law then becomes a two-branch mixture: with probability q = exp(-t_star^alpha)
// X is drawn from P(X <= -t) = exp(-t^alpha), t >= t_star, and otherwise from
// the Weibull upper branch, so that P(X >= t) = (1 - q) exp(-t^r) for t >= 0.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ldptails/svf.hpp"

namespace ldptails {

struct ExactWeibull {};

struct ShiftedExactWeibull {
  double offset = 0.0;
};

struct BoundedBelowEnvelope {
  double x_min = 0.0;
};

struct BoundedBelow {
  double x_min = 0.0;
};

struct StretchedLower {
  double alpha = 0.5;
};

using TailFamily = std::variant<ExactWeibull, ShiftedExactWeibull, BoundedBelowEnvelope>;
using LowerTail = std::variant<BoundedBelow, StretchedLower>;

class TailModel {
 public:
  using Spec = svf::SlowlyVaryingSpec;

  static TailModel exact_weibull(double r);
  static TailModel exact_weibull(double r, StretchedLower lower, double t_star = 1.0);
  static TailModel shifted_exact_weibull(double r, double offset);
  /// Throws InvariantViolation when c1 > c2 somewhere on the validation grid,
  /// or when the tabulated survival is not monotone or leaves the sandwich.
  static TailModel bounded_below_envelope(double r, Spec b, Spec c1, Spec c2, double t_star,
                                          double x_min);

  double r() const noexcept { return r_; }
  const Spec& b() const noexcept { return b_; }
  const Spec& c1() const noexcept { return c1_; }
  const Spec& c2() const noexcept { return c2_; }
  double t_star() const noexcept { return t_star_; }
  const TailFamily& family() const noexcept { return family_; }
  const LowerTail& lower_tail() const noexcept { return lower_; }

  /// Exact P(X > t) of the sampling law.
  double survival(double t) const;
  /// Lebesgue density of the sampling law (all families are atomless).
  double density(double t) const;
  /// Inverse survival: the t with P(X > t) = u. Nonincreasing in u.
  double inverse_survival(double u) const;
  /// Points where the density is non-smooth or singular; quadrature splits there.
  std::vector<double> kinks() const;
  /// Essential infimum of X (may be -infinity).
  double lower_bound() const;

  /// Probability mass of the stretched lower branch (0 when bounded below).
  double lower_branch_mass() const;

  friend void to_json(nlohmann::json& j, const TailModel& model);

 private:
  struct Table {
    // Knots in u = t^r with log-survival values; log S is linear in u between
    // knots and beyond the last knot.
    std::vector<double> u;
    std::vector<double> log_s;
    std::vector<double> t;
  };

  TailModel(double r, Spec b, Spec c1, Spec c2, double t_star, TailFamily family, LowerTail lower);

  void build_envelope_table();
  double envelope_log_survival(double t) const;
  double envelope_inverse(double log_u) const;

  double r_;
  Spec b_;
  Spec c1_;
  Spec c2_;
  double t_star_;
  TailFamily family_;
  LowerTail lower_;
  Table table_;
  double lower_slope_ = 0.0;  // d log S / dt on [x_min, t_star) for the envelope
};

TailModel tail_model_from_json(const nlohmann::json& j);
std::string to_text(const TailModel& model);
TailModel tail_model_from_text(const std::string& text);

struct SurvivalBounds {
  double lower = 0.0;
  double upper = 1.0;
};

/// (c1(t) e^{-b(t) t^r}, c2(t) e^{-b(t) t^r}) clipped to [0, 1] for t >= t_star;
/// the exact survival (both entries) below t_star.
SurvivalBounds survival_bounds(const TailModel& model, double t);

/// Inverse-survival transform of a uniform variate; throws DomainError unless
/// u lies in (0, 1).
double sample(const TailModel& model, double u);

double mean(const TailModel& model);

/// E[X^k], k >= 1.
double moment(const TailModel& model, int k);

/// |E[e^{alpha X} 1{a <= X <= b_hi}] - (alpha int_a^b_hi e^{alpha z} P(X >= z) dz
///   + e^{alpha a} P(X >= a) - e^{alpha b_hi} P(X > b_hi))|, both sides by
/// quadrature (density on the left, survival on the right).
double integration_by_parts_residual(const TailModel& model, double alpha, double a, double b_hi);

/// Models used by the self-test suites and acceptance runs.
std::vector<TailModel> model_catalogue();

}  // namespace ldptails
