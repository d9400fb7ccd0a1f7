#include "ldptails/tail_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "ldptails/errors.hpp"
#include "ldptails/quadrature.hpp"

namespace ldptails {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::size_t kEnvelopeKnots = 2048;
// Tabulation stops once log-survival falls below this; exp() underflows
// shortly after.
constexpr double kLogSurvivalFloor = -760.0;
constexpr double kMeanTol = 1e-8;
constexpr double kMomentRelTol = 1e-6;
constexpr double kIdentityQuadTol = 1e-9;

svf::SlowlyVaryingSpec one() { return svf::SlowlyVaryingSpec::constant(1.0); }

double weibull_survival(double r, double t) { return t <= 0.0 ? 1.0 : std::exp(-std::pow(t, r)); }

double weibull_density(double r, double t) {
  if (t <= 0.0) return 0.0;
  return r * std::pow(t, r - 1.0) * std::exp(-std::pow(t, r));
}

}  // namespace

TailModel::TailModel(double r, Spec b, Spec c1, Spec c2, double t_star, TailFamily family,
                     LowerTail lower)
    : r_(r),
      b_(std::move(b)),
      c1_(std::move(c1)),
      c2_(std::move(c2)),
      t_star_(t_star),
      family_(std::move(family)),
      lower_(std::move(lower)) {
  if (!(r_ > 0.0 && r_ < 1.0)) throw DomainError("tail model: r must lie in (0, 1)");
  if (!(t_star_ > 0.0) || !std::isfinite(t_star_)) {
    throw DomainError("tail model: t_star must be positive and finite");
  }
  if (const auto* s = std::get_if<StretchedLower>(&lower_)) {
    if (!(s->alpha > 0.0 && s->alpha < 1.0)) {
      throw DomainError("tail model: stretched lower-tail alpha must lie in (0, 1)");
    }
    if (!std::holds_alternative<ExactWeibull>(family_)) {
      throw DomainError("tail model: stretched lower tail is only available on exact_weibull");
    }
  }
  if (std::holds_alternative<BoundedBelowEnvelope>(family_)) build_envelope_table();
}

TailModel TailModel::exact_weibull(double r) {
  return TailModel(r, one(), one(), one(), 1.0, ExactWeibull{}, BoundedBelow{0.0});
}

TailModel TailModel::exact_weibull(double r, StretchedLower lower, double t_star) {
  if (!(lower.alpha > 0.0 && lower.alpha < 1.0)) {
    throw DomainError("tail model: stretched lower-tail alpha must lie in (0, 1)");
  }
  if (!(t_star > 0.0)) throw DomainError("tail model: t_star must be positive");
  const double upper_mass = 1.0 - std::exp(-std::pow(t_star, lower.alpha));
  auto c = svf::SlowlyVaryingSpec::constant(upper_mass);
  return TailModel(r, one(), c, c, t_star, ExactWeibull{}, lower);
}

TailModel TailModel::shifted_exact_weibull(double r, double offset) {
  if (!std::isfinite(offset)) throw DomainError("tail model: offset must be finite");
  if (!(r > 0.0 && r < 1.0)) throw DomainError("tail model: r must lie in (0, 1)");
  // exp(t^r - (t - offset)^r) is monotone on [t_star, inf) and tends to 1, so
  // its value at t_star and 1 bracket it.
  const double t_star = std::max(1.0, offset + 1.0);
  const double edge = std::exp(std::pow(t_star, r) - std::pow(t_star - offset, r));
  return TailModel(r, one(), svf::SlowlyVaryingSpec::constant(std::min(edge, 1.0)),
                   svf::SlowlyVaryingSpec::constant(std::max(edge, 1.0)), t_star,
                   ShiftedExactWeibull{offset}, BoundedBelow{offset});
}

TailModel TailModel::bounded_below_envelope(double r, Spec b, Spec c1, Spec c2, double t_star,
                                            double x_min) {
  if (!std::isfinite(x_min) || !(x_min < t_star)) {
    throw DomainError("tail model: envelope requires finite x_min < t_star");
  }
  return TailModel(r, std::move(b), std::move(c1), std::move(c2), t_star,
                   BoundedBelowEnvelope{x_min}, BoundedBelow{x_min});
}

void TailModel::build_envelope_table() {
  const double x_min = std::get<BoundedBelowEnvelope>(family_).x_min;
  auto target_log_s = [this](double t) {
    return 0.5 * (std::log(c1_(t)) + std::log(c2_(t))) - b_(t) * std::pow(t, r_);
  };

  const double u0 = std::pow(t_star_, r_);
  double u_end = 2.0 * u0 + 1.0;
  while (target_log_s(std::pow(u_end, 1.0 / r_)) > kLogSurvivalFloor) {
    u_end *= 2.0;
    if (u_end > 1e12) {
      throw InvariantViolation("envelope: survival does not decay; b(t) t^r stays bounded");
    }
  }

  table_ = {};
  table_.u.reserve(kEnvelopeKnots);
  for (std::size_t k = 0; k < kEnvelopeKnots; ++k) {
    const double u = u0 + (u_end - u0) * static_cast<double>(k) / (kEnvelopeKnots - 1);
    const double t = k == 0 ? t_star_ : std::pow(u, 1.0 / r_);
    table_.u.push_back(u);
    table_.t.push_back(t);
    table_.log_s.push_back(target_log_s(t));
  }

  if (table_.log_s.front() > 0.0) {
    throw InvariantViolation("envelope: c(t_star) exp(-b(t_star) t_star^r) exceeds 1");
  }
  for (std::size_t k = 0; k < kEnvelopeKnots; ++k) {
    const double t = table_.t[k];
    if (c1_(t) > c2_(t)) {
      std::ostringstream msg;
      msg << "envelope: c1(t) > c2(t) at t = " << t;
      throw InvariantViolation(msg.str());
    }
    if (k == 0) continue;
    if (!(table_.log_s[k] <= table_.log_s[k - 1])) {
      std::ostringstream msg;
      msg << "envelope: tabulated survival increases at t = " << t;
      throw InvariantViolation(msg.str());
    }
    // Interpolation between knots must stay inside the sandwich.
    const double u_mid = 0.5 * (table_.u[k - 1] + table_.u[k]);
    const double t_mid = std::pow(u_mid, 1.0 / r_);
    const double interp = 0.5 * (table_.log_s[k - 1] + table_.log_s[k]);
    const double base = -b_(t_mid) * std::pow(t_mid, r_);
    const double slack = 1e-9 * std::max(1.0, std::abs(base));
    if (interp < std::log(c1_(t_mid)) + base - slack ||
        interp > std::log(c2_(t_mid)) + base + slack) {
      std::ostringstream msg;
      msg << "envelope: interpolated survival leaves [c1, c2] e^{-b t^r} at t = " << t_mid;
      throw InvariantViolation(msg.str());
    }
  }
  if (!(table_.log_s.back() < table_.log_s[kEnvelopeKnots - 2])) {
    throw InvariantViolation("envelope: tabulated survival flat at the end of the table");
  }
  lower_slope_ = table_.log_s.front() / (t_star_ - x_min);
}

double TailModel::envelope_log_survival(double t) const {
  const double x_min = std::get<BoundedBelowEnvelope>(family_).x_min;
  if (t < x_min) return 0.0;
  if (t < t_star_) return lower_slope_ * (t - x_min);
  const double u = std::pow(t, r_);
  const auto& us = table_.u;
  std::size_t k = static_cast<std::size_t>(std::upper_bound(us.begin(), us.end(), u) - us.begin());
  k = std::clamp<std::size_t>(k, 1, us.size() - 1);
  const double slope = (table_.log_s[k] - table_.log_s[k - 1]) / (us[k] - us[k - 1]);
  return table_.log_s[k - 1] + slope * (u - us[k - 1]);
}

double TailModel::envelope_inverse(double log_u) const {
  const double x_min = std::get<BoundedBelowEnvelope>(family_).x_min;
  const auto& ls = table_.log_s;
  if (log_u >= ls.front()) {
    // lower_slope_ == 0 means S(t_star) = 1, so this branch has no mass.
    return lower_slope_ == 0.0 ? t_star_ : x_min + log_u / lower_slope_;
  }
  // First knot whose log-survival is strictly below log_u.
  std::size_t k = static_cast<std::size_t>(
      std::upper_bound(ls.begin(), ls.end(), log_u, std::greater<>()) - ls.begin());
  k = std::clamp<std::size_t>(k, 1, ls.size() - 1);
  const double drop = ls[k] - ls[k - 1];
  const double u = table_.u[k - 1] + (log_u - ls[k - 1]) * (table_.u[k] - table_.u[k - 1]) / drop;
  return std::pow(u, 1.0 / r_);
}

double TailModel::lower_branch_mass() const {
  if (const auto* s = std::get_if<StretchedLower>(&lower_)) {
    return std::exp(-std::pow(t_star_, s->alpha));
  }
  return 0.0;
}

double TailModel::survival(double t) const {
  return std::visit(
      Overloaded{
          [&](const ExactWeibull&) {
            if (const auto* s = std::get_if<StretchedLower>(&lower_)) {
              const double q = lower_branch_mass();
              if (t >= 0.0) return (1.0 - q) * weibull_survival(r_, t);
              if (t >= -t_star_) return 1.0 - q;
              return -std::expm1(-std::pow(-t, s->alpha));
            }
            return weibull_survival(r_, t);
          },
          [&](const ShiftedExactWeibull& s) { return weibull_survival(r_, t - s.offset); },
          [&](const BoundedBelowEnvelope&) { return std::exp(envelope_log_survival(t)); },
      },
      family_);
}

double TailModel::density(double t) const {
  return std::visit(
      Overloaded{
          [&](const ExactWeibull&) {
            if (const auto* s = std::get_if<StretchedLower>(&lower_)) {
              if (t > 0.0) return (1.0 - lower_branch_mass()) * weibull_density(r_, t);
              if (t >= -t_star_) return 0.0;
              const double v = -t;
              return s->alpha * std::pow(v, s->alpha - 1.0) * std::exp(-std::pow(v, s->alpha));
            }
            return weibull_density(r_, t);
          },
          [&](const ShiftedExactWeibull& s) { return weibull_density(r_, t - s.offset); },
          [&](const BoundedBelowEnvelope& e) {
            if (t <= e.x_min) return 0.0;
            const double s = std::exp(envelope_log_survival(t));
            if (t < t_star_) return -lower_slope_ * s;
            const double u = std::pow(t, r_);
            const auto& us = table_.u;
            std::size_t k = static_cast<std::size_t>(
                std::upper_bound(us.begin(), us.end(), u) - us.begin());
            k = std::clamp<std::size_t>(k, 1, us.size() - 1);
            const double slope = (table_.log_s[k] - table_.log_s[k - 1]) / (us[k] - us[k - 1]);
            return -slope * r_ * std::pow(t, r_ - 1.0) * s;
          },
      },
      family_);
}

double TailModel::inverse_survival(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("sample: uniform variate must lie in (0, 1)");
  return std::visit(
      Overloaded{
          [&](const ExactWeibull&) {
            if (const auto* s = std::get_if<StretchedLower>(&lower_)) {
              const double upper_mass = 1.0 - lower_branch_mass();
              if (u <= upper_mass) return std::pow(-std::log(u / upper_mass), 1.0 / r_);
              return -std::pow(-std::log1p(-u), 1.0 / s->alpha);
            }
            return std::pow(-std::log(u), 1.0 / r_);
          },
          [&](const ShiftedExactWeibull& s) {
            return s.offset + std::pow(-std::log(u), 1.0 / r_);
          },
          [&](const BoundedBelowEnvelope&) { return envelope_inverse(std::log(u)); },
      },
      family_);
}

std::vector<double> TailModel::kinks() const {
  return std::visit(Overloaded{
                        [&](const ExactWeibull&) {
                          if (std::holds_alternative<StretchedLower>(lower_)) {
                            return std::vector<double>{-t_star_, 0.0};
                          }
                          return std::vector<double>{0.0};
                        },
                        [](const ShiftedExactWeibull& s) { return std::vector<double>{s.offset}; },
                        [&](const BoundedBelowEnvelope& e) {
                          std::vector<double> k{e.x_min};
                          k.insert(k.end(), table_.t.begin(), table_.t.end());
                          return k;
                        },
                    },
                    family_);
}

double TailModel::lower_bound() const {
  if (const auto* b = std::get_if<BoundedBelow>(&lower_)) return b->x_min;
  return -std::numeric_limits<double>::infinity();
}

SurvivalBounds survival_bounds(const TailModel& model, double t) {
  if (t < model.t_star()) {
    const double s = model.survival(t);
    return {s, s};
  }
  const double core = std::exp(-model.b()(t) * std::pow(t, model.r()));
  return {std::clamp(model.c1()(t) * core, 0.0, 1.0), std::clamp(model.c2()(t) * core, 0.0, 1.0)};
}

double sample(const TailModel& model, double u) { return model.inverse_survival(u); }

namespace {

// E[|X|^k ; X <= -t_star] for the stretched lower branch.
double lower_branch_abs_moment(const TailModel& model, double alpha, int k) {
  const double t_star = model.t_star();
  const double q = model.lower_branch_mass();
  return std::pow(t_star, k) * q +
         (k / alpha) * boost::math::tgamma(k / alpha, std::pow(t_star, alpha));
}

double envelope_moment(const TailModel& model, double x_min, int k, double abs_tol) {
  const auto kinks = model.kinks();
  auto integrand = [&](double t) {
    return k * (k == 1 ? 1.0 : std::pow(t, k - 1)) * model.survival(t);
  };
  const auto [value, error] = integrate_with_error(integrand, x_min, INFINITY, kinks);
  const double result = std::pow(x_min, k) + value;
  const double tol = k == 1 ? abs_tol : kMomentRelTol * std::max(1.0, std::abs(result));
  if (!std::isfinite(result) || error > tol) {
    std::ostringstream diag;
    diag.precision(17);
    diag << "moment k = " << k << ", value " << result << ", error estimate " << error
         << ", tolerance " << tol;
    throw NumericError("envelope moment quadrature did not converge", diag.str());
  }
  return result;
}

}  // namespace

double mean(const TailModel& model) {
  return std::visit(
      Overloaded{
          [&](const ExactWeibull&) {
            const double upper = boost::math::tgamma(1.0 + 1.0 / model.r());
            if (const auto* s = std::get_if<StretchedLower>(&model.lower_tail())) {
              return (1.0 - model.lower_branch_mass()) * upper -
                     lower_branch_abs_moment(model, s->alpha, 1);
            }
            return upper;
          },
          [&](const ShiftedExactWeibull& s) {
            return s.offset + boost::math::tgamma(1.0 + 1.0 / model.r());
          },
          [&](const BoundedBelowEnvelope& e) { return envelope_moment(model, e.x_min, 1, kMeanTol); },
      },
      model.family());
}

double moment(const TailModel& model, int k) {
  if (k < 1) throw DomainError("moment: order must be >= 1");
  const double r = model.r();
  return std::visit(
      Overloaded{
          [&](const ExactWeibull&) {
            const double upper = boost::math::tgamma(1.0 + k / r);
            if (const auto* s = std::get_if<StretchedLower>(&model.lower_tail())) {
              const double sign = k % 2 == 0 ? 1.0 : -1.0;
              return (1.0 - model.lower_branch_mass()) * upper +
                     sign * lower_branch_abs_moment(model, s->alpha, k);
            }
            return upper;
          },
          [&](const ShiftedExactWeibull& s) {
            double total = 0.0;
            for (int i = 0; i <= k; ++i) {
              total += boost::math::binomial_coefficient<double>(k, i) *
                       std::pow(s.offset, k - i) * boost::math::tgamma(1.0 + i / r);
            }
            return total;
          },
          [&](const BoundedBelowEnvelope& e) { return envelope_moment(model, e.x_min, k, kMeanTol); },
      },
      model.family());
}

double integration_by_parts_residual(const TailModel& model, double alpha, double a, double b_hi) {
  if (!(alpha > 0.0)) throw DomainError("integration_by_parts_residual: alpha must be positive");
  if (!(a < b_hi)) throw DomainError("integration_by_parts_residual: require a < b_hi");
  const auto kinks = model.kinks();
  const double lhs = integrate([&](double x) { return std::exp(alpha * x) * model.density(x); },
                               a, b_hi, kIdentityQuadTol, kinks);
  const double tail = integrate([&](double z) { return std::exp(alpha * z) * model.survival(z); },
                                a, b_hi, kIdentityQuadTol, kinks);
  const double rhs = alpha * tail + std::exp(alpha * a) * model.survival(a) -
                     std::exp(alpha * b_hi) * model.survival(b_hi);
  return std::abs(lhs - rhs);
}

std::vector<TailModel> model_catalogue() {
  using S = svf::SlowlyVaryingSpec;
  return {
      TailModel::exact_weibull(0.5),
      TailModel::exact_weibull(0.25),
      TailModel::shifted_exact_weibull(0.5, -1.0),
      TailModel::exact_weibull(0.5, StretchedLower{0.3}, 1.0),
      TailModel::bounded_below_envelope(0.3, S::constant(1.0), S::constant(0.5), S::constant(2.0),
                                        10.0, 0.0),
      TailModel::bounded_below_envelope(
          0.5, S::power_of_log(0.25), S::constant(0.5),
          S::product(S::constant(1.5), S::iterated_log(0.5)), 5.0, -1.0),
  };
}

// --- structured text ------------------------------------------------------

void to_json(nlohmann::json& j, const TailModel& model) {
  j = nlohmann::json::object();
  j["r"] = model.r();
  j["t_star"] = model.t_star();
  std::visit(Overloaded{
                 [&](const ExactWeibull&) { j["family"] = {{"tag", "exact_weibull"}}; },
                 [&](const ShiftedExactWeibull& s) {
                   j["family"] = {{"tag", "shifted_exact_weibull"}, {"offset", s.offset}};
                 },
                 [&](const BoundedBelowEnvelope& e) {
                   j["family"] = {{"tag", "bounded_below_envelope"}, {"x_min", e.x_min}};
                   j["envelope_table"] = {{"u", model.table_.u},
                                          {"log_survival", model.table_.log_s}};
                 },
             },
             model.family());
  std::visit(Overloaded{
                 [&](const BoundedBelow& b) {
                   j["lower_tail"] = {{"tag", "bounded_below"}, {"x_min", b.x_min}};
                 },
                 [&](const StretchedLower& s) {
                   j["lower_tail"] = {{"tag", "stretched_lower"}, {"alpha", s.alpha}};
                 },
             },
             model.lower_tail());
  j["b"] = model.b();
  j["c1"] = model.c1();
  j["c2"] = model.c2();
}

TailModel tail_model_from_json(const nlohmann::json& j) {
  try {
    const double r = j.at("r").get<double>();
    const auto& family = j.at("family");
    const std::string tag = family.at("tag").get<std::string>();
    std::string lower_tag = "bounded_below";
    if (j.contains("lower_tail")) lower_tag = j.at("lower_tail").at("tag").get<std::string>();

    if (tag == "exact_weibull") {
      if (lower_tag == "stretched_lower") {
        return TailModel::exact_weibull(
            r, StretchedLower{j.at("lower_tail").at("alpha").get<double>()},
            j.value("t_star", 1.0));
      }
      if (lower_tag != "bounded_below") throw FormatError("tail model: unknown lower tail '" + lower_tag + "'");
      return TailModel::exact_weibull(r);
    }
    if (lower_tag != "bounded_below") {
      throw DomainError("tail model: stretched lower tail is only available on exact_weibull");
    }
    if (tag == "shifted_exact_weibull") {
      return TailModel::shifted_exact_weibull(r, family.at("offset").get<double>());
    }
    if (tag == "bounded_below_envelope") {
      auto spec_or_one = [&](const char* key) {
        return j.contains(key) ? svf::spec_from_json(j.at(key)) : svf::SlowlyVaryingSpec::constant(1.0);
      };
      auto model = TailModel::bounded_below_envelope(
          r, spec_or_one("b"), spec_or_one("c1"), spec_or_one("c2"), j.at("t_star").get<double>(),
          family.at("x_min").get<double>());
      if (j.contains("envelope_table")) {
        nlohmann::json rebuilt = model;
        if (rebuilt.at("envelope_table") != j.at("envelope_table")) {
          throw FormatError("tail model: stored envelope table does not match its parameters");
        }
      }
      return model;
    }
    throw FormatError("tail model: unknown family '" + tag + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tail model: ") + e.what());
  }
}

std::string to_text(const TailModel& model) {
  nlohmann::json j = model;
  return j.dump();
}

TailModel tail_model_from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("tail model: ") + e.what());
  }
  return tail_model_from_json(j);
}

}  // namespace ldptails
