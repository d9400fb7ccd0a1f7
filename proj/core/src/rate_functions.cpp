#include "ldptails/rate_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ldptails/csv.hpp"
#include "ldptails/errors.hpp"

namespace ldptails {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_exponent(double r, const char* what) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError(std::string(what) + ": exponent must lie in (0, 1)");
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + ": arguments must be finite");
}

double log_sum_exp(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double e : v) acc += std::exp(e - top);
  return top + std::log(acc);
}

// Cumulants c_2.. of a law given its centred moments mu_k / k!, k = 0..nu_max,
// via the power-series logarithm; c_1 is filled in by the caller.
std::vector<double> cumulants_from_scaled_moments(const std::vector<double>& a, int nu_max) {
  const auto n = static_cast<std::size_t>(nu_max);
  std::vector<double> b(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    double acc = 0.0;
    for (std::size_t j = 1; j < k; ++j) acc += static_cast<double>(j) * b[j] * a[k - j];
    b[k] = a[k] - acc / static_cast<double>(k);
  }
  std::vector<double> c(n);
  double fact = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    fact *= static_cast<double>(k);
    c[k - 1] = fact * b[k];
  }
  return c;
}

std::string fmt(double v) { return format_number(v); }

}  // namespace

// ---------------------------------------------------------------- closed forms

double stretched_rate(const RateQuery& q) {
  check_finite(q.x, "stretched_rate");
  check_finite(q.m, "stretched_rate");
  check_exponent(q.r, "stretched_rate");
  if (!(q.s > 0.0) || !std::isfinite(q.s)) throw DomainError("stretched_rate: s must be positive");
  if (!(q.x > q.s1 * q.m)) throw DomainError("stretched_rate: requires x > s1 m");
  return std::pow((q.x - q.s1 * q.m) / q.s, q.r);
}

double iid_rate(double x, double m, double r) {
  check_finite(x, "iid_rate");
  check_finite(m, "iid_rate");
  check_exponent(r, "iid_rate");
  if (!(x > m)) throw DomainError("iid_rate: requires x > m");
  return std::pow(x - m, r);
}

double random_weight_rate(double x, double m, double r, double e_theta, double m_star) {
  check_finite(x, "random_weight_rate");
  check_finite(m, "random_weight_rate");
  check_exponent(r, "random_weight_rate");
  if (!(e_theta > 0.0) || !(m_star > 0.0) || !std::isfinite(m_star)) {
    throw DomainError("random_weight_rate: E[theta] and M* must be positive and finite");
  }
  if (e_theta > m_star) throw DomainError("random_weight_rate: E[theta] exceeds the essential supremum M*");
  if (!(x > m)) throw DomainError("random_weight_rate: requires x > m");
  return std::pow(e_theta / m_star * (x - m), r);
}

double kernel_rate(double x, double m, double r, const KernelSpec& k) {
  check_finite(x, "kernel_rate");
  check_finite(m, "kernel_rate");
  check_exponent(r, "kernel_rate");
  if (!(x > m)) throw DomainError("kernel_rate: requires x > m");
  return std::pow(k.sup(), -r) * std::pow(x - m, r);
}

double mixed_sign_rate(double x, double m, double alpha) {
  check_finite(x, "mixed_sign_rate");
  check_finite(m, "mixed_sign_rate");
  check_exponent(alpha, "mixed_sign_rate");
  if (!(x > m / 3.0)) throw DomainError("mixed_sign_rate: requires x > m/3");
  return std::pow(x - m / 3.0, alpha);
}

// ---------------------------------------------------------------- light tails

LightTailedSpec::LightTailedSpec(Law law, std::vector<double> s_nu)
    : law_(std::move(law)), s_nu_(std::move(s_nu)) {
  std::visit(Overloaded{
                 [](const Bernoulli& b) {
                   if (!(b.p > 0.0 && b.p < 1.0)) throw DomainError("bernoulli: p must lie in (0, 1)");
                 },
                 [](const Normal& n) {
                   check_finite(n.mu, "normal");
                   if (!(n.sigma > 0.0) || !std::isfinite(n.sigma)) {
                     throw DomainError("normal: sigma must be positive");
                   }
                 },
                 [](const Poisson& p) {
                   if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
                     throw DomainError("poisson: lambda must be positive");
                   }
                 },
                 [](const Empirical& e) {
                   if (e.points.empty()) throw DomainError("empirical: no sample points");
                   for (double v : e.points) check_finite(v, "empirical");
                 },
             },
             law_);
  for (double s : s_nu_) check_finite(s, "weight constants");

  if (std::abs(cgf(0.0)) > 1e-14) throw InvariantViolation("light-tailed spec: Lambda(0) != 0");
  const double h = 0.08;
  for (int i = -49; i <= 49; ++i) {
    const double t = h * i;
    const double second = cgf(t + h) - 2.0 * cgf(t) + cgf(t - h);
    if (second < -1e-8 * std::max(1.0, std::abs(cgf(t)))) {
      throw InvariantViolation("light-tailed spec: Lambda is not convex near t = " + fmt(t));
    }
  }
}

double LightTailedSpec::weight_constant(int nu) const {
  const auto i = static_cast<std::size_t>(nu - 1);
  return nu >= 1 && i < s_nu_.size() ? s_nu_[i] : 1.0;
}

std::string LightTailedSpec::name() const {
  return std::visit(Overloaded{
                        [](const Bernoulli& b) { return "bernoulli(" + fmt(b.p) + ")"; },
                        [](const Normal& n) { return "normal(" + fmt(n.mu) + "," + fmt(n.sigma) + ")"; },
                        [](const Poisson& p) { return "poisson(" + fmt(p.lambda) + ")"; },
                        [](const Empirical& e) {
                          return "empirical(" + std::to_string(e.points.size()) + ")";
                        },
                    },
                    law_);
}

double LightTailedSpec::cgf(double t) const {
  return std::visit(Overloaded{
                        [t](const Bernoulli& b) {
                          if (t > 0.0) return t + std::log(b.p + (1.0 - b.p) * std::exp(-t));
                          return std::log1p(b.p * std::expm1(t));
                        },
                        [t](const Normal& n) { return n.mu * t + 0.5 * n.sigma * n.sigma * t * t; },
                        [t](const Poisson& p) { return p.lambda * std::expm1(t); },
                        [t](const Empirical& e) {
                          std::vector<double> v(e.points.size());
                          for (std::size_t i = 0; i < v.size(); ++i) v[i] = t * e.points[i];
                          return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
                        },
                    },
                    law_);
}

double LightTailedSpec::cgf_derivative(double t) const {
  return std::visit(Overloaded{
                        [t](const Bernoulli& b) {
                          if (t > 0.0) return 1.0 / (1.0 + (1.0 - b.p) / b.p * std::exp(-t));
                          const double e = std::exp(t);
                          return b.p * e / (1.0 - b.p + b.p * e);
                        },
                        [t](const Normal& n) { return n.mu + n.sigma * n.sigma * t; },
                        [t](const Poisson& p) { return p.lambda * std::exp(t); },
                        [t](const Empirical& e) {
                          double top = -kInfinity;
                          for (double x : e.points) top = std::max(top, t * x);
                          double w = 0.0;
                          double wx = 0.0;
                          for (double x : e.points) {
                            const double q = std::exp(t * x - top);
                            w += q;
                            wx += q * x;
                          }
                          return wx / w;
                        },
                    },
                    law_);
}

double LightTailedSpec::mean() const { return cgf_derivative(0.0); }

double LightTailedSpec::ess_sup() const {
  return std::visit(Overloaded{
                        [](const Bernoulli&) { return 1.0; },
                        [](const Normal&) { return kInfinity; },
                        [](const Poisson&) { return kInfinity; },
                        [](const Empirical& e) {
                          return *std::max_element(e.points.begin(), e.points.end());
                        },
                    },
                    law_);
}

double LightTailedSpec::top_atom() const {
  return std::visit(Overloaded{
                        [](const Bernoulli& b) { return b.p; },
                        [](const Normal&) { return 0.0; },
                        [](const Poisson&) { return 0.0; },
                        [](const Empirical& e) {
                          const double top = *std::max_element(e.points.begin(), e.points.end());
                          const auto hits = std::count(e.points.begin(), e.points.end(), top);
                          return static_cast<double>(hits) / static_cast<double>(e.points.size());
                        },
                    },
                    law_);
}

std::vector<double> LightTailedSpec::cumulants(int nu_max) const {
  if (nu_max < 1) throw DomainError("cumulants: nu_max must be >= 1");
  const auto n = static_cast<std::size_t>(nu_max);
  return std::visit(
      Overloaded{
          [n](const Normal& d) {
            std::vector<double> c(n, 0.0);
            c[0] = d.mu;
            if (n > 1) c[1] = d.sigma * d.sigma;
            return c;
          },
          [n](const Poisson& d) { return std::vector<double>(n, d.lambda); },
          [n, nu_max](const Bernoulli& d) {
            // Centred two-point law: values 1 - p (prob p) and -p (prob 1 - p).
            std::vector<double> a(n + 1, 0.0);
            double hi = 1.0;
            double lo = 1.0;
            for (std::size_t k = 0; k <= n; ++k) {
              a[k] = d.p * hi + (1.0 - d.p) * lo;
              hi *= (1.0 - d.p) / static_cast<double>(k + 1);
              lo *= -d.p / static_cast<double>(k + 1);
            }
            auto c = cumulants_from_scaled_moments(a, nu_max);
            c[0] = d.p;
            return c;
          },
          [n, nu_max](const Empirical& d) {
            const double mu = std::accumulate(d.points.begin(), d.points.end(), 0.0) /
                              static_cast<double>(d.points.size());
            std::vector<double> a(n + 1, 0.0);
            for (double x : d.points) {
              double term = 1.0;
              for (std::size_t k = 0; k <= n; ++k) {
                a[k] += term;
                term *= (x - mu) / static_cast<double>(k + 1);
              }
            }
            for (double& v : a) v /= static_cast<double>(d.points.size());
            auto c = cumulants_from_scaled_moments(a, nu_max);
            c[0] = mu;
            return c;
          },
      },
      law_);
}

double cramer_rate(const LightTailedSpec& spec, double x) {
  if (std::isnan(x)) throw DomainError("cramer_rate: x is NaN");
  const double mean = spec.mean();
  if (x <= mean) return 0.0;
  const double top = spec.ess_sup();
  if (x > top) return kInfinity;
  if (x == top) {
    const double atom = spec.top_atom();
    return atom > 0.0 ? -std::log(atom) : kInfinity;
  }
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (spec.cgf_derivative(hi) < x) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1100 || !std::isfinite(hi)) {
      throw NumericError("cramer_rate", "no bracket for Lambda'(t) = " + fmt(x));
    }
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (spec.cgf_derivative(mid) < x) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  return std::max(0.0, t * x - spec.cgf(t));
}

namespace {

struct Series {
  std::vector<double> coef;  // s_nu c_nu, nu = 1..nu_max

  double value(double t) const {
    double pw = 1.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < coef.size(); ++k) {
      pw *= t / static_cast<double>(k + 1);
      acc += coef[k] * pw;
    }
    return acc;
  }

  double derivative(double t) const {
    double pw = 1.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < coef.size(); ++k) {
      acc += coef[k] * pw;
      pw *= t / static_cast<double>(k + 1);
    }
    return acc;
  }

  double diagnostic(double t) const {
    double pw = 1.0;
    double acc = 0.0;
    double last = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < coef.size(); ++k) {
      pw *= t / static_cast<double>(k + 1);
      const double term = coef[k] * pw;
      acc += term;
      prev = last;
      last = term;
    }
    const double tail = std::max(std::abs(last), coef.size() > 1 ? std::abs(prev) : 0.0);
    if (tail == 0.0) return 0.0;
    return acc == 0.0 ? kInfinity : tail / std::abs(acc);
  }
};

}  // namespace

ChiStarResult chi_star(const LightTailedSpec& spec, double x, int nu_max, double guard) {
  if (nu_max < 1) throw DomainError("chi_star: nu_max must be >= 1");
  if (std::isnan(x)) throw DomainError("chi_star: x is NaN");
  Series series;
  const auto c = spec.cumulants(nu_max);
  for (int nu = 1; nu <= nu_max; ++nu) {
    series.coef.push_back(spec.weight_constant(nu) * c[static_cast<std::size_t>(nu - 1)]);
  }
  if (x <= series.derivative(0.0)) return {0.0, 0.0, 0.0};

  double lo = 0.0;
  double hi = 0.5;
  for (int doublings = 0;; ++doublings) {
    const double diag = series.diagnostic(hi);
    if (diag > 1.0) {
      throw SeriesDomainError("chi_star", "truncated series diverges at t = " + fmt(hi) +
                                              " (diagnostic " + fmt(diag) + ")");
    }
    if (series.derivative(hi) >= x) break;
    if (doublings > 1100) throw NumericError("chi_star", "no bracket for chi'(t) = " + fmt(x));
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (series.derivative(mid) < x) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  const double diag = series.diagnostic(t);
  if (diag > guard) {
    throw SeriesDomainError("chi_star", "truncation diagnostic " + fmt(diag) + " at t = " + fmt(t) +
                                            " exceeds " + fmt(guard));
  }
  return {std::max(0.0, t * x - series.value(t)), t, diag};
}

// ---------------------------------------------------------------- sweeps

void validate_formula(const RateFormula& f) {
  std::visit(Overloaded{
                 [](const StretchedFormula& p) {
                   check_exponent(p.r, "stretched");
                   if (!(p.s > 0.0)) throw DomainError("stretched: s must be positive");
                   check_finite(p.m, "stretched");
                   check_finite(p.s1, "stretched");
                 },
                 [](const IidFormula& p) {
                   check_exponent(p.r, "iid");
                   check_finite(p.m, "iid");
                 },
                 [](const RandomWeightFormula& p) {
                   check_exponent(p.r, "random_weight");
                   check_finite(p.m, "random_weight");
                   if (!(p.e_theta > 0.0) || !(p.m_star > 0.0) || !std::isfinite(p.m_star)) {
                     throw DomainError("random_weight: E[theta] and M* must be positive and finite");
                   }
                   if (p.e_theta > p.m_star) {
                     throw DomainError("random_weight: E[theta] exceeds the essential supremum M*");
                   }
                 },
                 [](const KernelFormula& p) {
                   check_exponent(p.r, "kernel");
                   check_finite(p.m, "kernel");
                 },
                 [](const MixedSignFormula& p) {
                   check_exponent(p.alpha, "mixed_sign");
                   check_finite(p.m, "mixed_sign");
                 },
                 [](const CramerFormula&) {},
                 [](const ChiStarFormula& p) {
                   if (p.nu_max < 1) throw DomainError("chi_star: nu_max must be >= 1");
                 },
             },
             f);
}

std::string formula_tag(const RateFormula& f) {
  return std::visit(Overloaded{
                        [](const StretchedFormula&) { return "stretched"; },
                        [](const IidFormula&) { return "iid"; },
                        [](const RandomWeightFormula&) { return "random_weight"; },
                        [](const KernelFormula&) { return "kernel"; },
                        [](const MixedSignFormula&) { return "mixed_sign"; },
                        [](const CramerFormula&) { return "cramer"; },
                        [](const ChiStarFormula&) { return "chi_star"; },
                    },
                    f);
}

std::string formula_params(const RateFormula& f) {
  return std::visit(
      Overloaded{
          [](const StretchedFormula& p) {
            return "m=" + fmt(p.m) + ";s=" + fmt(p.s) + ";s1=" + fmt(p.s1) + ";r=" + fmt(p.r);
          },
          [](const IidFormula& p) { return "m=" + fmt(p.m) + ";r=" + fmt(p.r); },
          [](const RandomWeightFormula& p) {
            return "m=" + fmt(p.m) + ";r=" + fmt(p.r) + ";e_theta=" + fmt(p.e_theta) +
                   ";m_star=" + fmt(p.m_star);
          },
          [](const KernelFormula& p) {
            return "m=" + fmt(p.m) + ";r=" + fmt(p.r) + ";kernel=" + p.kernel.name() +
                   ";sup=" + fmt(p.kernel.sup());
          },
          [](const MixedSignFormula& p) { return "m=" + fmt(p.m) + ";alpha=" + fmt(p.alpha); },
          [](const CramerFormula& p) { return "law=" + p.spec.name(); },
          [](const ChiStarFormula& p) {
            return "law=" + p.spec.name() + ";nu_max=" + std::to_string(p.nu_max);
          },
      },
      f);
}

double evaluate_formula(const RateFormula& f, double x) {
  return std::visit(Overloaded{
                        [x](const StretchedFormula& p) {
                          if (!(x > p.s1 * p.m)) return kInfinity;
                          return stretched_rate({x, p.m, p.s, p.s1, p.r});
                        },
                        [x](const IidFormula& p) {
                          return x > p.m ? iid_rate(x, p.m, p.r) : kInfinity;
                        },
                        [x](const RandomWeightFormula& p) {
                          return x > p.m ? random_weight_rate(x, p.m, p.r, p.e_theta, p.m_star)
                                         : kInfinity;
                        },
                        [x](const KernelFormula& p) {
                          return x > p.m ? kernel_rate(x, p.m, p.r, p.kernel) : kInfinity;
                        },
                        [x](const MixedSignFormula& p) {
                          return x > p.m / 3.0 ? mixed_sign_rate(x, p.m, p.alpha) : kInfinity;
                        },
                        [x](const CramerFormula& p) { return cramer_rate(p.spec, x); },
                        [x](const ChiStarFormula& p) {
                          try {
                            return chi_star(p.spec, x, p.nu_max).value;
                          } catch (const SeriesDomainError&) {
                            return std::numeric_limits<double>::quiet_NaN();
                          }
                        },
                    },
                    f);
}

std::vector<RateRow> rate_sweep(std::span<const RateFormula> formulas, std::span<const double> xs) {
  for (const auto& f : formulas) validate_formula(f);
  std::vector<RateRow> rows;
  for (const auto& f : formulas) {
    const auto tag = formula_tag(f);
    const auto params = formula_params(f);
    for (double x : xs) rows.push_back({x, evaluate_formula(f, x), tag, params});
  }
  return rows;
}

void write_rate_csv(std::span<const RateRow> rows, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"x", "rate", "formula", "params"});
  for (const auto& r : rows) csv.row({fmt(r.x), fmt(r.rate), r.formula, r.params});
}

}  // namespace ldptails
