#include "ldptails/weight_schemes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ldptails/counter_rng.hpp"
#include "ldptails/csv.hpp"
#include "ldptails/errors.hpp"

namespace ldptails {
namespace {

// Neumaier summation; row sums of 10^4+ equal weights otherwise drift by ~1e-13.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double table_value(const std::vector<double>& nodes, const std::vector<double>& values, double v) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
  if (it == nodes.begin()) return values.front();
  if (it == nodes.end()) return values.back();
  const auto i = static_cast<std::size_t>(it - nodes.begin());
  const double w = (v - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
  return values[i - 1] + w * (values[i] - values[i - 1]);
}

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::max({fc, fd, f(a), f(b)});
}

void check_grid(std::span<const std::size_t> grid) {
  if (grid.size() < 3) throw DomainError("weight report: the n grid needs at least 3 points");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] <= grid[k - 1]) throw DomainError("weight report: the n grid must be strictly increasing");
  }
  if (grid.front() == 0) throw DomainError("weight report: n must be positive");
  if (grid.back() < 1000) throw DomainError("weight report: the largest n must be at least 1000");
}

void check_tol(double tol) {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("weight report: tol must be positive");
}

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

bool contracting(std::span<const double> v) {
  std::vector<double> d;
  for (std::size_t k = 1; k < v.size(); ++k) d.push_back(v[k] - v[k - 1]);
  for (std::size_t k = 1; k < d.size(); ++k) {
    if (d[k - 1] == 0.0) return false;
    const double ratio = d[k] / d[k - 1];
    if (!(ratio > 0.0 && ratio < 1.0)) return false;
  }
  return true;
}

bool settled(std::span<const double> v, double tol) {
  const double last = v.back();
  const double scale = std::max(1.0, std::abs(last));
  for (std::size_t k = v.size() - 3; k < v.size(); ++k) {
    if (std::abs(v[k] - last) > tol * scale) return false;
  }
  return true;
}

std::string kernel_shape_name(KernelShape s) {
  switch (s) {
    case KernelShape::kEpanechnikov: return "epanechnikov";
    case KernelShape::kUniform: return "uniform";
    case KernelShape::kTriangular: return "triangular";
    case KernelShape::kQuartic: return "quartic";
    case KernelShape::kPiecewiseTable: return "piecewise_table";
  }
  return "unknown";
}

}  // namespace

// ---------------------------------------------------------------- kernels

KernelSpec::KernelSpec(KernelShape shape, std::vector<double> nodes, std::vector<double> values)
    : shape_(shape), nodes_(std::move(nodes)), values_(std::move(values)) {
  validate_and_cache();
}

KernelSpec KernelSpec::epanechnikov() { return KernelSpec(KernelShape::kEpanechnikov, {}, {}); }
KernelSpec KernelSpec::uniform() { return KernelSpec(KernelShape::kUniform, {}, {}); }
KernelSpec KernelSpec::triangular() { return KernelSpec(KernelShape::kTriangular, {}, {}); }
KernelSpec KernelSpec::quartic() { return KernelSpec(KernelShape::kQuartic, {}, {}); }

KernelSpec KernelSpec::piecewise_table(std::vector<double> nodes, std::vector<double> values) {
  return KernelSpec(KernelShape::kPiecewiseTable, std::move(nodes), std::move(values));
}

std::string KernelSpec::name() const { return kernel_shape_name(shape_); }

double KernelSpec::operator()(double u) const {
  const double v = std::abs(u);
  if (v > 1.0) return 0.0;
  switch (shape_) {
    case KernelShape::kEpanechnikov: return 0.75 * (1.0 - v * v);
    case KernelShape::kUniform: return 0.5;
    case KernelShape::kTriangular: return 1.0 - v;
    case KernelShape::kQuartic: {
      const double w = 1.0 - v * v;
      return 15.0 / 16.0 * w * w;
    }
    case KernelShape::kPiecewiseTable: return table_value(nodes_, values_, v);
  }
  return 0.0;
}

void KernelSpec::validate_and_cache() {
  switch (shape_) {
    case KernelShape::kEpanechnikov: sup_ = 0.75; integral_ = 1.0; return;
    case KernelShape::kUniform: sup_ = 0.5; integral_ = 1.0; return;
    case KernelShape::kTriangular: sup_ = 1.0; integral_ = 1.0; return;
    case KernelShape::kQuartic: sup_ = 15.0 / 16.0; integral_ = 1.0; return;
    case KernelShape::kPiecewiseTable: break;
  }
  if (nodes_.size() < 2 || nodes_.size() != values_.size()) {
    throw DomainError("kernel table: need >= 2 nodes and one value per node");
  }
  if (nodes_.front() != 0.0 || nodes_.back() != 1.0) {
    throw DomainError("kernel table: nodes must run from 0 to 1");
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) throw DomainError("kernel table: nodes must be strictly increasing");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("kernel table: values must be finite");
    if (v < 0.0) throw InvariantViolation("kernel table: negative value");
  }
  double half = 0.0;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    half += 0.5 * (values_[i] + values_[i - 1]) * (nodes_[i] - nodes_[i - 1]);
  }
  integral_ = 2.0 * half;
  if (std::abs(integral_ - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg << "kernel table: integral over [-1, 1] is " << integral_ << ", not 1";
    throw InvariantViolation(msg.str());
  }
  sup_ = scan_sup([this](double u) { return (*this)(u); }, -1.0, 1.0);
}

double kernel_sup(const KernelSpec& k) { return k.sup(); }

double scan_sup(const std::function<double(double)>& f, double lo, double hi, std::size_t points) {
  if (!(hi > lo) || points < 3) throw DomainError("scan_sup: need hi > lo and >= 3 points");
  std::vector<double> x(points);
  std::vector<double> y(points);
  const double h = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    x[i] = i + 1 == points ? hi : lo + h * static_cast<double>(i);
    y[i] = f(x[i]);
  }
  double best = *std::max_element(y.begin(), y.end());
  for (std::size_t i = 1; i + 1 < points; ++i) {
    if (y[i] >= y[i - 1] && y[i] >= y[i + 1]) best = std::max(best, golden_max(f, x[i - 1], x[i + 1]));
  }
  return best;
}

// ---------------------------------------------------------------- theta

ThetaDistribution::ThetaDistribution(Law law) : law_(std::move(law)) {
  std::visit(Overloaded{
                 [](const ThetaUniform& u) {
                   if (!(u.lo >= 0.0) || !(u.hi > u.lo) || !std::isfinite(u.hi)) {
                     throw DomainError("theta: uniform law needs 0 <= lo < hi < infinity");
                   }
                 },
                 [](const ThetaDegenerate& d) {
                   if (!(d.value > 0.0) || !std::isfinite(d.value)) {
                     throw DomainError("theta: degenerate value must be positive and finite");
                   }
                 },
             },
             law_);
}

double ThetaDistribution::sample(double u) const {
  return std::visit(Overloaded{
                        [u](const ThetaUniform& l) { return l.lo + (l.hi - l.lo) * u; },
                        [](const ThetaDegenerate& d) { return d.value; },
                    },
                    law_);
}

double ThetaDistribution::mean() const {
  return std::visit(Overloaded{
                        [](const ThetaUniform& l) { return 0.5 * (l.lo + l.hi); },
                        [](const ThetaDegenerate& d) { return d.value; },
                    },
                    law_);
}

double ThetaDistribution::ess_sup() const {
  return std::visit(Overloaded{
                        [](const ThetaUniform& l) { return l.hi; },
                        [](const ThetaDegenerate& d) { return d.value; },
                    },
                    law_);
}

// ---------------------------------------------------------------- schemes

WeightScheme::WeightScheme(Kind kind) : kind_(std::move(kind)) {
  if (const auto* p = std::get_if<PerturbedUniform>(&kind_)) {
    if (!(p->epsilon > 0.0) || !std::isfinite(p->epsilon)) {
      throw DomainError("perturbed uniform: epsilon must be positive");
    }
  }
  if (const auto* c = std::get_if<CustomTable>(&kind_)) {
    for (const auto& [n, row] : c->rows) {
      if (n == 0 || row.size() != n) throw DomainError("custom table: row n must have n entries");
      for (double a : row) {
        if (!std::isfinite(a)) throw DomainError("custom table: weights must be finite");
      }
    }
  }
}

std::string WeightScheme::tag() const {
  return std::visit(Overloaded{
                        [](const UniformWeights&) { return std::string("uniform"); },
                        [](const KernelWeights& k) { return "kernel:" + k.kernel.name(); },
                        [](const SelfNormalizedRandom&) { return std::string("self_normalized"); },
                        [](const MixedSignThirds&) { return std::string("mixed_sign_thirds"); },
                        [](const PerturbedUniform& p) {
                          return "perturbed_uniform:" + format_number(p.epsilon);
                        },
                        [](const CustomTable&) { return std::string("custom_table"); },
                    },
                    kind_);
}

bool WeightScheme::nonnegative() const {
  if (std::holds_alternative<MixedSignThirds>(kind_)) return false;
  if (const auto* c = std::get_if<CustomTable>(&kind_)) {
    for (const auto& [n, row] : c->rows) {
      if (std::any_of(row.begin(), row.end(), [](double a) { return a < 0.0; })) return false;
    }
  }
  return true;
}

WeightScheme WeightScheme::with_theta_seed(std::uint64_t seed) const {
  const auto* s = std::get_if<SelfNormalizedRandom>(&kind_);
  if (s == nullptr) throw DomainError("with_theta_seed: scheme is not self-normalized");
  return WeightScheme(SelfNormalizedRandom{s->theta, seed});
}

WeightLimits WeightScheme::limits() const {
  return std::visit(Overloaded{
                        [](const UniformWeights&) { return WeightLimits{1.0, 1.0}; },
                        [](const KernelWeights& k) {
                          return WeightLimits{0.5 * k.kernel.integral(), k.kernel.sup()};
                        },
                        [](const SelfNormalizedRandom& s) {
                          return WeightLimits{1.0, s.theta.ess_sup() / s.theta.mean()};
                        },
                        [](const MixedSignThirds&) { return WeightLimits{1.0 / 3.0, 1.0}; },
                        [](const PerturbedUniform&) { return WeightLimits{1.0, 1.0}; },
                        [](const CustomTable&) -> WeightLimits {
                          throw DomainError("custom table: limits are not known in closed form");
                        },
                    },
                    kind_);
}

std::vector<double> theta_values(const SelfNormalizedRandom& scheme, std::size_t n) {
  const CounterUniforms uniforms(scheme.seed);
  std::vector<double> theta(n);
  for (std::size_t j = 0; j < n; ++j) {
    theta[j] = scheme.theta.sample(
        uniforms(Stream::kQuenchedTheta, 0, 0, static_cast<std::uint32_t>(j + 1)));
  }
  return theta;
}

std::vector<double> normalize_weights(std::span<const double> theta) {
  double total = 0.0;
  for (double t : theta) total += t;
  if (!(total > 0.0)) throw DomainError("normalize_weights: theta sums to zero");
  std::vector<double> a(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) a[j] = theta[j] / total;
  return a;
}

std::vector<double> generate(const WeightScheme& scheme, std::size_t n) {
  if (n == 0) throw DomainError("generate: n must be positive");
  const double dn = static_cast<double>(n);
  return std::visit(
      Overloaded{
          [&](const UniformWeights&) { return std::vector<double>(n, 1.0 / dn); },
          [&](const KernelWeights& k) {
            std::vector<double> a(n);
            for (std::size_t j = 1; j <= n; ++j) {
              a[j - 1] = k.kernel((2.0 * static_cast<double>(j) - dn) / dn) / dn;
            }
            return a;
          },
          [&](const SelfNormalizedRandom& s) { return normalize_weights(theta_values(s, n)); },
          [&](const MixedSignThirds&) {
            const std::size_t plus = (2 * n) / 3;
            std::vector<double> a(n, -1.0 / dn);
            std::fill(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(plus), 1.0 / dn);
            return a;
          },
          [&](const PerturbedUniform& p) {
            return std::vector<double>(n, 1.0 / dn + std::pow(dn, -(1.0 + p.epsilon)));
          },
          [&](const CustomTable& c) {
            auto it = c.rows.find(n);
            if (it == c.rows.end()) {
              throw DomainError("custom table: no row for n = " + std::to_string(n));
            }
            return it->second;
          },
      },
      scheme.kind());
}

// ---------------------------------------------------------------- reports

bool grid_converges(std::span<const double> values, double tol) {
  if (values.size() < 3) return false;
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return settled(values, tol) || contracting(values);
}

double grid_limit(std::span<const double> values) {
  const std::size_t m = values.size();
  if (m < 3) return values.empty() ? 0.0 : values.back();
  const double x0 = values[m - 3];
  const double x1 = values[m - 2];
  const double x2 = values[m - 1];
  const double d1 = x1 - x0;
  const double d2 = x2 - x1;
  const double noise = 1e-12 * std::max(1.0, std::abs(x2));
  if (std::abs(d1) <= noise || std::abs(d2) <= noise) return x2;
  const double ratio = d2 / d1;
  if (!(ratio > 0.0 && ratio < 1.0)) return x2;
  return x2 - d2 * d2 / (d2 - d1);
}

AssumptionReport assumption_b_report(const WeightScheme& scheme, std::span<const std::size_t> n_grid,
                                     double tol) {
  check_grid(n_grid);
  check_tol(tol);
  AssumptionReport rep;
  rep.n_grid.assign(n_grid.begin(), n_grid.end());
  for (std::size_t n : n_grid) {
    const auto a = generate(scheme, n);
    CompensatedSum sum;
    double amax = -INFINITY;
    for (double w : a) {
      sum.add(w);
      amax = std::max(amax, w);
    }
    rep.s1_sequence.push_back(sum.value());
    rep.namax_sequence.push_back(static_cast<double>(n) * amax);
  }
  rep.s1_estimate = grid_limit(rep.s1_sequence);
  rep.s_estimate = grid_limit(rep.namax_sequence);
  const bool s1_ok = grid_converges(rep.s1_sequence, tol);
  const bool s_ok = grid_converges(rep.namax_sequence, tol);
  const bool nonzero = std::abs(rep.s1_estimate) > tol;
  if (!s1_ok) rep.diagnostics.push_back("sum_j a_j(n) does not converge on the grid");
  if (!s_ok) rep.diagnostics.push_back("n max_j a_j(n) does not converge on the grid");
  if (!nonzero) rep.diagnostics.push_back("sum_j a_j(n) tends to 0");
  rep.b_pass = s1_ok && s_ok && nonzero;
  return rep;
}

AssumptionReport assumption_a_report(const WeightScheme& scheme, int nu_max,
                                     std::span<const std::size_t> n_grid, double tol) {
  if (nu_max < 1) throw DomainError("assumption A: nu_max must be >= 1");
  AssumptionReport rep = assumption_b_report(scheme, n_grid, tol);
  const auto nus = static_cast<std::size_t>(nu_max);
  std::vector<std::vector<double>> q(nus);
  for (std::size_t n : n_grid) {
    const auto a = generate(scheme, n);
    const double dn = static_cast<double>(n);
    std::vector<CompensatedSum> sums(nus);
    for (double w : a) {
      const double x = dn * w;
      double p = 1.0;
      for (std::size_t nu = 0; nu < nus; ++nu) {
        p *= x;
        sums[nu].add(p);
      }
    }
    for (std::size_t nu = 0; nu < nus; ++nu) q[nu].push_back(sums[nu].value() / dn);
  }

  rep.a1_pass = true;
  rep.a2_pass = true;
  std::vector<double> log_n;
  for (std::size_t n : n_grid) log_n.push_back(std::log(static_cast<double>(n)));
  for (std::size_t nu = 0; nu < nus; ++nu) {
    const double s_nu = grid_limit(q[nu]);
    if (!(std::abs(s_nu) >= 1e-15)) {
      throw DegenerateSchemeError("assumption A: s_" + std::to_string(nu + 1) +
                                  " vanishes numerically");
    }
    rep.s_nu.push_back(s_nu);
    if (!grid_converges(q[nu], tol)) {
      rep.a1_pass = false;
      rep.diagnostics.push_back("n^{nu-1} sum a_j^nu does not converge for nu = " +
                                std::to_string(nu + 1));
    }
    std::vector<double> r_row;
    std::vector<double> log_e;
    double envelope = 0.0;
    const double scale = std::pow(1.0 + rep.delta, static_cast<double>(nu + 1));
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
      const double r = q[nu][k] / s_nu;
      r_row.push_back(r);
      const double e = static_cast<double>(n_grid[k]) * std::abs(r - 1.0) / scale;
      envelope = std::max(envelope, e);
      log_e.push_back(std::log(std::max(e, 1e-8)));
    }
    rep.r_table.push_back(std::move(r_row));
    rep.r_nu_envelope.push_back(envelope);
    const double slope = ls_slope(log_n, log_e);
    rep.growth_exponent.push_back(slope);
    if (slope > kEnvelopeGrowthLimit) {
      rep.a2_pass = false;
      std::ostringstream msg;
      msg << "n |R(nu, n) - 1| grows like n^" << slope << " for nu = " << nu + 1;
      rep.diagnostics.push_back(msg.str());
    }
  }
  // Growth of r_nu^{1/nu} in nu, informational only.
  for (std::size_t nu = 0; nu < nus; ++nu) {
    const double root = std::pow(rep.r_nu_envelope[nu], 1.0 / static_cast<double>(nu + 1));
    if (root > 1.0 + tol) rep.envelope_flag = true;
  }
  return rep;
}

ImplicationResult implication_check(const WeightScheme& scheme, int nu_max,
                                    std::span<const std::size_t> n_grid, double tol) {
  if (!scheme.nonnegative()) throw DomainError("implication check: weights must be nonnegative");
  const auto rep = assumption_a_report(scheme, nu_max, n_grid, tol);
  return {rep.a1_pass && rep.a2_pass, rep.b_pass};
}

std::vector<WeightScheme> scheme_catalogue() {
  return {
      WeightScheme(UniformWeights{}),
      WeightScheme(KernelWeights{KernelSpec::epanechnikov()}),
      WeightScheme(KernelWeights{KernelSpec::uniform()}),
      WeightScheme(KernelWeights{KernelSpec::triangular()}),
      WeightScheme(KernelWeights{KernelSpec::quartic()}),
      WeightScheme(SelfNormalizedRandom{ThetaDistribution(ThetaUniform{0.0, 1.0}), 1}),
      WeightScheme(PerturbedUniform{0.1}),
      WeightScheme(PerturbedUniform{0.25}),
      WeightScheme(PerturbedUniform{0.4}),
  };
}

void write_b_csv(const AssumptionReport& report, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"n", "s1", "n_amax"});
  for (std::size_t k = 0; k < report.n_grid.size(); ++k) {
    csv.row({std::to_string(report.n_grid[k]), format_number(report.s1_sequence[k]),
             format_number(report.namax_sequence[k])});
  }
}

void write_a_csv(const AssumptionReport& report, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"nu", "n", "R"});
  for (std::size_t nu = 0; nu < report.r_table.size(); ++nu) {
    for (std::size_t k = 0; k < report.n_grid.size(); ++k) {
      csv.row({std::to_string(nu + 1), std::to_string(report.n_grid[k]),
               format_number(report.r_table[nu][k])});
    }
  }
}

// ---------------------------------------------------------------- text

void to_json(nlohmann::json& j, const KernelSpec& k) {
  j = {{"shape", k.name()}};
  if (k.shape() == KernelShape::kPiecewiseTable) {
    j["nodes"] = k.table_nodes();
    j["values"] = k.table_values();
  }
}

KernelSpec kernel_from_name(const std::string& name) {
  if (name == "epanechnikov") return KernelSpec::epanechnikov();
  if (name == "uniform") return KernelSpec::uniform();
  if (name == "triangular") return KernelSpec::triangular();
  if (name == "quartic") return KernelSpec::quartic();
  throw FormatError("unknown kernel '" + name + "'");
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  try {
    const auto shape = j.at("shape").get<std::string>();
    if (shape == "piecewise_table") {
      return KernelSpec::piecewise_table(j.at("nodes").get<std::vector<double>>(),
                                         j.at("values").get<std::vector<double>>());
    }
    return kernel_from_name(shape);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("kernel: ") + e.what());
  }
}

namespace {

nlohmann::json theta_to_json(const ThetaDistribution& t) {
  return std::visit(Overloaded{
                        [](const ThetaUniform& u) {
                          return nlohmann::json{{"law", "uniform"}, {"lo", u.lo}, {"hi", u.hi}};
                        },
                        [](const ThetaDegenerate& d) {
                          return nlohmann::json{{"law", "degenerate"}, {"value", d.value}};
                        },
                    },
                    t.law());
}

ThetaDistribution theta_from_json(const nlohmann::json& j) {
  const auto law = j.at("law").get<std::string>();
  if (law == "uniform") return ThetaDistribution(ThetaUniform{j.at("lo").get<double>(), j.at("hi").get<double>()});
  if (law == "degenerate") return ThetaDistribution(ThetaDegenerate{j.at("value").get<double>()});
  if (law == "exponential" || law == "gamma" || law == "pareto" || law == "lognormal") {
    throw DomainError("theta: unbounded law '" + law + "' is not supported");
  }
  throw FormatError("theta: unknown law '" + law + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const WeightScheme& scheme) {
  j = std::visit(
      Overloaded{
          [](const UniformWeights&) { return nlohmann::json{{"kind", "uniform"}}; },
          [](const KernelWeights& k) {
            return nlohmann::json{{"kind", "kernel"}, {"kernel", k.kernel}};
          },
          [](const SelfNormalizedRandom& s) {
            return nlohmann::json{
                {"kind", "self_normalized"}, {"theta", theta_to_json(s.theta)}, {"seed", s.seed}};
          },
          [](const MixedSignThirds&) { return nlohmann::json{{"kind", "mixed_sign_thirds"}}; },
          [](const PerturbedUniform& p) {
            return nlohmann::json{{"kind", "perturbed_uniform"}, {"epsilon", p.epsilon}};
          },
          [](const CustomTable& c) {
            auto rows = nlohmann::json::array();
            for (const auto& [n, row] : c.rows) rows.push_back({{"n", n}, {"row", row}});
            return nlohmann::json{{"kind", "custom_table"}, {"rows", rows}};
          },
      },
      scheme.kind());
}

WeightScheme weight_scheme_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "uniform") return WeightScheme(UniformWeights{});
    if (kind == "kernel") return WeightScheme(KernelWeights{kernel_from_json(j.at("kernel"))});
    if (kind == "self_normalized") {
      return WeightScheme(SelfNormalizedRandom{theta_from_json(j.at("theta")),
                                               j.value("seed", std::uint64_t{0})});
    }
    if (kind == "mixed_sign_thirds") return WeightScheme(MixedSignThirds{});
    if (kind == "perturbed_uniform") return WeightScheme(PerturbedUniform{j.at("epsilon").get<double>()});
    if (kind == "custom_table") {
      CustomTable table;
      for (const auto& r : j.at("rows")) {
        table.rows[r.at("n").get<std::size_t>()] = r.at("row").get<std::vector<double>>();
      }
      return WeightScheme(std::move(table));
    }
    throw FormatError("weight scheme: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("weight scheme: ") + e.what());
  }
}

std::string to_text(const WeightScheme& scheme) {
  nlohmann::json j = scheme;
  return j.dump();
}

WeightScheme weight_scheme_from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("weight scheme: ") + e.what());
  }
  return weight_scheme_from_json(j);
}

}  // namespace ldptails
