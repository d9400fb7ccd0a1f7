#include "ldptails_cli/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ldptails/errors.hpp"
#include "ldptails/rate_functions.hpp"
#include "ldptails/svf.hpp"
#include "ldptails/tail_models.hpp"

namespace ldptails::cli {
namespace {

constexpr double kMiss = std::numeric_limits<double>::infinity();

void record(SelftestReport& rep, const SelftestOptions& opts, std::string suite, std::string name,
            double residual, double default_tol) {
  const double tol = opts.tol.value_or(default_tol);
  const bool ok = std::isfinite(residual) && residual < tol;
  rep.checks.push_back({std::move(suite), std::move(name), residual, tol, ok});
}

void append(SelftestReport& into, SelftestReport from) {
  for (auto& c : from.checks) into.checks.push_back(std::move(c));
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

std::size_t SelftestReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

SelftestReport integration_by_parts_suite(const SelftestOptions& opts) {
  SelftestReport rep;
  const double alphas[] = {0.1, 0.5};
  const std::pair<double, double> ranges[] = {{-1.0, 2.0}, {0.0, 1.0}, {0.5, 4.0}, {1.0, 10.0}};
  const auto models = model_catalogue();
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (double alpha : alphas) {
      for (const auto& [a, b] : ranges) {
        const std::string name = "model[" + std::to_string(i) + "] alpha=" + std::to_string(alpha) +
                                 " [" + std::to_string(a) + "," + std::to_string(b) + "]";
        double residual = kMiss;
        try {
          residual = integration_by_parts_residual(models[i], alpha, a, b);
        } catch (const std::exception&) {
        }
        record(rep, opts, "integration_by_parts", name, residual, kIbpTolerance);
      }
    }
  }
  return rep;
}

SelftestReport slowly_varying_suite(const SelftestOptions& opts) {
  SelftestReport rep;
  std::vector<std::pair<std::string, svf::SlowlyVaryingSpec>> specs;
  const auto shipped = svf::catalogue();
  for (std::size_t i = 0; i < shipped.size(); ++i) {
    specs.emplace_back("catalogue[" + std::to_string(i) + "]", shipped[i]);
  }
  for (std::size_t k = 0; k < opts.injected_svf.size(); ++k) {
    const std::string name = "injected[" + std::to_string(k) + "]";
    try {
      specs.emplace_back(name, svf::spec_from_json(opts.injected_svf[k]));
    } catch (const std::exception& e) {
      record(rep, opts, "slowly_varying", name + " construction: " + e.what(), kMiss, 0.0);
    }
  }

  std::vector<double> grid;
  for (int e = 3; e <= 12; ++e) grid.push_back(std::pow(10.0, e));
  const double t_far = 1e8;

  for (const auto& [name, spec] : specs) {
    for (double a : {0.5, 2.0}) {
      record(rep, opts, "slowly_varying", name + " deviation a=" + std::to_string(a),
             svf::slow_variation_deviation(spec, a, t_far), kSvfDeviationTolerance);
    }
    record(rep, opts, "slowly_varying", name + " log growth", svf::log_growth_ratio(spec, t_far),
           kSvfDeviationTolerance);
    record(rep, opts, "slowly_varying", name + " potter monotone",
           svf::potter_monotone(spec, 0.1, grid) ? 0.0 : kMiss, kSvfDeviationTolerance);
  }

  // Closure under products, sums and powers on consecutive catalogue pairs.
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& [ln, l] = specs[i];
    const auto& [mn, m] = specs[(i + 1) % specs.size()];
    const auto prod = svf::SlowlyVaryingSpec::product(l, m);
    const auto sum = svf::SlowlyVaryingSpec::sum(l, m);
    double prod_excess = 0.0;
    double sum_excess = 0.0;
    double pow_excess = 0.0;
    for (double t : {1e3, 1e6, 1e9}) {
      const double dl = svf::slow_variation_deviation(l, 2.0, t);
      const double dm = svf::slow_variation_deviation(m, 2.0, t);
      prod_excess = std::max(prod_excess, svf::slow_variation_deviation(prod, 2.0, t) - (dl + dm));
      sum_excess = std::max(sum_excess, svf::slow_variation_deviation(sum, 2.0, t) - std::max(dl, dm));
      for (double alpha : {0.5, 2.0, -1.0}) {
        const auto pw = svf::SlowlyVaryingSpec::power(l, alpha);
        pow_excess = std::max(pow_excess, svf::slow_variation_deviation(pw, 2.0, t) -
                                              std::max(1.0, std::abs(alpha)) * dl);
      }
    }
    record(rep, opts, "closure", ln + " * " + mn, prod_excess, kClosureTolerance);
    record(rep, opts, "closure", ln + " + " + mn, sum_excess, kClosureTolerance);
    record(rep, opts, "closure", ln + " ^ alpha", pow_excess, kClosureTolerance);
  }
  return rep;
}

SelftestReport rate_lattice_suite(const SelftestOptions& opts, int queries) {
  SelftestReport rep;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const KernelSpec kernels[] = {KernelSpec::epanechnikov(), KernelSpec::uniform(),
                                KernelSpec::triangular(), KernelSpec::quartic()};
  double iid = 0.0;
  double kern = 0.0;
  double random = 0.0;
  for (int q = 0; q < queries; ++q) {
    const double m = -5.0 + 10.0 * unit(rng);
    const double x = m + 0.01 + 10.0 * unit(rng);
    const double r = 0.05 + 0.9 * unit(rng);
    const auto& k = kernels[q % 4];
    const double e_theta = 0.1 + 0.9 * unit(rng);
    const double m_star = e_theta * (1.0 + 4.0 * unit(rng));
    iid = std::max(iid, rel_diff(iid_rate(x, m, r), stretched_rate({x, m, 1.0, 1.0, r})));
    kern = std::max(kern, rel_diff(kernel_rate(x, m, r, k), stretched_rate({x, m, k.sup(), 1.0, r})));
    random = std::max(random, rel_diff(random_weight_rate(x, m, r, e_theta, m_star),
                                       stretched_rate({x, m, m_star / e_theta, 1.0, r})));
  }
  record(rep, opts, "rate_lattice", "iid == stretched(s=s1=1)", iid, kLatticeTolerance);
  record(rep, opts, "rate_lattice", "kernel == stretched(s=sup k)", kern, kLatticeTolerance);
  record(rep, opts, "rate_lattice", "random_weight == stretched(s=M*/E theta)", random,
         kLatticeTolerance);
  return rep;
}

SelftestReport run_selftest(const SelftestOptions& opts) {
  SelftestReport rep;
  append(rep, integration_by_parts_suite(opts));
  append(rep, slowly_varying_suite(opts));
  append(rep, rate_lattice_suite(opts));
  return rep;
}

}  // namespace ldptails::cli
