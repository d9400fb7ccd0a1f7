#include "ldptails/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ldptails/errors.hpp"

namespace ldptails {
namespace {

struct Piece {
  double value = 0.0;
  double error = 0.0;
};

Piece finite_piece(const Integrand& f, double a, double b) {
  // Gauss-Kronrod first: cheap and exact on smooth segments. tanh-sinh takes
  // over when the segment hides an endpoint singularity.
  double error = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 12, 1e-12, &error);
  if (std::isfinite(value) && error <= 1e-11 * std::max(1.0, std::abs(value))) {
    return {value, error};
  }
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
  double l1 = 0.0;
  double ts_error = 0.0;
  auto g = [&f](double t) { return f(t); };
  const double ts_value = ts.integrate(g, a, b, 1e-12, &ts_error, &l1);
  if (!std::isfinite(error) || ts_error < error) {
    return {ts_value, ts_error};
  }
  return {value, error};
}

Piece tail_piece(const Integrand& f, double a) {
  static thread_local boost::math::quadrature::exp_sinh<double> es(12);
  double error = 0.0;
  double l1 = 0.0;
  auto g = [&f, a](double t) { return f(a + t); };
  const double value = es.integrate(g, 1e-12, &error, &l1);
  return {value, error};
}

}  // namespace

QuadratureResult integrate_with_error(const Integrand& f, double a, double b,
                                      std::span<const double> breakpoints) {
  if (!(a <= b) || std::isnan(a) || std::isnan(b)) {
    throw DomainError("integrate: require a <= b");
  }
  if (a == b) return {};

  std::vector<double> cuts{a};
  for (double p : breakpoints) {
    if (p > a && p < b && std::isfinite(p)) cuts.push_back(p);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = k + 1 < cuts.size() ? cuts[k + 1] : b;
    Piece piece = std::isinf(hi) ? tail_piece(f, lo) : finite_piece(f, lo, hi);
    total += piece.value;
    total_error += piece.error;
  }
  return {total, total_error};
}

double integrate(const Integrand& f, double a, double b, double abs_tol,
                 std::span<const double> breakpoints) {
  const auto [value, error] = integrate_with_error(f, a, b, breakpoints);
  if (!std::isfinite(value) || error > abs_tol) {
    std::ostringstream diag;
    diag.precision(17);
    diag << "interval [" << a << ", " << b << "], breakpoints " << breakpoints.size()
         << ", value " << value << ", error estimate " << error
         << ", tolerance " << abs_tol;
    throw NumericError("quadrature did not converge", diag.str());
  }
  return value;
}

}  // namespace ldptails
