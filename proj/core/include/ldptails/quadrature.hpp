#pragma once

#include <functional>
#include <span>

namespace ldptails {

using Integrand = std::function<double(double)>;

/// Integral of f over [a, b]; `b` may be +infinity. The range is split at
/// every breakpoint strictly inside (a, b) so that kinks and integrable
/// endpoint singularities sit on segment ends. Throws NumericError when the
/// summed error estimate exceeds `abs_tol`.
double integrate(const Integrand& f, double a, double b, double abs_tol,
                 std::span<const double> breakpoints = {});

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Same splitting as integrate() but returns the summed error estimate instead
/// of checking it.
QuadratureResult integrate_with_error(const Integrand& f, double a, double b,
                                      std::span<const double> breakpoints = {});

}  // namespace ldptails
