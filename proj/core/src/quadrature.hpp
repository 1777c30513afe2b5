#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mzweak::detail {

/// Adaptive 15-point Gauss-Kronrod on [a, b] to relative tolerance `tol`.
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-11, unsigned max_depth = 20) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, tol, &error);
}

}  // namespace mzweak::detail
