#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace conelab::detail {

/// Fixed 10-point Gauss-Legendre rule on [a, b]; exact to roundoff for the
/// smooth per-cell integrands used on solver grids.
template <class F>
double gauss_cell(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

/// Adaptive 31-point Gauss-Kronrod on [a, b].
template <class F>
double adaptive_integral(F&& f, double a, double b, double rtol,
                         double* error = nullptr) {
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 15, rtol, &err);
  if (error) *error = err;
  return value;
}

}  // namespace conelab::detail
