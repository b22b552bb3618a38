// SPDX-License-Identifier: Apache-2.0
#include "ncnet/special.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "ncnet/error.hpp"

namespace ncnet::special {

double digamma(double x) { return boost::math::digamma(x); }

double log_gamma(double x) {
  if (!(x > 0.0)) throw InputError("log_gamma needs a positive argument");
  return std::lgamma(x);
}

Integral integrate_to_infinity(const std::function<double(double)> &f, double a) {
  boost::math::quadrature::exp_sinh<double> integrator;
  Integral out;
  double l1 = 0.0;
  out.value = integrator.integrate([&](double s) { return f(s); }, a,
                                   std::numeric_limits<double>::infinity(), 1e-12, &out.error, &l1);
  return out;
}

double upper_root_exp_linear(double k) {
  if (!(k > std::exp(1.0))) throw InputError("exp(u/k) = u has no root for k <= e");
  auto f = [k](double u) { return std::exp(u / k) - u; };
  // f is decreasing below k log k and increasing above it.
  double lo = k * std::log(k);
  double hi = 2.0 * lo;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

} // namespace ncnet::special
