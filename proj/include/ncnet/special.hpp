// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace ncnet::special {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

double digamma(double x);
double log_gamma(double x);

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

// Integral of f over [a, +inf) by double-exponential quadrature.
Integral integrate_to_infinity(const std::function<double(double)> &f, double a);

// Upper root of exp(u / k) = u (exists for k > e). Bisection on the increasing tail.
double upper_root_exp_linear(double k);

} // namespace ncnet::special
