// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ncnet/kernels.hpp"

namespace ncnet::kernels::scalar {

double log_mean_cn_density(std::complex<double> y, const double *mean_re, const double *mean_im,
                           const double *var, double *scratch, std::size_t n) {
  const double yr = y.real(), yi = y.imag();
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double dr = yr - mean_re[j];
    const double di = yi - mean_im[j];
    const double a = -std::log(std::numbers::pi * var[j]) - (dr * dr + di * di) / var[j];
    scratch[j] = a;
    peak = std::max(peak, a);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += std::exp(scratch[j] - peak);
  return peak + std::log(sum / static_cast<double>(n));
}

void exp_inplace(double *x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

void log_inplace(double *x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::log(x[i]);
}

} // namespace ncnet::kernels::scalar
