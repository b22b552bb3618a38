// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel kernels behind the nested Monte Carlo estimator.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at runtime from CPUID; the
// NCNET_KERNEL environment variable ("scalar", "avx2", "auto") overrides the
// choice. Variants agree with the reference to a few ulps, not bit for bit.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ncnet::kernels {

enum class Isa { scalar, avx2 };

const char *isa_name(Isa isa) noexcept;

// Structure-of-arrays complex Gaussian mixture; component j is CN(m_j, v_j).
struct CnMixture {
  std::vector<double> mean_re;
  std::vector<double> mean_im;
  std::vector<double> var;
  std::vector<double> scratch;

  void resize(std::size_t n) {
    mean_re.resize(n);
    mean_im.resize(n);
    var.resize(n);
    scratch.resize(n);
  }
  std::size_t size() const noexcept { return var.size(); }
};

// log((1/n) sum_j CN(y; m_j, v_j)) where CN(y; m, v) = exp(-|y - m|^2 / v) / (pi v).
// Requires n >= 1 and every v_j a positive normal number. `scratch` holds n doubles.
using LogMeanDensityFn = double (*)(std::complex<double> y, const double *mean_re,
                                    const double *mean_im, const double *var, double *scratch,
                                    std::size_t n);
// In-place elementwise exp / log.
using MapFn = void (*)(double *x, std::size_t n);

namespace scalar {
double log_mean_cn_density(std::complex<double> y, const double *mean_re, const double *mean_im,
                           const double *var, double *scratch, std::size_t n);
void exp_inplace(double *x, std::size_t n);
void log_inplace(double *x, std::size_t n);
} // namespace scalar

namespace avx2 {
// True when compiled for x86-64 and the CPU reports AVX2 and FMA.
bool supported() noexcept;
double log_mean_cn_density(std::complex<double> y, const double *mean_re, const double *mean_im,
                           const double *var, double *scratch, std::size_t n);
void exp_inplace(double *x, std::size_t n);
void log_inplace(double *x, std::size_t n);
} // namespace avx2

Isa active_isa() noexcept;
// Forces a variant (falls back to scalar if unsupported); returns the one in effect.
Isa select_isa(Isa wanted) noexcept;

double log_mean_cn_density(std::complex<double> y, CnMixture &mix);
void exp_inplace(std::span<double> x);
void log_inplace(std::span<double> x);
double log_mean_cn_density(std::complex<double> y, std::span<const double> mean_re,
                           std::span<const double> mean_im, std::span<const double> var,
                           std::span<double> scratch);

} // namespace ncnet::kernels
