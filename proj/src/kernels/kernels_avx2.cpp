// SPDX-License-Identifier: Apache-2.0
//
// AVX2 + FMA variants. Functions carry target attributes instead of the TU
// being compiled with -mavx2, so nothing here leaks wide instructions into
// inline code shared with the scalar build; callers must check supported().

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ncnet/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define NCNET_HAVE_AVX2 1
#include <immintrin.h>
#else
#define NCNET_HAVE_AVX2 0
#endif

namespace ncnet::kernels::avx2 {

#if NCNET_HAVE_AVX2

#define NCNET_AVX2 __attribute__((target("avx2,fma")))

namespace {

// Cephes exp: x = n ln2 + r, exp(r) = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)).
NCNET_AVX2 inline __m256d exp4(__m256d x) {
  const __m256d hi = _mm256_set1_pd(709.78);
  const __m256d lo = _mm256_set1_pd(-708.39);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d n = _mm256_floor_pd(
      _mm256_fmadd_pd(x, _mm256_set1_pd(std::numbers::log2e), _mm256_set1_pd(0.5)));
  x = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
  x = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d p = _mm256_fmadd_pd(_mm256_set1_pd(1.26177193074810590878E-4), xx,
                              _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, x);
  __m256d q = _mm256_fmadd_pd(_mm256_set1_pd(3.00198505138664455042E-6), xx,
                              _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d r = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));

  // 2^n via the 1.5 * 2^52 rounding constant; n + 1023 lands in the low mantissa bits.
  const __m256d biased = _mm256_add_pd(n, _mm256_set1_pd(6755399441055744.0 + 1023.0));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_castpd_si256(biased), 52));
  r = _mm256_mul_pd(r, scale);
  return _mm256_andnot_pd(underflow, r);
}

// Cephes log for positive normal inputs: x = m 2^e, log(1 + f) = f - f^2/2 + f^3 P(f)/Q(f).
NCNET_AVX2 inline __m256d log4(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i half_bits = _mm256_set1_epi64x(0x3FE0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));

  const __m256i magic_bits = _mm256_set1_epi64x(0x4338000000000000LL);
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);
  const __m256i biased_exp = _mm256_srli_epi64(bits, 52);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_add_epi64(biased_exp, magic_bits)), magic);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(std::numbers::sqrt2 / 2.0), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, one));
  m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), one);

  const __m256d z = _mm256_mul_pd(m, m);
  __m256d p = _mm256_fmadd_pd(_mm256_set1_pd(1.01875663804580931796E-4), m,
                              _mm256_set1_pd(4.97494994976747001425E-1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(4.70579119878881725854E0));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.44989225341610930846E1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.79368678507819816313E1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(7.70838733755885391666E0));
  __m256d q = _mm256_add_pd(m, _mm256_set1_pd(1.12873587189167450590E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(4.52279145837532221105E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(8.29875266912776603211E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(7.11544750618563894466E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(2.31251620126765340583E1));

  __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d r = _mm256_add_pd(m, y);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
}

NCNET_AVX2 inline double hmax(__m256d v) {
  __m128d a = _mm_max_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return std::max(_mm_cvtsd_f64(a), _mm_cvtsd_f64(_mm_unpackhi_pd(a, a)));
}

NCNET_AVX2 inline double hsum(__m256d v) {
  __m128d a = _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return _mm_cvtsd_f64(a) + _mm_cvtsd_f64(_mm_unpackhi_pd(a, a));
}

} // namespace

bool supported() noexcept {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}

NCNET_AVX2 double log_mean_cn_density(std::complex<double> y, const double *mean_re,
                                      const double *mean_im, const double *var, double *scratch,
                                      std::size_t n) {
  const std::size_t blocks = n / 4 * 4;
  const __m256d yr = _mm256_set1_pd(y.real());
  const __m256d yi = _mm256_set1_pd(y.imag());
  const __m256d pi = _mm256_set1_pd(std::numbers::pi);
  __m256d vpeak = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < blocks; j += 4) {
    const __m256d v = _mm256_loadu_pd(var + j);
    const __m256d dr = _mm256_sub_pd(yr, _mm256_loadu_pd(mean_re + j));
    const __m256d di = _mm256_sub_pd(yi, _mm256_loadu_pd(mean_im + j));
    const __m256d d2 = _mm256_fmadd_pd(dr, dr, _mm256_mul_pd(di, di));
    const __m256d a = _mm256_sub_pd(_mm256_sub_pd(_mm256_setzero_pd(), log4(_mm256_mul_pd(pi, v))),
                                    _mm256_div_pd(d2, v));
    _mm256_storeu_pd(scratch + j, a);
    vpeak = _mm256_max_pd(vpeak, a);
  }
  double peak = blocks ? hmax(vpeak) : -std::numeric_limits<double>::infinity();
  for (std::size_t j = blocks; j < n; ++j) {
    const double dr = y.real() - mean_re[j];
    const double di = y.imag() - mean_im[j];
    scratch[j] = -std::log(std::numbers::pi * var[j]) - (dr * dr + di * di) / var[j];
    peak = std::max(peak, scratch[j]);
  }

  const __m256d shift = _mm256_set1_pd(peak);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t j = 0; j < blocks; j += 4)
    acc = _mm256_add_pd(acc, exp4(_mm256_sub_pd(_mm256_loadu_pd(scratch + j), shift)));
  double sum = hsum(acc);
  for (std::size_t j = blocks; j < n; ++j) sum += std::exp(scratch[j] - peak);
  return peak + std::log(sum / static_cast<double>(n));
}

NCNET_AVX2 void exp_inplace(double *x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, exp4(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = std::exp(x[i]);
}

NCNET_AVX2 void log_inplace(double *x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, log4(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = std::log(x[i]);
}

#else // !NCNET_HAVE_AVX2

bool supported() noexcept { return false; }

double log_mean_cn_density(std::complex<double> y, const double *mean_re, const double *mean_im,
                           const double *var, double *scratch, std::size_t n) {
  return scalar::log_mean_cn_density(y, mean_re, mean_im, var, scratch, n);
}
void exp_inplace(double *x, std::size_t n) { scalar::exp_inplace(x, n); }
void log_inplace(double *x, std::size_t n) { scalar::log_inplace(x, n); }

#endif

} // namespace ncnet::kernels::avx2
