// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ncnet {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed of `parent` for the path `keys`. Used to expand one root seed
// into independent per-(SNR, level, stream, sample) streams.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t s = splitmix64(parent);
  for (auto k : keys) s = splitmix64(s ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return s;
}

inline std::uint64_t seed_key(double x) noexcept { return std::bit_cast<std::uint64_t>(x); }

// CN(0, 1): independent real and imaginary parts of variance 1/2.
inline std::complex<double> standard_complex_normal(Rng &rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline double uniform01(Rng &rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace ncnet
