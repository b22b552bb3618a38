// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string_view>

#include "ncnet/error.hpp"
#include "ncnet/kernels.hpp"

namespace ncnet::kernels {
namespace {

Isa initial_isa() noexcept {
  const char *env = std::getenv("NCNET_KERNEL");
  const std::string_view want = env ? env : "auto";
  if (want == "scalar") return Isa::scalar;
  return avx2::supported() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa> &current() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

} // namespace

const char *isa_name(Isa isa) noexcept {
  switch (isa) {
  case Isa::scalar: return "scalar";
  case Isa::avx2: return "avx2";
  }
  return "unknown";
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

Isa select_isa(Isa wanted) noexcept {
  if (wanted == Isa::avx2 && !avx2::supported()) wanted = Isa::scalar;
  current().store(wanted, std::memory_order_relaxed);
  return wanted;
}

double log_mean_cn_density(std::complex<double> y, std::span<const double> mean_re,
                           std::span<const double> mean_im, std::span<const double> var,
                           std::span<double> scratch) {
  const auto n = var.size();
  if (n == 0 || mean_re.size() != n || mean_im.size() != n || scratch.size() < n)
    throw InputError("mixture arrays must be non-empty and of equal length");
  if (active_isa() == Isa::avx2)
    return avx2::log_mean_cn_density(y, mean_re.data(), mean_im.data(), var.data(), scratch.data(), n);
  return scalar::log_mean_cn_density(y, mean_re.data(), mean_im.data(), var.data(), scratch.data(), n);
}

double log_mean_cn_density(std::complex<double> y, CnMixture &mix) {
  return log_mean_cn_density(y, mix.mean_re, mix.mean_im, mix.var, mix.scratch);
}

void exp_inplace(std::span<double> x) {
  if (active_isa() == Isa::avx2)
    avx2::exp_inplace(x.data(), x.size());
  else
    scalar::exp_inplace(x.data(), x.size());
}

void log_inplace(std::span<double> x) {
  if (active_isa() == Isa::avx2)
    avx2::log_inplace(x.data(), x.size());
  else
    scalar::log_inplace(x.data(), x.size());
}

} // namespace ncnet::kernels
