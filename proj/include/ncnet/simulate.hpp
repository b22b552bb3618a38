// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ncnet/bounds.hpp"
#include "ncnet/fading.hpp"
#include "ncnet/powerchain.hpp"
#include "ncnet/rng.hpp"

namespace ncnet {

// log|X|^2 uniform on [log x_min^2, log x_max^2] of the level.
struct LogUniformMagnitude {};

// |X| = values[i] with probability weights[i] (weights need not be normalized).
struct PointMagnitudes {
  std::vector<double> values;
  std::vector<double> weights;
};

using MagnitudeLaw = std::variant<LogUniformMagnitude, PointMagnitudes>;

/// Layered input: chain member nu has uniform phase and a magnitude drawn from
/// its level's law, independently across members; all other transmitters
/// send exactly zero.
class InputLaw {
public:
  InputLaw(std::size_t n_tx, PowerChain chain, PowerAllocation alloc);

  // Replaces the magnitude law of level nu.
  InputLaw &with_magnitudes(std::size_t nu, MagnitudeLaw law);

  std::size_t n_tx() const noexcept { return n_tx_; }
  const PowerChain &chain() const noexcept { return chain_; }
  const PowerAllocation &alloc() const noexcept { return alloc_; }
  const MagnitudeLaw &magnitudes(std::size_t nu) const { return laws_.at(nu); }

  double sample_magnitude(std::size_t nu, Rng &rng) const;
  std::complex<double> sample_symbol(std::size_t nu, Rng &rng) const;

private:
  std::size_t n_tx_;
  PowerChain chain_;
  PowerAllocation alloc_;
  std::vector<MagnitudeLaw> laws_;
  std::vector<std::vector<double>> cdf_; // per level, for point laws
};

Eigen::VectorXcd sample_input(const InputLaw &law, Rng &rng);
Eigen::VectorXcd sample_input(const InputLaw &law, std::uint64_t seed);

// y = H x + z with H drawn from `model` and z ~ CN(0, I).
Eigen::VectorXcd sample_output(const FadingModel &model, const Eigen::VectorXcd &x, Rng &rng);
Eigen::VectorXcd sample_output(const FadingModel &model, const Eigen::VectorXcd &x,
                               std::uint64_t seed);

struct MiOptions {
  std::size_t n_outer = 20000;
  std::size_t m_inner = 2000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  // Estimate I(X(t_nu); Y(r_nu) | later chain inputs) instead of the single-user rate.
  bool conditional = false;
};

inline constexpr std::size_t kMinSamples = 100;

struct MiEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_outer = 0;
  std::size_t m_inner = 0;
  std::size_t interferers = 0;
};

// Nested Monte Carlo estimate of I(X(t_nu); Y(r_nu)) in nats under `law`.
// The witness fading is integrated in closed form; the outer average runs
// over (x, y) draws and each density is a log-mean over m_inner fresh draws.
// Results depend only on (seed, nu, sample index), not on `workers`.
MiEstimate estimate_pair_mi(const FadingModel &model, const InputLaw &law, std::size_t nu,
                            const MiOptions &options);

struct SweepOptions {
  std::size_t n_outer = 20000;
  std::size_t m_inner = 2000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool monte_carlo = true;
};

struct SweepRecord {
  double snr = 0.0;
  std::size_t kappa_star = 0;
  double loglog_term = 0.0;
  bool feasible = false;
  std::optional<double> analytic_lower;
  std::optional<double> mc_estimate;
  std::optional<double> mc_std_error;
  double analytic_upper = 0.0;
  std::size_t n_outer = 0;
  std::size_t m_inner = 0;
  std::uint64_t seed = 0;
};

// One record per SNR; points below the allocation threshold are reported
// infeasible with only the upper envelope filled in.
std::vector<SweepRecord> snr_sweep(const FadingModel &model, std::span<const double> snr_grid,
                                   const SweepOptions &options);

// 10^start .. 10^stop in `points` log-spaced steps.
std::vector<double> log_grid(double start_exp, double stop_exp, std::size_t points);

struct LoglogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0; // root mean square
  std::size_t points = 0;
};

enum class FitTarget { monte_carlo, lower, upper };

// Least squares of value = a + b log log E.
LoglogFit fit_loglog_slope(std::span<const double> snr, std::span<const double> value);
LoglogFit fit_loglog_slope(std::span<const SweepRecord> records,
                           FitTarget target = FitTarget::monte_carlo);

void write_csv(std::ostream &out, std::span<const SweepRecord> records);
nlohmann::ordered_json to_json(std::span<const SweepRecord> records);

} // namespace ncnet
