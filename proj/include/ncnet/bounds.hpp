// SPDX-License-Identifier: Apache-2.0
#pragma once

// Analytic capacity bounds for non-coherent fading networks.
//
// All logarithms are natural; every rate is in nats. The SNR budget E is a
// power, while allocation levels are input magnitudes.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncnet/fading.hpp"
#include "ncnet/powerchain.hpp"
#include "ncnet/topology.hpp"

namespace ncnet {

struct PowerLevel {
  double x_min = 0.0;
  double x_max = 0.0;
};

// Per-level magnitude intervals of the layered input law; level 0 carries the
// strongest transmitter of the chain.
class PowerAllocation {
public:
  // Validates 0 < x_min <= x_max on each level. Nesting is not required.
  PowerAllocation(double snr, std::vector<PowerLevel> levels);

  double snr() const noexcept { return snr_; }
  std::size_t kappa() const noexcept { return levels_.size(); }
  const std::vector<PowerLevel> &levels() const noexcept { return levels_; }
  const PowerLevel &level(std::size_t nu) const;

  // max over later levels of x_max^2; 0 for the last level.
  double interferer_peak2(std::size_t nu) const;
  // x_min,nu^2 / interferer_peak2(nu); +inf for the last level.
  double separation_ratio(std::size_t nu) const;
  // x_min,nu > x_max,nu+1 for every level but the last.
  bool nested() const;

private:
  double snr_;
  std::vector<PowerLevel> levels_;
};

// Smallest E0 with E^(1/(k(k+1))) > ln E for all E >= E0; e for kappa = 1.
double min_valid_snr(std::size_t kappa);

// x_max = E^(1/nu), x_min = E^(1/(nu+1)) ln E for nu = 1..kappa.
// Throws InfeasibleAllocation below min_valid_snr(kappa).
PowerAllocation allocation(double snr, std::size_t kappa);

// 1 + frob2 (kappa - nu - 1) interferer_peak2(nu), with 0-based level nu.
double effective_noise_variance(std::size_t nu, const PowerAllocation &alloc, double frob2);

// Rate of a log-uniform circularly-symmetric input on [x_min, x_max] through
// H x + W with H of std. deviation sigma_h and E[log|H|^2] = e_log_h2, and
// noise of std. deviation at most sigma_w.
double lemma5_lower_bound(double x_min, double x_max, double sigma_h, double sigma_w,
                          double e_log_h2);

// Gap between the conditional and single-user rates at level nu.
double interference_penalty(std::size_t nu, const PowerAllocation &alloc, double frob2,
                            double eps2);

struct LevelTerm {
  std::size_t transmitter = 0;
  std::size_t witness = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  double sigma_h = 0.0;
  double e_log_h2 = 0.0;
  double noise_variance = 0.0;
  double eps2 = 0.0;
  double level_bound = 0.0;
  double penalty = 0.0;
};

struct LowerBound {
  double total = 0.0;
  // total - sum of penalties: a bound on the sum of single-user rates.
  double single_user = 0.0;
  std::vector<LevelTerm> levels;
};

// Sum over the chain of the per-level bound, each using the witness receiver's
// fading statistics and the interference-inflated noise variance.
LowerBound scheme_rate_lower_bound(const FadingModel &model, const PowerChain &chain,
                                   double snr);

// Receivers/transmitters of one single-dominant-transmitter block.
struct Block {
  IndexSet receivers;
  IndexSet transmitters;
  std::size_t dominant = 0;
};

struct SupTerm {
  double value = 0.0;
  double rho = 0.0;      // maximizing |x(t*)|^2
  double h_cond = 0.0;   // conditional entropy of column t* on the block
  int iterations = 0;
};

// sup over rho > 0 of n log(frob2 nT rho + n) - max(n log(pi e), n log rho + h_cond),
// by golden-section search on log rho. Throws NumericalError with the bracket
// if the maximizer sits on an end of [lo, hi].
SupTerm sup_term(double frob2, std::size_t n_rx, std::size_t n_tx, double h_cond,
                 double rho_lo = 1e-30, double rho_hi = 1e30, double tol = 1e-6);

struct BlockBound {
  double value = 0.0;
  double constant = 0.0; // n log pi - log Gamma(n) + sup-term
  double alpha = 0.0;
  SupTerm sup;
  double frob2 = 0.0;
};

// Duality bound on I(X(T_B); Y(R_B)) for inputs whose largest component is the
// block's dominant transmitter, which must reach every block receiver.
BlockBound block_upper_bound(const FadingModel &model, const Block &block, double snr);

// block_upper_bound on the whole network with the lowest-index transmitter
// heard by every receiver, or `dominant` if given.
double duality_upper_bound(const FadingModel &model, double snr,
                           std::optional<std::size_t> dominant = std::nullopt);

struct PhaseConstant {
  Block block;
  double constant = 0.0;        // sup_E UB(E) - log(1 + log(1 + E))
  double cross_information = 0.0;
};

struct ConverseEnvelope {
  double value = 0.0;
  std::size_t kappa_star = 0;
  double constant = 0.0; // value - kappa* log(1 + log(1 + E))
  double log_factorial = 0.0;
  std::vector<PhaseConstant> phases;
};

// kappa* log(1 + log(1 + E)) + c over the identity-permutation decomposition.
ConverseEnvelope converse_envelope(const FadingModel &model, double snr);

struct BoundReport {
  double snr = 0.0;
  std::size_t kappa_star = 0;
  double loglog_term = 0.0;
  bool feasible = false;
  std::optional<double> lower_bound;
  std::optional<double> single_user_lower;
  double upper_bound = 0.0;
  std::vector<LevelTerm> levels;
  ConverseEnvelope converse;
  std::string note;
};

// Both bounds for the longest chain of the model's (pruned) topology. An SNR
// below the allocation threshold yields feasible = false and no lower bound.
BoundReport bound_report(const FadingModel &model, double snr);

nlohmann::ordered_json to_json(const BoundReport &report);

} // namespace ncnet
