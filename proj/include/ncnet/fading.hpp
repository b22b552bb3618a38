// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ncnet/rng.hpp"
#include "ncnet/topology.hpp"

namespace ncnet {

inline constexpr double kMaxAr1Rho = 1.0 - 1e-6;

/// Circularly-symmetric Gaussian law of the non-zero fading entries.
///
/// The entries of Z^c are ordered by (receiver, transmitter); `mean` and
/// `covariance` are indexed in that order. Entries in Z are identically zero
/// and have no parameters. The covariance must be Hermitian positive
/// definite; its Cholesky factor is computed once at construction.
///
/// An optional AR(1) coefficient rho gives every entry the temporal law
/// H_k = mu + rho (H_{k-1} - mu) + sqrt(1 - rho^2) W_k, with W_k drawn from
/// the same spatial covariance, so the marginal is unchanged.
class FadingModel {
public:
  FadingModel(Topology topo, Eigen::VectorXcd mean, Eigen::MatrixXcd covariance,
              std::optional<double> ar1_rho = std::nullopt);

  // Independent CN(mean, variance) entries on every non-zero link.
  static FadingModel iid(Topology topo, double variance = 1.0, std::complex<double> mean = 0.0,
                         std::optional<double> ar1_rho = std::nullopt);

  const Topology &topology() const noexcept { return topo_; }
  const std::vector<Link> &entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::optional<std::size_t> entry_index(Link link) const;

  const Eigen::VectorXcd &mean() const noexcept { return mean_; }
  const Eigen::MatrixXcd &covariance() const noexcept { return cov_; }
  const Eigen::MatrixXcd &cholesky_factor() const noexcept { return chol_; }
  std::optional<double> ar1_rho() const noexcept { return rho_; }

  std::complex<double> mean(Link link) const;
  double variance(Link link) const;

  // E[||H||_F^2] = sum over Z^c of |mu|^2 + variance.
  double frobenius2() const;

  Eigen::VectorXcd sub_mean(std::span<const Link> links) const;
  Eigen::MatrixXcd sub_covariance(std::span<const Link> links) const;
  Eigen::MatrixXcd cross_covariance(std::span<const Link> rows, std::span<const Link> cols) const;

private:
  std::vector<std::size_t> indices(std::span<const Link> links) const;

  Topology topo_;
  std::vector<Link> entries_;
  Eigen::VectorXcd mean_;
  Eigen::MatrixXcd cov_;
  Eigen::MatrixXcd chol_;
  std::optional<double> rho_;
};

// One n_rx x n_tx draw; entries in Z are exactly zero.
Eigen::MatrixXcd sample_matrix(const FadingModel &model, Rng &rng);
Eigen::MatrixXcd sample_matrix(const FadingModel &model, std::uint64_t seed);

// `steps` consecutive matrices of the AR(1) process started in stationarity.
std::vector<Eigen::MatrixXcd> sample_process(const FadingModel &model, std::size_t steps,
                                             std::uint64_t seed);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

enum class LogMomentMethod { automatic, quadrature, monte_carlo };

// E[log |H|^2] for H ~ CN(mean, variance), in nats. `automatic` uses the
// closed form log(variance) - gamma for zero mean and quadrature otherwise.
// The quadrature branch reports its error estimate as std_error.
Estimate log_h_squared_mean(std::complex<double> mean, double variance,
                            LogMomentMethod method = LogMomentMethod::automatic,
                            std::size_t draws = 1'000'000, std::uint64_t seed = 1);

// log det of a Hermitian positive-definite matrix; throws
// InfiniteMutualInformation when the matrix is numerically singular.
double log_det_hpd(const Eigen::MatrixXcd &m);

// Differential entropy of CN(., cov): log det(pi e cov).
double gaussian_entropy(const Eigen::MatrixXcd &cov);

// Covariance of `target` given `given` (Schur complement).
Eigen::MatrixXcd conditional_covariance(const FadingModel &model, std::span<const Link> target,
                                        std::span<const Link> given);

// I(H(a); H(b)) = log det C_a + log det C_b - log det C_ab, nats.
double block_mutual_information(const FadingModel &model, std::span<const Link> a,
                                std::span<const Link> b);

// I(H_k; H_1..H_{k-1}) for the per-entry AR(1) model: |Z^c| * -log(1 - rho^2).
double memory_gap_ar1(const FadingModel &model);

// {"means": [[r, t, re, im], ...], "covariance": [...], "ar1_rho": x}; the
// covariance is a row-major |Z^c|^2 list over entries sorted by (r, t), each
// element a number or [re, im]. Missing means are zero, missing covariance is I.
nlohmann::ordered_json to_json(const FadingModel &model);
FadingModel fading_from_json(const Topology &topo, const nlohmann::json &doc);
FadingModel load_fading_model(const Topology &topo, const std::string &path);

} // namespace ncnet
