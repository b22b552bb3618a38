// SPDX-License-Identifier: Apache-2.0
#include "ncnet/fading.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "ncnet/error.hpp"
#include "ncnet/special.hpp"

namespace ncnet {

FadingModel::FadingModel(Topology topo, Eigen::VectorXcd mean, Eigen::MatrixXcd covariance,
                         std::optional<double> ar1_rho)
    : topo_(std::move(topo)), entries_(topo_.nonzero_links()), mean_(std::move(mean)),
      cov_(std::move(covariance)), rho_(ar1_rho) {
  const auto n = static_cast<Eigen::Index>(entries_.size());
  if (mean_.size() != n) throw InputError("fading mean has wrong length");
  if (cov_.rows() != n || cov_.cols() != n) throw InputError("fading covariance has wrong shape");
  if (n > 0) {
    const double scale = cov_.cwiseAbs().maxCoeff();
    if (!((cov_ - cov_.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0)))
      throw InputError("fading covariance is not Hermitian");
    Eigen::LLT<Eigen::MatrixXcd> llt(cov_);
    if (llt.info() != Eigen::Success)
      throw InputError("fading covariance is not positive definite");
    chol_ = llt.matrixL();
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(std::real(chol_(i, i)) > 1e-12 * std::sqrt(scale)))
        throw InputError("fading covariance is numerically singular");
  }
  if (rho_ && !(*rho_ >= 0.0 && *rho_ < 1.0)) throw InputError("ar1_rho must lie in [0, 1)");
}

FadingModel FadingModel::iid(Topology topo, double variance, std::complex<double> mean,
                             std::optional<double> ar1_rho) {
  if (!(variance > 0.0)) throw InputError("fading variance must be positive");
  const auto n = static_cast<Eigen::Index>(topo.nonzero_links().size());
  Eigen::VectorXcd mu = Eigen::VectorXcd::Constant(n, mean);
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(n, n) * variance;
  return FadingModel(std::move(topo), std::move(mu), std::move(cov), ar1_rho);
}

std::optional<std::size_t> FadingModel::entry_index(Link link) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), link);
  if (it == entries_.end() || *it != link) return std::nullopt;
  return static_cast<std::size_t>(it - entries_.begin());
}

std::vector<std::size_t> FadingModel::indices(std::span<const Link> links) const {
  std::vector<std::size_t> idx;
  idx.reserve(links.size());
  for (const auto &l : links) {
    auto i = entry_index(l);
    if (!i)
      throw InputError("link (" + std::to_string(l.rx + 1) + "," + std::to_string(l.tx + 1) +
                       ") is not a random fading entry");
    idx.push_back(*i);
  }
  return idx;
}

std::complex<double> FadingModel::mean(Link link) const {
  return mean_(static_cast<Eigen::Index>(indices({&link, 1}).front()));
}

double FadingModel::variance(Link link) const {
  const auto i = static_cast<Eigen::Index>(indices({&link, 1}).front());
  return std::real(cov_(i, i));
}

double FadingModel::frobenius2() const {
  return mean_.squaredNorm() + cov_.diagonal().real().sum();
}

Eigen::VectorXcd FadingModel::sub_mean(std::span<const Link> links) const {
  const auto idx = indices(links);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = mean_(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::MatrixXcd FadingModel::sub_covariance(std::span<const Link> links) const {
  return cross_covariance(links, links);
}

Eigen::MatrixXcd FadingModel::cross_covariance(std::span<const Link> rows,
                                               std::span<const Link> cols) const {
  const auto ri = indices(rows);
  const auto ci = indices(cols);
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(ri.size()), static_cast<Eigen::Index>(ci.size()));
  for (std::size_t i = 0; i < ri.size(); ++i)
    for (std::size_t j = 0; j < ci.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cov_(static_cast<Eigen::Index>(ri[i]), static_cast<Eigen::Index>(ci[j]));
  return out;
}

namespace {

Eigen::VectorXcd draw_entries(const FadingModel &model, Rng &rng) {
  Eigen::VectorXcd w(static_cast<Eigen::Index>(model.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = standard_complex_normal(rng);
  return model.cholesky_factor().triangularView<Eigen::Lower>() * w;
}

Eigen::MatrixXcd scatter(const FadingModel &model, const Eigen::VectorXcd &values) {
  const auto &topo = model.topology();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(topo.n_rx()),
                                              static_cast<Eigen::Index>(topo.n_tx()));
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto &l = model.entries()[i];
    h(static_cast<Eigen::Index>(l.rx), static_cast<Eigen::Index>(l.tx)) =
        values(static_cast<Eigen::Index>(i));
  }
  return h;
}

} // namespace

Eigen::MatrixXcd sample_matrix(const FadingModel &model, Rng &rng) {
  return scatter(model, model.mean() + draw_entries(model, rng));
}

Eigen::MatrixXcd sample_matrix(const FadingModel &model, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x66616465ULL}));
  return sample_matrix(model, rng);
}

std::vector<Eigen::MatrixXcd> sample_process(const FadingModel &model, std::size_t steps,
                                             std::uint64_t seed) {
  const double rho = model.ar1_rho().value_or(0.0);
  const double innov = std::sqrt(1.0 - rho * rho);
  Rng rng(derive_seed(seed, {0x70726f63ULL}));
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(steps);
  Eigen::VectorXcd dev = draw_entries(model, rng);
  for (std::size_t k = 0; k < steps; ++k) {
    if (k > 0) dev = rho * dev + innov * draw_entries(model, rng);
    out.push_back(scatter(model, model.mean() + dev));
  }
  return out;
}

Estimate log_h_squared_mean(std::complex<double> mean, double variance, LogMomentMethod method,
                            std::size_t draws, std::uint64_t seed) {
  if (!(variance > 0.0)) throw InputError("log_h_squared_mean needs a positive variance");
  const double m2 = std::norm(mean);
  if (method == LogMomentMethod::monte_carlo) {
    if (draws < 2) throw InputError("Monte Carlo needs at least two draws");
    Rng rng(derive_seed(seed, {0x6c6f6768ULL}));
    const double sd = std::sqrt(variance);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      const double v = std::log(std::norm(mean + sd * standard_complex_normal(rng)));
      sum += v;
      sum2 += v * v;
    }
    const double n = static_cast<double>(draws);
    const double avg = sum / n;
    return {avg, std::sqrt(std::max(sum2 / n - avg * avg, 0.0) / (n - 1.0))};
  }

  if (m2 == 0.0) return {std::log(variance) - special::kEulerGamma, 0.0};

  // With H = mu + sigma R e^{i theta}, averaging log|H|^2 over the uniform
  // phase gives log max(|mu|^2, sigma^2 R^2), and R^2 ~ Exp(1).
  const double c = m2 / variance;
  const auto tail = special::integrate_to_infinity(
      [&](double s) { return std::log(variance * s) * std::exp(-s); }, c);
  return {std::log(m2) * -std::expm1(-c) + tail.value, tail.error};
}

double log_det_hpd(const Eigen::MatrixXcd &m) {
  if (m.size() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success)
    throw InfiniteMutualInformation("covariance is singular (not positive definite)");
  const double scale = m.diagonal().real().maxCoeff();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = std::real(llt.matrixLLT()(i, i));
    if (!(d * d > 1e-13 * scale)) throw InfiniteMutualInformation("covariance is numerically singular");
    acc += 2.0 * std::log(d);
  }
  return acc;
}

double gaussian_entropy(const Eigen::MatrixXcd &cov) {
  constexpr double pi_e = std::numbers::pi * std::numbers::e;
  return static_cast<double>(cov.rows()) * std::log(pi_e) + log_det_hpd(cov);
}

Eigen::MatrixXcd conditional_covariance(const FadingModel &model, std::span<const Link> target,
                                        std::span<const Link> given) {
  Eigen::MatrixXcd ctt = model.sub_covariance(target);
  if (given.empty()) return ctt;
  const Eigen::MatrixXcd cgg = model.sub_covariance(given);
  const Eigen::MatrixXcd ctg = model.cross_covariance(target, given);
  return ctt - ctg * cgg.llt().solve(ctg.adjoint());
}

double block_mutual_information(const FadingModel &model, std::span<const Link> a,
                                std::span<const Link> b) {
  std::vector<Link> joint(a.begin(), a.end());
  joint.insert(joint.end(), b.begin(), b.end());
  auto sorted = joint;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InputError("blocks of a mutual information must be disjoint entry sets");
  if (a.empty() || b.empty()) return 0.0;
  const double mi = log_det_hpd(model.sub_covariance(a)) + log_det_hpd(model.sub_covariance(b)) -
                    log_det_hpd(model.sub_covariance(joint));
  return std::max(mi, 0.0);
}

double memory_gap_ar1(const FadingModel &model) {
  if (!model.ar1_rho()) throw InputError("memory gap needs an AR(1) coefficient");
  const double rho = *model.ar1_rho();
  if (rho >= kMaxAr1Rho) throw InputError("AR(1) coefficient too close to 1; memory gap diverges");
  return static_cast<double>(model.size()) * -std::log1p(-rho * rho);
}

nlohmann::ordered_json to_json(const FadingModel &model) {
  nlohmann::ordered_json doc;
  auto means = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto mu = model.mean()(static_cast<Eigen::Index>(i));
    if (mu != 0.0)
      means.push_back({model.entries()[i].rx + 1, model.entries()[i].tx + 1, mu.real(), mu.imag()});
  }
  doc["means"] = means;
  auto cov = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < model.covariance().rows(); ++i)
    for (Eigen::Index j = 0; j < model.covariance().cols(); ++j) {
      const auto c = model.covariance()(i, j);
      if (c.imag() == 0.0) cov.push_back(c.real());
      else cov.push_back({c.real(), c.imag()});
    }
  doc["covariance"] = cov;
  if (model.ar1_rho()) doc["ar1_rho"] = *model.ar1_rho();
  return doc;
}

FadingModel fading_from_json(const Topology &topo, const nlohmann::json &doc) {
  try {
    const auto links = topo.nonzero_links();
    const auto n = static_cast<Eigen::Index>(links.size());
    auto index_of = [&](Link l) -> Eigen::Index {
      auto it = std::lower_bound(links.begin(), links.end(), l);
      if (it == links.end() || *it != l)
        throw InputError("mean given for a deterministic-zero or out-of-range link");
      return it - links.begin();
    };
    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(n);
    std::vector<bool> seen(links.size(), false);
    for (const auto &m : doc.value("means", nlohmann::json::array())) {
      if (!m.is_array() || m.size() != 4) throw InputError("mean entry must be [r, t, re, im]");
      const auto r = m[0].get<long long>();
      const auto t = m[1].get<long long>();
      if (r < 1 || t < 1) throw InputError("mean entry index must be 1-based");
      const auto i = index_of({static_cast<std::size_t>(r - 1), static_cast<std::size_t>(t - 1)});
      if (seen[static_cast<std::size_t>(i)]) throw InputError("duplicate mean entry");
      seen[static_cast<std::size_t>(i)] = true;
      mean(i) = {m[2].get<double>(), m[3].get<double>()};
    }
    Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(n, n);
    if (doc.contains("covariance")) {
      const auto &c = doc.at("covariance");
      if (!c.is_array() || static_cast<Eigen::Index>(c.size()) != n * n)
        throw InputError("covariance must list |Z^c|^2 = " + std::to_string(n * n) + " elements");
      for (Eigen::Index k = 0; k < n * n; ++k) {
        const auto &e = c[static_cast<std::size_t>(k)];
        std::complex<double> v;
        if (e.is_number()) v = e.get<double>();
        else if (e.is_array() && e.size() == 2) v = {e[0].get<double>(), e[1].get<double>()};
        else throw InputError("covariance element must be a number or [re, im]");
        cov(k / n, k % n) = v;
      }
    }
    std::optional<double> rho;
    if (doc.contains("ar1_rho")) rho = doc.at("ar1_rho").get<double>();
    return FadingModel(topo, std::move(mean), std::move(cov), rho);
  } catch (const nlohmann::json::exception &e) {
    throw InputError(std::string("malformed fading document: ") + e.what());
  }
}

FadingModel load_fading_model(const Topology &topo, const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open fading model file '" + path + "'");
  try {
    return fading_from_json(topo, nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error &e) {
    throw InputError(std::string("fading model file is not JSON: ") + e.what());
  }
}

} // namespace ncnet
