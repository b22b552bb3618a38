// SPDX-License-Identifier: Apache-2.0
#include "ncnet/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

#include "ncnet/error.hpp"
#include "ncnet/kernels.hpp"

namespace ncnet {

namespace {

// Runs body(begin, end) over contiguous chunks of [0, n) on up to `workers`
// threads. The first exception thrown by any chunk is rethrown.
template <class Body> void parallel_for(std::size_t n, std::size_t workers, Body body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex m;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto &th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double log_cn_density(std::complex<double> y, std::complex<double> mean, double var) {
  return -std::log(std::numbers::pi * var) - std::norm(y - mean) / var;
}

std::complex<double> unit_phase(Rng &rng) {
  const double theta = 2.0 * std::numbers::pi * uniform01(rng);
  return {std::cos(theta), std::sin(theta)};
}

} // namespace

InputLaw::InputLaw(std::size_t n_tx, PowerChain chain, PowerAllocation alloc)
    : n_tx_(n_tx), chain_(std::move(chain)), alloc_(std::move(alloc)),
      laws_(chain_.length(), LogUniformMagnitude{}), cdf_(chain_.length()) {
  if (chain_.length() != alloc_.kappa())
    throw InputError("allocation has " + std::to_string(alloc_.kappa()) +
                     " levels for a chain of length " + std::to_string(chain_.length()));
  for (auto t : chain_.transmitters)
    if (t >= n_tx_) throw InputError("chain transmitter out of range");
}

InputLaw &InputLaw::with_magnitudes(std::size_t nu, MagnitudeLaw law) {
  if (nu >= laws_.size()) throw InputError("level out of range");
  cdf_[nu].clear();
  if (const auto *p = std::get_if<PointMagnitudes>(&law)) {
    if (p->values.empty() || p->values.size() != p->weights.size())
      throw InputError("point law needs matching non-empty values and weights");
    double total = 0.0;
    for (std::size_t i = 0; i < p->values.size(); ++i) {
      if (!(p->values[i] >= 0.0) || !(p->weights[i] >= 0.0))
        throw InputError("point law values and weights must be non-negative");
      total += p->weights[i];
    }
    if (!(total > 0.0)) throw InputError("point law weights sum to zero");
    double acc = 0.0;
    for (double w : p->weights) cdf_[nu].push_back(acc += w / total);
    cdf_[nu].back() = 1.0;
  }
  laws_[nu] = std::move(law);
  return *this;
}

double InputLaw::sample_magnitude(std::size_t nu, Rng &rng) const {
  const double u = uniform01(rng);
  if (const auto *p = std::get_if<PointMagnitudes>(&laws_.at(nu))) {
    const auto it = std::upper_bound(cdf_[nu].begin(), cdf_[nu].end(), u);
    return p->values[std::min<std::size_t>(it - cdf_[nu].begin(), p->values.size() - 1)];
  }
  const auto &l = alloc_.level(nu);
  const double lo = std::log(l.x_min), hi = std::log(l.x_max);
  return std::exp(lo + u * (hi - lo));
}

std::complex<double> InputLaw::sample_symbol(std::size_t nu, Rng &rng) const {
  const double mag = sample_magnitude(nu, rng);
  return mag * unit_phase(rng);
}

Eigen::VectorXcd sample_input(const InputLaw &law, Rng &rng) {
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(law.n_tx()));
  for (std::size_t nu = 0; nu < law.chain().length(); ++nu)
    x(static_cast<Eigen::Index>(law.chain().transmitters[nu])) = law.sample_symbol(nu, rng);
  return x;
}

Eigen::VectorXcd sample_input(const InputLaw &law, std::uint64_t seed) {
  Rng rng(seed);
  return sample_input(law, rng);
}

Eigen::VectorXcd sample_output(const FadingModel &model, const Eigen::VectorXcd &x, Rng &rng) {
  const Topology &topo = model.topology();
  if (static_cast<std::size_t>(x.size()) != topo.n_tx())
    throw InputError("input has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(topo.n_tx()));
  const Eigen::MatrixXcd h = sample_matrix(model, rng);
  Eigen::VectorXcd y = h * x;
  for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += standard_complex_normal(rng);
  return y;
}

Eigen::VectorXcd sample_output(const FadingModel &model, const Eigen::VectorXcd &x,
                               std::uint64_t seed) {
  Rng rng(seed);
  return sample_output(model, x, rng);
}

namespace {

// Scalar channel seen at one witness: Y = g^T a + Z with g ~ CN(mu, Sigma)
// over the link of the chain member (index 0) and its active interferers.
struct WitnessChannel {
  std::vector<std::size_t> levels; // chain levels of a[0], a[1], ...
  Eigen::VectorXcd mu;
  Eigen::MatrixXcd sigma;
  bool zero_mean = false;

  std::size_t size() const { return levels.size(); }

  void moments(const std::vector<std::complex<double>> &a, std::complex<double> &mean,
               double &var) const {
    mean = 0.0;
    std::complex<double> quad = 0.0;
    const auto k = static_cast<Eigen::Index>(a.size());
    for (Eigen::Index i = 0; i < k; ++i) {
      mean += mu(i) * a[i];
      for (Eigen::Index j = 0; j < k; ++j) quad += a[i] * sigma(i, j) * std::conj(a[j]);
    }
    var = quad.real() + 1.0;
  }
};

class PairEstimator {
public:
  PairEstimator(const WitnessChannel &ch, const InputLaw &law, const MiOptions &opt,
                std::size_t nu)
      : ch_(ch), law_(law), opt_(opt), nu_(nu) {}

  // log f(y | x) - log f(y) for outer sample i.
  double term(std::size_t i, kernels::CnMixture &mix, std::vector<std::complex<double>> &a) const {
    Rng rng(derive_seed(opt_.seed, {nu_, 0, i}));
    const std::size_t k = ch_.size();
    a.resize(k);
    for (std::size_t s = 0; s < k; ++s) a[s] = law_.sample_symbol(ch_.levels[s], rng);
    std::complex<double> m;
    double v;
    ch_.moments(a, m, v);
    const std::complex<double> y = m + std::sqrt(v) * standard_complex_normal(rng);

    double log_cond;
    if (k == 1 || opt_.conditional) {
      log_cond = log_cn_density(y, m, v);
    } else {
      fill_mixture(mix, a, rng, /*fresh_member=*/false, /*fresh_interferers=*/true);
      log_cond = kernels::log_mean_cn_density(y, mix);
    }
    fill_mixture(mix, a, rng, /*fresh_member=*/true, /*fresh_interferers=*/!opt_.conditional);
    return log_cond - kernels::log_mean_cn_density(y, mix);
  }

private:
  void fill_mixture(kernels::CnMixture &mix, std::vector<std::complex<double>> a, Rng &rng,
                    bool fresh_member, bool fresh_interferers) const {
    const std::size_t m_inner = opt_.m_inner;
    mix.resize(m_inner);
    if (ch_.size() == 1 && ch_.zero_mean && fresh_member) {
      fill_magnitudes_only(mix, rng);
      return;
    }
    std::complex<double> mean;
    double var;
    for (std::size_t j = 0; j < m_inner; ++j) {
      if (fresh_member) a[0] = law_.sample_symbol(ch_.levels[0], rng);
      if (fresh_interferers)
        for (std::size_t s = 1; s < a.size(); ++s) a[s] = law_.sample_symbol(ch_.levels[s], rng);
      ch_.moments(a, mean, var);
      mix.mean_re[j] = mean.real();
      mix.mean_im[j] = mean.imag();
      mix.var[j] = var;
    }
  }

  // Zero-mean single-link case: the phase of x drops out of CN(0, s2 |x|^2 + 1).
  void fill_magnitudes_only(kernels::CnMixture &mix, Rng &rng) const {
    const std::size_t m_inner = opt_.m_inner;
    const double s2 = ch_.sigma(0, 0).real();
    const std::size_t level = ch_.levels[0];
    if (std::holds_alternative<LogUniformMagnitude>(law_.magnitudes(level))) {
      const auto &l = law_.alloc().level(level);
      const double lo = 2.0 * std::log(l.x_min), hi = 2.0 * std::log(l.x_max);
      for (std::size_t j = 0; j < m_inner; ++j) mix.var[j] = lo + uniform01(rng) * (hi - lo);
      kernels::exp_inplace(mix.var);
    } else {
      for (std::size_t j = 0; j < m_inner; ++j) {
        const double x = law_.sample_magnitude(level, rng);
        mix.var[j] = x * x;
      }
    }
    for (std::size_t j = 0; j < m_inner; ++j) {
      mix.var[j] = s2 * mix.var[j] + 1.0;
      mix.mean_re[j] = 0.0;
      mix.mean_im[j] = 0.0;
    }
  }

  const WitnessChannel &ch_;
  const InputLaw &law_;
  const MiOptions &opt_;
  std::size_t nu_;
};

} // namespace

MiEstimate estimate_pair_mi(const FadingModel &model, const InputLaw &law, std::size_t nu,
                            const MiOptions &options) {
  if (options.n_outer < kMinSamples || options.m_inner < kMinSamples)
    throw InputError("n_outer and m_inner must be at least " + std::to_string(kMinSamples));
  const Topology &topo = model.topology();
  if (law.n_tx() != topo.n_tx()) throw InputError("input law and model disagree on n_t");
  const PowerChain &chain = law.chain();
  if (nu >= chain.length()) throw InputError("level out of range");
  if (chain.witnesses.size() != chain.length())
    throw InputError("chain needs one witness per transmitter");

  const std::size_t r = chain.witnesses[nu];
  if (r >= topo.n_rx() || !topo.hears(r, chain.transmitters[nu]))
    throw InputError("witness receiver does not hear its transmitter");
  for (std::size_t eta = 0; eta < nu; ++eta)
    if (topo.hears(r, chain.transmitters[eta]))
      throw InputError("witness receiver " + std::to_string(r + 1) +
                       " hears stronger chain member " +
                       std::to_string(chain.transmitters[eta] + 1));

  WitnessChannel ch;
  std::vector<Link> links{{r, chain.transmitters[nu]}};
  ch.levels.push_back(nu);
  for (std::size_t eta = nu + 1; eta < chain.length(); ++eta)
    if (topo.hears(r, chain.transmitters[eta])) {
      links.push_back({r, chain.transmitters[eta]});
      ch.levels.push_back(eta);
    }
  ch.mu = model.sub_mean(links);
  ch.sigma = model.sub_covariance(links);
  ch.zero_mean = ch.mu.squaredNorm() == 0.0;

  const PairEstimator estimator(ch, law, options, nu);
  std::vector<double> terms(options.n_outer);
  parallel_for(options.n_outer, options.workers, [&](std::size_t begin, std::size_t end) {
    kernels::CnMixture mix;
    std::vector<std::complex<double>> a;
    for (std::size_t i = begin; i < end; ++i) terms[i] = estimator.term(i, mix, a);
  });

  double sum = 0.0;
  for (double t : terms) sum += t;
  const double n = static_cast<double>(terms.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double t : terms) ss += (t - mean) * (t - mean);
  MiEstimate out;
  out.value = mean;
  out.std_error = std::sqrt(ss / (n - 1.0) / n);
  out.n_outer = options.n_outer;
  out.m_inner = options.m_inner;
  out.interferers = links.size() - 1;
  return out;
}

std::vector<double> log_grid(double start_exp, double stop_exp, std::size_t points) {
  if (points == 0) throw InputError("grid needs at least one point");
  if (!std::isfinite(start_exp) || !std::isfinite(stop_exp))
    throw InputError("grid exponents must be finite");
  if (points == 1) return {std::pow(10.0, start_exp)};
  if (!(stop_exp > start_exp)) throw InputError("grid must be strictly increasing");
  std::vector<double> grid(points);
  const double step = (stop_exp - start_exp) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = std::pow(10.0, start_exp + step * static_cast<double>(i));
  return grid;
}

std::vector<SweepRecord> snr_sweep(const FadingModel &model, std::span<const double> snr_grid,
                                   const SweepOptions &options) {
  if (snr_grid.empty()) throw InputError("empty SNR grid");
  for (std::size_t i = 0; i < snr_grid.size(); ++i) {
    if (!(snr_grid[i] > 1.0) || !std::isfinite(snr_grid[i]))
      throw InputError("grid SNRs must be finite and > 1");
    if (i > 0 && !(snr_grid[i] > snr_grid[i - 1]))
      throw InputError("SNR grid must be strictly increasing");
  }
  const Topology &topo = model.topology();
  if (!topo.is_pruned()) throw InputError("sweep needs a pruned topology");
  const LongestChain lc = longest_chain(topo);

  std::vector<SweepRecord> out;
  for (double snr : snr_grid) {
    SweepRecord rec;
    rec.snr = snr;
    rec.kappa_star = lc.kappa;
    rec.loglog_term = static_cast<double>(lc.kappa) * std::log(std::log(snr));
    rec.seed = options.seed;
    rec.analytic_upper = converse_envelope(model, snr).value;
    rec.feasible = snr >= min_valid_snr(lc.kappa);
    if (rec.feasible) {
      try {
        rec.analytic_lower = scheme_rate_lower_bound(model, lc.chain, snr).total;
      } catch (const InfeasibleAllocation &) {
        rec.feasible = false;
      }
    }
    if (rec.feasible && options.monte_carlo) {
      const InputLaw law(topo.n_tx(), lc.chain, allocation(snr, lc.kappa));
      MiOptions mi;
      mi.n_outer = options.n_outer;
      mi.m_inner = options.m_inner;
      mi.workers = options.workers;
      mi.seed = derive_seed(options.seed, {seed_key(snr)});
      double value = 0.0, var = 0.0;
      for (std::size_t nu = 0; nu < lc.kappa; ++nu) {
        const MiEstimate e = estimate_pair_mi(model, law, nu, mi);
        value += e.value;
        var += e.std_error * e.std_error;
      }
      rec.mc_estimate = value;
      rec.mc_std_error = std::sqrt(var);
      rec.n_outer = options.n_outer;
      rec.m_inner = options.m_inner;
    }
    out.push_back(rec);
  }
  return out;
}

LoglogFit fit_loglog_slope(std::span<const double> snr, std::span<const double> value) {
  if (snr.size() != value.size()) throw InputError("fit inputs differ in length");
  if (snr.size() < 3) throw InputError("slope fit needs at least 3 points");
  const double n = static_cast<double>(snr.size());
  std::vector<double> x(snr.size());
  for (std::size_t i = 0; i < snr.size(); ++i) {
    if (!(snr[i] > 1.0)) throw InputError("slope fit needs SNR > 1");
    x[i] = std::log(std::log(snr[i]));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(value.begin(), value.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (value[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("slope fit is degenerate: all SNRs equal");
  LoglogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = value[i] - fit.intercept - fit.slope * x[i];
    ssr += e * e;
  }
  fit.residual = std::sqrt(ssr / n);
  fit.points = x.size();
  return fit;
}

LoglogFit fit_loglog_slope(std::span<const SweepRecord> records, FitTarget target) {
  std::vector<double> snr, value;
  for (const auto &r : records) {
    if (!r.feasible) continue;
    std::optional<double> v;
    switch (target) {
    case FitTarget::monte_carlo: v = r.mc_estimate; break;
    case FitTarget::lower: v = r.analytic_lower; break;
    case FitTarget::upper: v = r.analytic_upper; break;
    }
    if (!v) continue;
    snr.push_back(r.snr);
    value.push_back(*v);
  }
  return fit_loglog_slope(snr, value);
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const std::optional<double> &v) { return v ? num(*v) : std::string(); }

} // namespace

void write_csv(std::ostream &out, std::span<const SweepRecord> records) {
  out << "E,kappa_star,loglog,lower,mc,mc_stderr,upper,feasible\n";
  for (const auto &r : records) {
    out << num(r.snr) << ',' << r.kappa_star << ',' << num(r.loglog_term) << ','
        << num(r.analytic_lower) << ',' << num(r.mc_estimate) << ',' << num(r.mc_std_error)
        << ',' << num(r.analytic_upper) << ',' << (r.feasible ? 1 : 0) << '\n';
  }
}

nlohmann::ordered_json to_json(std::span<const SweepRecord> records) {
  auto arr = nlohmann::ordered_json::array();
  auto opt = [](const std::optional<double> &v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  for (const auto &r : records) {
    nlohmann::ordered_json j;
    j["E"] = r.snr;
    j["kappa_star"] = r.kappa_star;
    j["loglog"] = r.loglog_term;
    j["feasible"] = r.feasible;
    j["lower"] = opt(r.analytic_lower);
    j["mc"] = opt(r.mc_estimate);
    j["mc_stderr"] = opt(r.mc_std_error);
    j["upper"] = r.analytic_upper;
    j["n_outer"] = r.n_outer;
    j["m_inner"] = r.m_inner;
    j["seed"] = r.seed;
    arr.push_back(std::move(j));
  }
  return arr;
}

} // namespace ncnet
