// SPDX-License-Identifier: Apache-2.0
#include "ncnet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ncnet/error.hpp"
#include "ncnet/special.hpp"

namespace ncnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(std::size_t nu, std::size_t kappa) {
  if (nu >= kappa)
    throw InputError("level " + std::to_string(nu) + " out of range for chain length " +
                     std::to_string(kappa));
}

// log(exp(a) + exp(b))
double log_add(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

double block_frobenius2(const FadingModel &model, const Block &block) {
  const Topology &topo = model.topology();
  double s = 0.0;
  for (auto r : block.receivers)
    for (auto t : block.transmitters)
      if (topo.hears(r, t)) s += std::norm(model.mean(Link{r, t})) + model.variance(Link{r, t});
  return s;
}

void validate_block(const Topology &topo, const Block &block) {
  if (block.receivers.empty() || block.transmitters.empty())
    throw InputError("block needs at least one receiver and one transmitter");
  if (!std::is_sorted(block.receivers.begin(), block.receivers.end()) ||
      !std::is_sorted(block.transmitters.begin(), block.transmitters.end()))
    throw InputError("block index sets must be sorted");
  if (!std::binary_search(block.transmitters.begin(), block.transmitters.end(), block.dominant))
    throw InputError("dominant transmitter is not in the block");
  for (auto r : block.receivers) {
    if (r >= topo.n_rx()) throw InputError("block receiver out of range");
    if (!topo.hears(r, block.dominant))
      throw InputError("dominant transmitter " + std::to_string(block.dominant + 1) +
                       " is not heard by receiver " + std::to_string(r + 1));
  }
  for (auto t : block.transmitters)
    if (t >= topo.n_tx()) throw InputError("block transmitter out of range");
}

// SNR-independent part of the block bound.
struct BlockParts {
  std::size_t n = 0;
  double frob2 = 0.0;
  double constant = 0.0;
  SupTerm sup;
};

BlockParts block_parts(const FadingModel &model, const Block &block) {
  const Topology &topo = model.topology();
  validate_block(topo, block);
  std::vector<Link> target, given;
  for (auto r : block.receivers) {
    target.push_back({r, block.dominant});
    for (auto t : block.transmitters)
      if (t != block.dominant && topo.hears(r, t)) given.push_back({r, t});
  }
  const double h_cond = gaussian_entropy(conditional_covariance(model, target, given));

  BlockParts parts;
  parts.n = block.receivers.size();
  parts.frob2 = block_frobenius2(model, block);
  parts.sup = sup_term(parts.frob2, parts.n, block.transmitters.size(), h_cond);
  const double n = static_cast<double>(parts.n);
  parts.constant = n * std::log(std::numbers::pi) - special::log_gamma(n) + parts.sup.value;
  return parts;
}

double block_value(const BlockParts &parts, double snr, double *alpha_out = nullptr) {
  const double n = static_cast<double>(parts.n);
  const double d = 1.0 + std::log(parts.frob2 * snr + n) - special::digamma(n);
  const double alpha = 1.0 / d;
  if (alpha_out) *alpha_out = alpha;
  return parts.constant + alpha * d + special::log_gamma(alpha) - alpha * std::log(alpha);
}

} // namespace

PowerAllocation::PowerAllocation(double snr, std::vector<PowerLevel> levels)
    : snr_(snr), levels_(std::move(levels)) {
  if (!(snr > 0.0) || !std::isfinite(snr)) throw InputError("SNR must be positive and finite");
  if (levels_.empty()) throw InputError("allocation needs at least one level");
  for (const auto &l : levels_)
    if (!(l.x_min > 0.0) || !(l.x_min <= l.x_max) || !std::isfinite(l.x_max))
      throw InputError("allocation levels need 0 < x_min <= x_max < inf");
}

const PowerLevel &PowerAllocation::level(std::size_t nu) const {
  check_level(nu, levels_.size());
  return levels_[nu];
}

double PowerAllocation::interferer_peak2(std::size_t nu) const {
  check_level(nu, levels_.size());
  double peak = 0.0;
  for (std::size_t eta = nu + 1; eta < levels_.size(); ++eta)
    peak = std::max(peak, levels_[eta].x_max * levels_[eta].x_max);
  return peak;
}

double PowerAllocation::separation_ratio(std::size_t nu) const {
  const double peak = interferer_peak2(nu);
  if (peak == 0.0) return kInf;
  return levels_[nu].x_min * levels_[nu].x_min / peak;
}

bool PowerAllocation::nested() const {
  for (std::size_t nu = 0; nu + 1 < levels_.size(); ++nu)
    if (!(levels_[nu].x_min > levels_[nu + 1].x_max)) return false;
  return true;
}

double min_valid_snr(std::size_t kappa) {
  if (kappa < 1) throw InputError("chain length must be at least 1");
  if (kappa == 1) return std::numbers::e;
  const double k = static_cast<double>(kappa) * static_cast<double>(kappa + 1);
  return std::exp(special::upper_root_exp_linear(k));
}

PowerAllocation allocation(double snr, std::size_t kappa) {
  const double threshold = min_valid_snr(kappa);
  if (!(snr >= threshold) || !std::isfinite(snr)) throw InfeasibleAllocation(snr, threshold);
  const double log_e = std::log(snr);
  std::vector<PowerLevel> levels(kappa);
  for (std::size_t i = 0; i < kappa; ++i) {
    const double nu = static_cast<double>(i + 1);
    levels[i].x_max = std::exp(log_e / nu);
    levels[i].x_min = std::exp(log_e / (nu + 1.0)) * log_e;
    if (!(levels[i].x_min < levels[i].x_max)) throw InfeasibleAllocation(snr, threshold);
  }
  return PowerAllocation(snr, std::move(levels));
}

double effective_noise_variance(std::size_t nu, const PowerAllocation &alloc, double frob2) {
  check_level(nu, alloc.kappa());
  if (!(frob2 > 0.0)) throw InputError("E||H||_F^2 must be positive");
  const double later = static_cast<double>(alloc.kappa() - nu - 1);
  return 1.0 + frob2 * later * alloc.interferer_peak2(nu);
}

double lemma5_lower_bound(double x_min, double x_max, double sigma_h, double sigma_w,
                          double e_log_h2) {
  if (!(x_min > 0.0) || !(x_min < x_max))
    throw InputError("log-uniform law needs 0 < x_min < x_max");
  if (!(sigma_h > 0.0)) throw InputError("sigma_h must be positive");
  if (!(sigma_w >= 0.0)) throw InputError("sigma_w must be non-negative");
  const double h_log = std::log(2.0 * std::log(x_max / x_min));
  const double spread = sigma_h + sigma_w / x_min;
  return h_log + std::log(std::numbers::pi) + e_log_h2 -
         std::log(std::numbers::pi * std::numbers::e * spread * spread);
}

double interference_penalty(std::size_t nu, const PowerAllocation &alloc, double frob2,
                            double eps2) {
  check_level(nu, alloc.kappa());
  if (!(eps2 > 0.0)) throw InputError("conditional variance eps2 must be positive");
  const double x_min = alloc.level(nu).x_min;
  const double later = static_cast<double>(alloc.kappa() - nu - 1);
  return std::log1p(frob2 * later * alloc.interferer_peak2(nu) / (1.0 + eps2 * x_min * x_min));
}

LowerBound scheme_rate_lower_bound(const FadingModel &model, const PowerChain &chain,
                                   double snr) {
  const Topology &topo = model.topology();
  const std::size_t kappa = chain.length();
  if (kappa == 0 || chain.witnesses.size() != kappa)
    throw InputError("chain needs one witness per transmitter");
  if (!is_power_chain(topo, chain.transmitters)) throw InputError("not a power chain");
  for (std::size_t nu = 0; nu < kappa; ++nu) {
    const auto r = chain.witnesses[nu];
    if (r >= topo.n_rx() || !topo.hears(r, chain.transmitters[nu]))
      throw InputError("witness does not hear its transmitter");
    for (std::size_t eta = 0; eta < nu; ++eta)
      if (topo.hears(r, chain.transmitters[eta]))
        throw InputError("witness hears an earlier chain member");
  }

  const PowerAllocation alloc = allocation(snr, kappa);
  const double frob2 = model.frobenius2();
  LowerBound out;
  for (std::size_t nu = 0; nu < kappa; ++nu) {
    LevelTerm term;
    term.transmitter = chain.transmitters[nu];
    term.witness = chain.witnesses[nu];
    const Link link{term.witness, term.transmitter};
    term.x_min = alloc.level(nu).x_min;
    term.x_max = alloc.level(nu).x_max;
    term.sigma_h = std::sqrt(model.variance(link));
    term.e_log_h2 = log_h_squared_mean(model.mean(link), model.variance(link)).value;
    term.noise_variance = effective_noise_variance(nu, alloc, frob2);
    term.level_bound = lemma5_lower_bound(term.x_min, term.x_max, term.sigma_h,
                                     std::sqrt(term.noise_variance), term.e_log_h2);

    std::vector<Link> interferers;
    for (std::size_t eta = nu + 1; eta < kappa; ++eta)
      if (topo.hears(term.witness, chain.transmitters[eta]))
        interferers.push_back({term.witness, chain.transmitters[eta]});
    const Link target[] = {link};
    term.eps2 = conditional_covariance(model, target, interferers)(0, 0).real();
    term.penalty = interference_penalty(nu, alloc, frob2, term.eps2);

    out.total += term.level_bound;
    out.single_user += term.level_bound - term.penalty;
    out.levels.push_back(term);
  }
  return out;
}

SupTerm sup_term(double frob2, std::size_t n_rx, std::size_t n_tx, double h_cond, double rho_lo,
                 double rho_hi, double tol) {
  if (!(frob2 > 0.0) || n_rx == 0 || n_tx == 0)
    throw InputError("sup-term needs frob2 > 0 and a non-empty block");
  if (!(rho_lo > 0.0) || !(rho_lo < rho_hi)) throw InputError("bad sup-term bracket");
  const double n = static_cast<double>(n_rx);
  const double log_gain = std::log(frob2 * static_cast<double>(n_tx));
  const double floor_entropy = n * std::log(std::numbers::pi * std::numbers::e);
  auto f = [&](double s) {
    return n * log_add(log_gain + s, std::log(n)) - std::max(floor_entropy, n * s + h_cond);
  };

  const double lo0 = std::log(rho_lo), hi0 = std::log(rho_hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo0, b = hi0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  int it = 0;
  const double width = tol / std::max(n, 1.0);
  while (b - a > width && it < 500) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++it;
  }
  const double s = 0.5 * (a + b);
  if (s - lo0 < 4.0 * width || hi0 - s < 4.0 * width) {
    std::ostringstream msg;
    msg << "sup-term maximizer at bracket end: rho in [" << rho_lo << ", " << rho_hi
        << "], found log rho = " << s << " after " << it << " iterations";
    throw NumericalError(msg.str());
  }
  return SupTerm{f(s), std::exp(s), h_cond, it};
}

BlockBound block_upper_bound(const FadingModel &model, const Block &block, double snr) {
  if (!(snr >= 0.0) || !std::isfinite(snr)) throw InputError("SNR must be finite and >= 0");
  const BlockParts parts = block_parts(model, block);
  BlockBound out;
  out.value = block_value(parts, snr, &out.alpha);
  out.constant = parts.constant;
  out.sup = parts.sup;
  out.frob2 = parts.frob2;
  return out;
}

double duality_upper_bound(const FadingModel &model, double snr,
                           std::optional<std::size_t> dominant) {
  const Topology &topo = model.topology();
  Block block;
  block.receivers.resize(topo.n_rx());
  std::iota(block.receivers.begin(), block.receivers.end(), std::size_t{0});
  block.transmitters.resize(topo.n_tx());
  std::iota(block.transmitters.begin(), block.transmitters.end(), std::size_t{0});
  if (dominant) {
    block.dominant = *dominant;
  } else {
    std::size_t t = 0;
    while (t < topo.n_tx() && topo.hearers(t).size() != topo.n_rx()) ++t;
    if (t == topo.n_tx()) throw InputError("no transmitter is heard by every receiver");
    block.dominant = t;
  }
  return block_upper_bound(model, block, snr).value;
}

ConverseEnvelope converse_envelope(const FadingModel &model, double snr) {
  if (!(snr >= 0.0) || !std::isfinite(snr)) throw InputError("SNR must be finite and >= 0");
  const Topology &topo = model.topology();
  if (!topo.is_pruned()) throw InputError("converse envelope needs a pruned topology");

  ConverseEnvelope out;
  out.kappa_star = longest_chain(topo).kappa;
  Permutation identity(topo.n_tx());
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  const ChainDecomposition dec = decompose(topo, identity);

  // SNR grid 10^-2 .. 10^40 in quarter decades, plus E = 0.
  std::vector<double> grid{0.0};
  for (int k = -8; k <= 160; ++k) grid.push_back(std::pow(10.0, k / 4.0));

  const std::size_t kappa = dec.length();
  for (std::size_t nu = 0; nu < kappa; ++nu) {
    PhaseConstant phase;
    phase.block.receivers = dec.receiver_blocks[nu];
    for (std::size_t eta = nu; eta < kappa; ++eta)
      phase.block.transmitters.insert(phase.block.transmitters.end(),
                                      dec.transmitter_blocks[eta].begin(),
                                      dec.transmitter_blocks[eta].end());
    std::sort(phase.block.transmitters.begin(), phase.block.transmitters.end());
    phase.block.dominant = dec.chain.transmitters[nu];

    const BlockParts parts = block_parts(model, phase.block);
    double c = parts.constant + 1.0; // value approached as E -> inf
    for (double e : grid) c = std::max(c, block_value(parts, e) - std::log1p(std::log1p(e)));
    phase.constant = c;

    std::vector<Link> here, later;
    for (auto t : phase.block.transmitters) {
      for (auto r : phase.block.receivers)
        if (topo.hears(r, t)) here.push_back({r, t});
      for (std::size_t eta = nu + 1; eta < kappa; ++eta)
        for (auto r : dec.receiver_blocks[eta])
          if (topo.hears(r, t)) later.push_back({r, t});
    }
    std::sort(here.begin(), here.end());
    std::sort(later.begin(), later.end());
    phase.cross_information = block_mutual_information(model, here, later);
    out.constant += phase.constant + phase.cross_information;
    out.phases.push_back(std::move(phase));
  }
  out.log_factorial = special::log_gamma(static_cast<double>(topo.n_tx()) + 1.0);
  out.constant += out.log_factorial;
  out.value = static_cast<double>(out.kappa_star) * std::log1p(std::log1p(snr)) + out.constant;
  return out;
}

BoundReport bound_report(const FadingModel &model, double snr) {
  if (!(snr > 1.0) || !std::isfinite(snr)) throw InputError("SNR must be finite and > 1");
  const Topology &topo = model.topology();
  if (!topo.is_pruned()) throw InputError("bounds need a pruned topology");

  BoundReport rep;
  rep.snr = snr;
  const LongestChain lc = longest_chain(topo);
  rep.kappa_star = lc.kappa;
  rep.loglog_term = static_cast<double>(lc.kappa) * std::log(std::log(snr));
  try {
    LowerBound lb = scheme_rate_lower_bound(model, lc.chain, snr);
    rep.feasible = true;
    rep.lower_bound = lb.total;
    rep.single_user_lower = lb.single_user;
    rep.levels = std::move(lb.levels);
  } catch (const InfeasibleAllocation &e) {
    rep.feasible = false;
    rep.note = e.what();
  }
  rep.converse = converse_envelope(model, snr);
  rep.upper_bound = rep.converse.value;
  return rep;
}

namespace {

nlohmann::ordered_json one_based(const IndexSet &s) {
  auto arr = nlohmann::ordered_json::array();
  for (auto i : s) arr.push_back(i + 1);
  return arr;
}

nlohmann::ordered_json optional_number(const std::optional<double> &v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

} // namespace

nlohmann::ordered_json to_json(const BoundReport &report) {
  nlohmann::ordered_json j;
  j["snr"] = report.snr;
  j["kappa_star"] = report.kappa_star;
  j["loglog"] = report.loglog_term;
  j["feasible"] = report.feasible;
  j["lower"] = optional_number(report.lower_bound);
  j["single_user_lower"] = optional_number(report.single_user_lower);
  j["upper"] = report.upper_bound;
  auto levels = nlohmann::ordered_json::array();
  for (const auto &t : report.levels) {
    nlohmann::ordered_json l;
    l["transmitter"] = t.transmitter + 1;
    l["witness"] = t.witness + 1;
    l["x_min"] = t.x_min;
    l["x_max"] = t.x_max;
    l["sigma_h"] = t.sigma_h;
    l["e_log_h2"] = t.e_log_h2;
    l["noise_variance"] = t.noise_variance;
    l["eps2"] = t.eps2;
    l["level_bound"] = t.level_bound;
    l["penalty"] = t.penalty;
    levels.push_back(std::move(l));
  }
  j["levels"] = std::move(levels);
  nlohmann::ordered_json conv;
  conv["value"] = report.converse.value;
  conv["constant"] = report.converse.constant;
  conv["log_factorial"] = report.converse.log_factorial;
  auto phases = nlohmann::ordered_json::array();
  for (const auto &p : report.converse.phases) {
    nlohmann::ordered_json ph;
    ph["receivers"] = one_based(p.block.receivers);
    ph["transmitters"] = one_based(p.block.transmitters);
    ph["dominant"] = p.block.dominant + 1;
    ph["constant"] = p.constant;
    ph["cross_information"] = p.cross_information;
    phases.push_back(std::move(ph));
  }
  conv["phases"] = std::move(phases);
  j["converse"] = std::move(conv);
  if (!report.note.empty()) j["note"] = report.note;
  return j;
}

} // namespace ncnet
