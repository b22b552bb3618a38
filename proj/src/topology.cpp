// SPDX-License-Identifier: Apache-2.0
#include "ncnet/topology.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ncnet/error.hpp"
#include "ncnet/rng.hpp"

namespace ncnet {

Topology::Topology(std::size_t n_tx, std::size_t n_rx, std::set<Link> zeros)
    : n_tx_(n_tx), n_rx_(n_rx), zeros_(std::move(zeros)), hear_(n_tx * n_rx, 1) {
  for (const auto &z : zeros_) {
    if (z.rx >= n_rx_ || z.tx >= n_tx_)
      throw InputError("zero link (" + std::to_string(z.rx + 1) + "," +
                       std::to_string(z.tx + 1) + ") outside " + std::to_string(n_rx_) +
                       " x " + std::to_string(n_tx_) + " fading matrix");
    hear_[z.rx * n_tx_ + z.tx] = 0;
  }
}

bool Topology::hears(std::size_t rx, std::size_t tx) const {
  if (rx >= n_rx_ || tx >= n_tx_) throw InputError("link index out of range");
  return hear_[rx * n_tx_ + tx] != 0;
}

IndexSet Topology::hearers(std::size_t tx) const {
  if (tx >= n_tx_) throw InputError("transmitter index " + std::to_string(tx + 1) + " out of range");
  IndexSet out;
  for (std::size_t r = 0; r < n_rx_; ++r)
    if (hear_[r * n_tx_ + tx]) out.push_back(r);
  return out;
}

IndexSet Topology::heard(std::size_t rx) const {
  if (rx >= n_rx_) throw InputError("receiver index " + std::to_string(rx + 1) + " out of range");
  IndexSet out;
  for (std::size_t t = 0; t < n_tx_; ++t)
    if (hear_[rx * n_tx_ + t]) out.push_back(t);
  return out;
}

std::uint64_t Topology::hearer_mask(std::size_t tx) const {
  if (n_rx_ > 64) throw SizeGuardError("hearer_mask requires at most 64 receivers");
  if (tx >= n_tx_) throw InputError("transmitter index out of range");
  std::uint64_t m = 0;
  for (std::size_t r = 0; r < n_rx_; ++r)
    if (hear_[r * n_tx_ + tx]) m |= std::uint64_t{1} << r;
  return m;
}

std::vector<Link> Topology::nonzero_links() const {
  std::vector<Link> out;
  for (std::size_t r = 0; r < n_rx_; ++r)
    for (std::size_t t = 0; t < n_tx_; ++t)
      if (hear_[r * n_tx_ + t]) out.push_back({r, t});
  return out;
}

bool Topology::is_pruned() const {
  for (std::size_t t = 0; t < n_tx_; ++t)
    if (hearers(t).empty()) return false;
  for (std::size_t r = 0; r < n_rx_; ++r)
    if (heard(r).empty()) return false;
  return true;
}

PruneResult prune(const Topology &topo) {
  std::vector<bool> keep_tx(topo.n_tx(), true), keep_rx(topo.n_rx(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < topo.n_rx(); ++r) {
      if (!keep_rx[r]) continue;
      bool any = false;
      for (std::size_t t = 0; t < topo.n_tx() && !any; ++t) any = keep_tx[t] && topo.hears(r, t);
      if (!any) keep_rx[r] = false, changed = true;
    }
    for (std::size_t t = 0; t < topo.n_tx(); ++t) {
      if (!keep_tx[t]) continue;
      bool any = false;
      for (std::size_t r = 0; r < topo.n_rx() && !any; ++r) any = keep_rx[r] && topo.hears(r, t);
      if (!any) keep_tx[t] = false, changed = true;
    }
  }

  PruneResult res;
  std::vector<std::size_t> new_tx(topo.n_tx()), new_rx(topo.n_rx());
  for (std::size_t t = 0; t < topo.n_tx(); ++t) {
    if (keep_tx[t]) new_tx[t] = res.kept_tx.size(), res.kept_tx.push_back(t);
    else res.removed_tx.push_back(t);
  }
  for (std::size_t r = 0; r < topo.n_rx(); ++r) {
    if (keep_rx[r]) new_rx[r] = res.kept_rx.size(), res.kept_rx.push_back(r);
    else res.removed_rx.push_back(r);
  }
  std::set<Link> zeros;
  for (const auto &z : topo.zeros())
    if (keep_rx[z.rx] && keep_tx[z.tx]) zeros.insert({new_rx[z.rx], new_tx[z.tx]});
  res.topology = Topology(res.kept_tx.size(), res.kept_rx.size(), std::move(zeros));
  res.degenerate = res.topology.empty();
  if (res.degenerate) res.topology = Topology{};
  return res;
}

Topology make_full(std::size_t n_tx, std::size_t n_rx) {
  if (n_tx < 1 || n_rx < 1) throw InputError("full topology needs n >= 1");
  return Topology(n_tx, n_rx);
}

Topology make_diagonal(std::size_t n) {
  if (n < 1) throw InputError("diagonal topology needs n >= 1");
  std::set<Link> z;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t t = 0; t < n; ++t)
      if (r != t) z.insert({r, t});
  return Topology(n, n, std::move(z));
}

Topology make_wyner_linear(std::size_t n) {
  if (n < 1) throw InputError("wyner_linear topology needs n >= 1");
  std::set<Link> z;
  for (std::size_t r = 0; r < n + 1; ++r)
    for (std::size_t t = 0; t < n; ++t)
      if (r != t && r != t + 1) z.insert({r, t});
  return Topology(n, n + 1, std::move(z));
}

Topology make_wyner_cyclic(std::size_t n) {
  if (n < 1) throw InputError("wyner_cyclic topology needs n >= 1");
  std::set<Link> z;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t t = 0; t < n; ++t)
      if (r != t && r != (t + 1) % n) z.insert({r, t});
  return Topology(n, n, std::move(z));
}

Topology make_random(std::size_t n_tx, std::size_t n_rx, double p, std::uint64_t seed) {
  if (n_tx < 1 || n_rx < 1) throw InputError("random topology needs n >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("random topology needs p in [0, 1]");
  Rng rng(derive_seed(seed, {0x746f706fULL, n_tx, n_rx, seed_key(p)}));
  std::set<Link> z;
  for (std::size_t r = 0; r < n_rx; ++r)
    for (std::size_t t = 0; t < n_tx; ++t)
      if (uniform01(rng) < p) z.insert({r, t});
  return prune(Topology(n_tx, n_rx, std::move(z))).topology;
}

namespace {

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::size_t parse_count(const std::string &s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw InputError("bad integer '" + s + "'");
  return v;
}

} // namespace

Topology generate(const std::string &spec, const std::uint64_t *fallback_seed) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InputError("generator spec '" + spec + "' lacks ':'");
  const std::string kind = spec.substr(0, colon);
  const auto args = split(spec.substr(colon + 1), ',');
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw InputError("generator '" + kind + "' got " + std::to_string(args.size()) + " arguments");
  };
  if (kind == "full") {
    need(2, 2);
    return make_full(parse_count(args[0]), parse_count(args[1]));
  }
  if (kind == "diagonal") {
    need(1, 1);
    return make_diagonal(parse_count(args[0]));
  }
  if (kind == "wyner_linear") {
    need(1, 1);
    return make_wyner_linear(parse_count(args[0]));
  }
  if (kind == "wyner_cyclic") {
    need(1, 1);
    return make_wyner_cyclic(parse_count(args[0]));
  }
  if (kind == "random") {
    need(3, 4);
    double p = 0.0;
    try {
      std::size_t used = 0;
      p = std::stod(args[2], &used);
      if (used != args[2].size()) throw InputError("bad probability '" + args[2] + "'");
    } catch (const std::logic_error &) {
      throw InputError("bad probability '" + args[2] + "'");
    }
    std::uint64_t seed = 0;
    if (args.size() == 4) seed = parse_count(args[3]);
    else if (fallback_seed) seed = *fallback_seed;
    else throw InputError("random topology requires a seed");
    return make_random(parse_count(args[0]), parse_count(args[1]), p, seed);
  }
  throw InputError("unknown generator '" + kind + "'");
}

nlohmann::ordered_json to_json(const Topology &topo) {
  nlohmann::ordered_json zeros = nlohmann::ordered_json::array();
  for (const auto &z : topo.zeros()) zeros.push_back({z.rx + 1, z.tx + 1});
  nlohmann::ordered_json doc;
  doc["n_t"] = topo.n_tx();
  doc["n_r"] = topo.n_rx();
  doc["zeros"] = zeros;
  return doc;
}

Topology topology_from_json(const nlohmann::json &doc) {
  try {
    const auto n_tx = doc.at("n_t").get<long long>();
    const auto n_rx = doc.at("n_r").get<long long>();
    if (n_tx < 1 || n_rx < 1) throw InputError("n_t and n_r must be positive");
    std::set<Link> zeros;
    for (const auto &pair : doc.value("zeros", nlohmann::json::array())) {
      if (!pair.is_array() || pair.size() != 2) throw InputError("zero entry must be [r, t]");
      const auto r = pair[0].get<long long>();
      const auto t = pair[1].get<long long>();
      if (r < 1 || r > n_rx || t < 1 || t > n_tx)
        throw InputError("zero entry [" + std::to_string(r) + ", " + std::to_string(t) + "] out of range");
      if (!zeros.insert({static_cast<std::size_t>(r - 1), static_cast<std::size_t>(t - 1)}).second)
        throw InputError("duplicate zero entry [" + std::to_string(r) + ", " + std::to_string(t) + "]");
    }
    return Topology(static_cast<std::size_t>(n_tx), static_cast<std::size_t>(n_rx), std::move(zeros));
  } catch (const nlohmann::json::exception &e) {
    throw InputError(std::string("malformed topology document: ") + e.what());
  }
}

Topology load_topology(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open topology file '" + path + "'");
  try {
    return topology_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error &e) {
    throw InputError(std::string("topology file is not JSON: ") + e.what());
  }
}

} // namespace ncnet
