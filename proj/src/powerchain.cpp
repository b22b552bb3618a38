// SPDX-License-Identifier: Apache-2.0
#include "ncnet/powerchain.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>

#include "ncnet/error.hpp"

namespace ncnet {
namespace {

void check_tuple(const Topology &topo, std::span<const std::size_t> tuple) {
  std::vector<bool> seen(topo.n_tx(), false);
  for (auto t : tuple) {
    if (t >= topo.n_tx()) throw InputError("transmitter " + std::to_string(t + 1) + " out of range");
    if (seen[t]) throw InputError("transmitter " + std::to_string(t + 1) + " repeated in chain");
    seen[t] = true;
  }
}

std::vector<std::vector<bool>> hearing_table(const Topology &topo) {
  std::vector<std::vector<bool>> h(topo.n_tx(), std::vector<bool>(topo.n_rx(), false));
  for (std::size_t t = 0; t < topo.n_tx(); ++t)
    for (auto r : topo.hearers(t)) h[t][r] = true;
  return h;
}

} // namespace

Permutation order_permutation(std::span<const std::complex<double>> x) {
  Permutation perm(x.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });
  return perm;
}

bool is_permutation_of(const Permutation &perm, std::size_t n) {
  if (perm.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto p : perm) {
    if (p >= n || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

bool is_power_chain(const Topology &topo, std::span<const std::size_t> tuple) {
  check_tuple(topo, tuple);
  const auto hear = hearing_table(topo);
  std::vector<bool> covered(topo.n_rx(), false);
  for (auto t : tuple) {
    bool fresh = false;
    for (std::size_t r = 0; r < topo.n_rx(); ++r) fresh = fresh || (hear[t][r] && !covered[r]);
    if (!fresh) return false;
    for (std::size_t r = 0; r < topo.n_rx(); ++r) covered[r] = covered[r] || hear[t][r];
  }
  return true;
}

PowerChain with_witnesses(const Topology &topo, std::span<const std::size_t> tuple) {
  if (!is_power_chain(topo, tuple)) throw InputError("tuple is not a power chain");
  const auto hear = hearing_table(topo);
  std::vector<bool> covered(topo.n_rx(), false);
  PowerChain chain;
  for (auto t : tuple) {
    std::size_t w = 0;
    while (!(hear[t][w] && !covered[w])) ++w;
    chain.transmitters.push_back(t);
    chain.witnesses.push_back(w);
    for (std::size_t r = 0; r < topo.n_rx(); ++r) covered[r] = covered[r] || hear[t][r];
  }
  return chain;
}

LongestChain longest_chain(const Topology &topo, std::size_t receiver_guard) {
  if (topo.empty()) throw InputError("longest_chain on an empty topology");
  if (receiver_guard > kMaxReceiverGuard)
    throw SizeGuardError("receiver guard above " + std::to_string(kMaxReceiverGuard));
  if (topo.n_rx() > receiver_guard)
    throw SizeGuardError(std::to_string(topo.n_rx()) + " receivers exceed the guard of " +
                         std::to_string(receiver_guard));

  std::vector<std::uint32_t> reach(topo.n_tx());
  for (std::size_t t = 0; t < topo.n_tx(); ++t)
    reach[t] = static_cast<std::uint32_t>(topo.hearer_mask(t));

  // best[covered]: longest extension from a state where `covered` receivers are reached.
  std::vector<std::int8_t> best(std::size_t{1} << topo.n_rx(), -1);
  auto solve = [&](auto &&self, std::uint32_t covered) -> int {
    auto &slot = best[covered];
    if (slot >= 0) return slot;
    int v = 0;
    for (auto m : reach)
      if (m & ~covered) v = std::max(v, 1 + self(self, covered | m));
    slot = static_cast<std::int8_t>(v);
    return v;
  };

  LongestChain out;
  out.kappa = static_cast<std::size_t>(solve(solve, 0));
  std::uint32_t covered = 0;
  std::vector<std::size_t> tuple;
  for (std::size_t left = out.kappa; left > 0; --left) {
    for (std::size_t t = 0; t < topo.n_tx(); ++t) {
      if ((reach[t] & ~covered) && 1 + solve(solve, covered | reach[t]) == static_cast<int>(left)) {
        tuple.push_back(t);
        covered |= reach[t];
        break;
      }
    }
  }
  out.chain = with_witnesses(topo, tuple);
  return out;
}

std::size_t brute_force_kappa(const Topology &topo) {
  if (topo.n_tx() > kBruteForceTxGuard)
    throw SizeGuardError("brute force limited to " + std::to_string(kBruteForceTxGuard) + " transmitters");
  const std::size_t max_len = std::min(topo.n_tx(), topo.n_rx());
  std::size_t best = 0;
  std::vector<std::size_t> tuple;
  std::vector<bool> used(topo.n_tx(), false);
  // Enumerates every ordered tuple of distinct transmitters and keeps the
  // valid ones; no pruning on the chain property.
  auto rec = [&](auto &&self) -> void {
    if (!tuple.empty() && is_power_chain(topo, tuple)) best = std::max(best, tuple.size());
    if (tuple.size() == max_len) return;
    for (std::size_t t = 0; t < topo.n_tx(); ++t) {
      if (used[t]) continue;
      used[t] = true;
      tuple.push_back(t);
      self(self);
      tuple.pop_back();
      used[t] = false;
    }
  };
  rec(rec);
  return best;
}

ChainDecomposition decompose(const Topology &topo, const Permutation &perm) {
  if (!is_permutation_of(perm, topo.n_tx())) throw InputError("invalid permutation");
  if (!topo.is_pruned()) throw InputError("decompose requires a pruned topology");
  const auto hear = hearing_table(topo);
  const std::size_t n = perm.size();

  ChainDecomposition dec;
  dec.permutation = perm;
  std::vector<bool> covered(topo.n_rx(), false);
  auto add_member = [&](std::size_t pos) {
    const auto t = perm[pos];
    IndexSet block;
    for (std::size_t r = 0; r < topo.n_rx(); ++r)
      if (hear[t][r] && !covered[r]) block.push_back(r);
    for (auto r : block) covered[r] = true;
    dec.positions.push_back(pos);
    dec.chain.transmitters.push_back(t);
    dec.chain.witnesses.push_back(block.front());
    dec.receiver_blocks.push_back(std::move(block));
  };

  add_member(0);
  for (std::size_t pos = 1; pos < n; ++pos) {
    const auto t = perm[pos];
    bool fresh = false;
    for (std::size_t r = 0; r < topo.n_rx() && !fresh; ++r) fresh = hear[t][r] && !covered[r];
    if (fresh) add_member(pos);
  }

  for (std::size_t v = 0; v < dec.positions.size(); ++v) {
    const auto end = v + 1 < dec.positions.size() ? dec.positions[v + 1] : n;
    IndexSet block(perm.begin() + static_cast<std::ptrdiff_t>(dec.positions[v]),
                   perm.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(block.begin(), block.end());
    dec.transmitter_blocks.push_back(std::move(block));
  }
  return dec;
}

namespace {

nlohmann::ordered_json one_based(const std::vector<std::size_t> &v) {
  auto out = nlohmann::ordered_json::array();
  for (auto x : v) out.push_back(x + 1);
  return out;
}

} // namespace

nlohmann::ordered_json to_json(const PowerChain &chain) {
  nlohmann::ordered_json j;
  j["transmitters"] = one_based(chain.transmitters);
  j["witnesses"] = one_based(chain.witnesses);
  return j;
}

nlohmann::ordered_json to_json(const ChainDecomposition &dec) {
  nlohmann::ordered_json j;
  j["permutation"] = one_based(dec.permutation);
  j["j"] = one_based(dec.positions);
  j["kappa"] = dec.length();
  j["chain"] = to_json(dec.chain);
  auto blocks = [](const std::vector<IndexSet> &bs) {
    auto out = nlohmann::ordered_json::array();
    for (const auto &b : bs) out.push_back(one_based(b));
    return out;
  };
  j["receiver_blocks"] = blocks(dec.receiver_blocks);
  j["transmitter_blocks"] = blocks(dec.transmitter_blocks);
  return j;
}

} // namespace ncnet
