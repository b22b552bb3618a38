// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncnet/topology.hpp"

namespace ncnet {

using Permutation = std::vector<std::size_t>; // 0-based image of positions 0..n-1

/// Ordered transmitters t_1..t_k, each reaching a witness receiver r_v that
/// hears t_v but none of t_1..t_{v-1}.
struct PowerChain {
  std::vector<std::size_t> transmitters;
  std::vector<std::size_t> witnesses;

  std::size_t length() const noexcept { return transmitters.size(); }
  friend bool operator==(const PowerChain &, const PowerChain &) = default;
};

/// Chain extracted from one ordering permutation, with the receiver blocks
/// B_v (receivers first reached by t_v) and transmitter blocks A_v
/// (t_v together with the weaker transmitters skipped before t_{v+1}).
struct ChainDecomposition {
  Permutation permutation;
  std::vector<std::size_t> positions; // j_v, 0-based positions in `permutation`
  PowerChain chain;
  std::vector<IndexSet> receiver_blocks;
  std::vector<IndexSet> transmitter_blocks;

  std::size_t length() const noexcept { return chain.length(); }
};

inline constexpr std::size_t kDefaultReceiverGuard = 24;
inline constexpr std::size_t kMaxReceiverGuard = 28;
inline constexpr std::size_t kBruteForceTxGuard = 7;

// Sorts transmitters by decreasing |x|, ties by ascending index.
Permutation order_permutation(std::span<const std::complex<double>> x);

bool is_permutation_of(const Permutation &perm, std::size_t n);

// Checks the chain property of an ordered tuple of distinct transmitters.
bool is_power_chain(const Topology &topo, std::span<const std::size_t> tuple);

// Smallest-index receiver of R_{t_v} minus the hearers of earlier members.
// Throws InputError if `tuple` is not a power chain.
PowerChain with_witnesses(const Topology &topo, std::span<const std::size_t> tuple);

struct LongestChain {
  std::size_t kappa = 0;
  PowerChain chain;
};

// Exact kappa* by dynamic programming over the set of already-reached
// receivers. `receiver_guard` bounds n_rx (2^n_rx memo entries).
LongestChain longest_chain(const Topology &topo,
                           std::size_t receiver_guard = kDefaultReceiverGuard);

// Exhaustive enumeration of ordered tuples; test oracle for longest_chain.
std::size_t brute_force_kappa(const Topology &topo);

ChainDecomposition decompose(const Topology &topo, const Permutation &perm);

nlohmann::ordered_json to_json(const PowerChain &chain);
nlohmann::ordered_json to_json(const ChainDecomposition &dec);

} // namespace ncnet
