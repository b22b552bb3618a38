// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace ncnet {

// A (receiver, transmitter) pair, 0-based.
struct Link {
  std::size_t rx = 0;
  std::size_t tx = 0;

  friend auto operator<=>(const Link &, const Link &) = default;
};

using IndexSet = std::vector<std::size_t>; // sorted ascending, no duplicates

/// Deterministic-zero pattern of an n_r x n_t fading matrix.
///
/// `zeros` lists the links whose fading entry is identically zero. The dense
/// hearing matrix derived from it is what the algorithms consult. Indices are
/// 0-based in the C++ API; JSON documents use 1-based indices.
class Topology {
public:
  Topology() = default;
  Topology(std::size_t n_tx, std::size_t n_rx, std::set<Link> zeros = {});

  std::size_t n_tx() const noexcept { return n_tx_; }
  std::size_t n_rx() const noexcept { return n_rx_; }
  bool empty() const noexcept { return n_tx_ == 0 || n_rx_ == 0; }
  const std::set<Link> &zeros() const noexcept { return zeros_; }

  bool hears(std::size_t rx, std::size_t tx) const;

  // R_t: receivers that hear transmitter `tx`.
  IndexSet hearers(std::size_t tx) const;
  // T_r: transmitters heard by receiver `rx`.
  IndexSet heard(std::size_t rx) const;

  // Bitmask of hearers(tx); requires n_rx() <= 64.
  std::uint64_t hearer_mask(std::size_t tx) const;

  // Non-zero links in (rx, tx) lexicographic order.
  std::vector<Link> nonzero_links() const;

  // Every transmitter is heard and every receiver hears someone.
  bool is_pruned() const;

  friend bool operator==(const Topology &a, const Topology &b) {
    return a.n_tx_ == b.n_tx_ && a.n_rx_ == b.n_rx_ && a.zeros_ == b.zeros_;
  }

private:
  std::size_t n_tx_ = 0;
  std::size_t n_rx_ = 0;
  std::set<Link> zeros_;
  std::vector<unsigned char> hear_; // row-major n_rx x n_tx
};

struct PruneResult {
  Topology topology;
  IndexSet removed_tx;  // original indices
  IndexSet removed_rx;  // original indices
  IndexSet kept_tx;     // kept_tx[new] = original index
  IndexSet kept_rx;
  bool degenerate = false; // everything was removed
};

// Repeatedly drops receivers that hear nobody and transmitters heard by nobody.
PruneResult prune(const Topology &topo);

// Standard generators.
Topology make_full(std::size_t n_tx, std::size_t n_rx);
Topology make_diagonal(std::size_t n);
// n transmitters, n + 1 receivers; transmitter t is heard by receivers t and t + 1.
Topology make_wyner_linear(std::size_t n);
// n transmitters, n receivers; transmitter t is heard by t and (t + 1) mod n.
Topology make_wyner_cyclic(std::size_t n);
// Each link is zero with probability p; the result is pruned (possibly empty).
Topology make_random(std::size_t n_tx, std::size_t n_rx, double p, std::uint64_t seed);

// Parses "full:3,3", "diagonal:4", "wyner_linear:3", "wyner_cyclic:4",
// "random:5,5,0.5[,seed]". A random spec without an inline seed uses
// `fallback_seed`; if that is absent too an InputError is thrown.
Topology generate(const std::string &spec, const std::uint64_t *fallback_seed = nullptr);

// {"n_t": int, "n_r": int, "zeros": [[r, t], ...]} with 1-based indices.
nlohmann::ordered_json to_json(const Topology &topo);
Topology topology_from_json(const nlohmann::json &doc);
Topology load_topology(const std::string &path);

} // namespace ncnet
