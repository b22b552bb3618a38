#include <doctest.h>

#include <algorithm>
#include <set>

#include "ncnet/error.hpp"
#include "ncnet/rng.hpp"
#include "ncnet/topology.hpp"

using namespace ncnet;

namespace {

IndexSet set_of(std::initializer_list<std::size_t> v) { return IndexSet(v); }

// Hearing relation rebuilt from the zero set alone.
bool hears_by_zeros(const Topology &t, std::size_t r, std::size_t tx) {
  return t.zeros().count(Link{r, tx}) == 0;
}

} // namespace

TEST_CASE("hearers and heard on standard generators") {
  const auto full = make_full(2, 3);
  CHECK(full.hearers(0) == set_of({0, 1, 2}));
  CHECK(full.heard(0) == set_of({0, 1}));

  const auto diag = make_diagonal(3);
  CHECK(diag.hearers(1) == set_of({1}));
  CHECK(diag.heard(2) == set_of({2}));

  const auto wl = make_wyner_linear(3);
  CHECK(wl.hearers(1) == set_of({1, 2}));
  CHECK(wl.heard(1) == set_of({0, 1}));

  CHECK_THROWS_AS(diag.hearers(3), InputError);
  CHECK_THROWS_AS(diag.heard(3), InputError);
}

TEST_CASE("generators produce the documented zero patterns") {
  CHECK(make_full(2, 3).zeros().empty());
  CHECK(make_diagonal(3).zeros().size() == 6);

  const auto wl = make_wyner_linear(3);
  CHECK(wl.n_tx() == 3);
  CHECK(wl.n_rx() == 4);
  std::set<Link> hearing;
  for (const auto &l : wl.nonzero_links()) hearing.insert(l);
  const std::set<Link> expected{{0, 0}, {1, 0}, {1, 1}, {2, 1}, {2, 2}, {3, 2}};
  CHECK(hearing == expected);

  const auto wc = make_wyner_cyclic(4);
  for (std::size_t t = 0; t < 4; ++t) CHECK(wc.hearers(t) == [&] {
    IndexSet s{t, (t + 1) % 4};
    std::sort(s.begin(), s.end());
    return s;
  }());

  CHECK_THROWS_AS(make_diagonal(0), InputError);
  CHECK_THROWS_AS(make_random(3, 3, 1.5, 1), InputError);
  CHECK_THROWS_AS(make_random(3, 3, -0.1, 1), InputError);
}

TEST_CASE("generator specs") {
  CHECK(generate("full:3,2") == make_full(3, 2));
  CHECK(generate("diagonal:4") == make_diagonal(4));
  CHECK(generate("wyner_linear:2") == make_wyner_linear(2));
  CHECK(generate("wyner_cyclic:5") == make_wyner_cyclic(5));
  CHECK(generate("random:5,4,0.3,9") == make_random(5, 4, 0.3, 9));
  const std::uint64_t seed = 9;
  CHECK(generate("random:5,4,0.3", &seed) == make_random(5, 4, 0.3, 9));
  CHECK_THROWS_AS(generate("random:5,4,0.3"), InputError);
  CHECK_THROWS_AS(generate("diagonal"), InputError);
  CHECK_THROWS_AS(generate("ring:3"), InputError);
  CHECK_THROWS_AS(generate("full:2"), InputError);
  CHECK_THROWS_AS(generate("diagonal:x"), InputError);
}

TEST_CASE("random generator is deterministic in its seed") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    CHECK(make_random(6, 5, 0.5, s) == make_random(6, 5, 0.5, s));
  }
  CHECK_FALSE(make_random(8, 8, 0.5, 1) == make_random(8, 8, 0.5, 2));
}

TEST_CASE("out-of-range zeros are rejected") {
  CHECK_THROWS_AS(Topology(2, 2, {{2, 0}}), InputError);
  CHECK_THROWS_AS(Topology(2, 2, {{0, 2}}), InputError);
}

TEST_CASE("prune removes silent transmitters and deaf receivers") {
  SUBCASE("all-zero column") {
    const Topology t(3, 2, {{0, 1}, {1, 1}});
    const auto res = prune(t);
    CHECK(res.removed_tx == set_of({1}));
    CHECK(res.removed_rx.empty());
    CHECK(res.kept_tx == set_of({0, 2}));
    CHECK(res.topology == make_full(2, 2));
  }
  SUBCASE("all-zero row") {
    const Topology t(2, 3, {{2, 0}, {2, 1}});
    const auto res = prune(t);
    CHECK(res.removed_rx == set_of({2}));
    CHECK(res.removed_tx.empty());
    CHECK(res.topology == make_full(2, 2));
  }
  SUBCASE("fixed point") {
    const auto res = prune(make_full(2, 2));
    CHECK(res.removed_tx.empty());
    CHECK(res.removed_rx.empty());
    CHECK(res.topology == make_full(2, 2));
    CHECK_FALSE(res.degenerate);
  }
  SUBCASE("everything removed") {
    const Topology t(1, 1, {{0, 0}});
    const auto res = prune(t);
    CHECK(res.degenerate);
    CHECK(res.topology.empty());
  }
  SUBCASE("compaction keeps the zero pattern of survivors") {
    // Transmitter 0 silent; receiver 1 hears only transmitter 0.
    const Topology t(3, 3, {{0, 0}, {1, 0}, {2, 0}, {1, 1}, {1, 2}, {0, 2}});
    const auto res = prune(t);
    CHECK(res.removed_tx == set_of({0}));
    CHECK(res.removed_rx == set_of({1}));
    const Topology expected(2, 2, {{0, 1}});
    CHECK(res.topology == expected);
  }
}

TEST_CASE("property: pruning, duality and hearing sets on random topologies") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const std::size_t nt = 1 + seed % 6, nr = 1 + (seed / 6) % 6;
    const double p = 0.1 * static_cast<double>(seed % 9);
    std::set<Link> z;
    Rng rng(seed);
    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t t = 0; t < nt; ++t)
        if (uniform01(rng) < p) z.insert({r, t});
    const Topology raw(nt, nr, z);

    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t t = 0; t < nt; ++t) {
        const auto h = raw.hearers(t);
        const auto d = raw.heard(r);
        const bool in_h = std::binary_search(h.begin(), h.end(), r);
        const bool in_d = std::binary_search(d.begin(), d.end(), t);
        REQUIRE(in_h == in_d);
        REQUIRE(in_h == hears_by_zeros(raw, r, t));
      }

    const auto once = prune(raw);
    const auto twice = prune(once.topology);
    REQUIRE(twice.topology == once.topology);
    REQUIRE(twice.removed_tx.empty());
    REQUIRE(twice.removed_rx.empty());
    if (!once.degenerate) {
      REQUIRE(once.topology.is_pruned());
      for (std::size_t t = 0; t < once.topology.n_tx(); ++t)
        REQUIRE_FALSE(once.topology.hearers(t).empty());
      for (std::size_t r = 0; r < once.topology.n_rx(); ++r)
        REQUIRE_FALSE(once.topology.heard(r).empty());
    }
  }
}

TEST_CASE("JSON documents are 1-based and validated") {
  const Topology t(3, 2, {{0, 2}, {1, 0}});
  const auto doc = to_json(t);
  CHECK(doc.dump() == R"({"n_t":3,"n_r":2,"zeros":[[1,3],[2,1]]})");
  CHECK(topology_from_json(nlohmann::json::parse(doc.dump())) == t);

  CHECK_THROWS_AS(topology_from_json(nlohmann::json::parse(R"({"n_t":2,"n_r":2,"zeros":[[1,1],[1,1]]})")),
                  InputError);
  CHECK_THROWS_AS(topology_from_json(nlohmann::json::parse(R"({"n_t":2,"n_r":2,"zeros":[[3,1]]})")),
                  InputError);
  CHECK_THROWS_AS(topology_from_json(nlohmann::json::parse(R"({"n_t":2,"n_r":2,"zeros":[[0,1]]})")),
                  InputError);
  CHECK_THROWS_AS(topology_from_json(nlohmann::json::parse(R"({"n_r":2})")), InputError);
  CHECK_THROWS_AS(load_topology("/nonexistent/topology.json"), InputError);
}
