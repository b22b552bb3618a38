#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ncnet/bounds.hpp"
#include "ncnet/error.hpp"
#include "ncnet/special.hpp"

using namespace ncnet;
using doctest::Approx;

namespace {

constexpr double kGamma = 0.57721566490153286;

// log log(xM^2/xm^2) + log pi + e - log(pi e (sh + sw/xm)^2), written out directly.
double level_bound_oracle(double xm, double xM, double sh, double sw, double e) {
  return std::log(std::log(xM * xM / (xm * xm))) + std::log(std::numbers::pi) + e -
         std::log(std::numbers::pi * std::numbers::e * std::pow(sh + sw / xm, 2));
}

} // namespace

TEST_CASE("allocation threshold") {
  CHECK(min_valid_snr(1) == Approx(std::numbers::e));
  // sqrt(E) > ln E on (1, 1e4].
  for (double e = 1.0001; e <= 1e4; e *= 1.01) REQUIRE(std::sqrt(e) > std::log(e));

  // Upper root of exp(u/6) = u by an independent bisection.
  double lo = 6.0 * std::log(6.0), hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::exp(mid / 6.0) < mid ? lo : hi) = mid;
  }
  CHECK(min_valid_snr(2) == Approx(std::exp(hi)).epsilon(1e-9));
  CHECK(min_valid_snr(2) > 2.4e7);
  CHECK(min_valid_snr(2) < 2.42e7);
  CHECK(min_valid_snr(3) > min_valid_snr(2));
  CHECK_THROWS_AS(min_valid_snr(0), InputError);
}

TEST_CASE("allocation levels") {
  const double e = 1e8, l = std::log(e);
  const auto a2 = allocation(e, 2);
  CHECK(a2.level(0).x_max == Approx(1e8));
  CHECK(a2.level(1).x_max == Approx(1e4));
  CHECK(a2.level(0).x_min == Approx(1e4 * 18.420680743952367));
  CHECK(a2.level(1).x_min == Approx(std::cbrt(1e8) * l));
  CHECK(a2.level(1).x_min == Approx(8550.8).epsilon(1e-4));
  CHECK(a2.nested());
  CHECK(a2.separation_ratio(0) == Approx(l * l).epsilon(1e-12));
  CHECK(std::isinf(a2.separation_ratio(1)));

  const auto a1 = allocation(e, 1);
  CHECK(a1.level(0).x_max == Approx(1e8));
  CHECK(a1.level(0).x_min == Approx(1e4 * l));

  try {
    allocation(1e6, 2);
    FAIL("expected InfeasibleAllocation");
  } catch (const InfeasibleAllocation &err) {
    CHECK(err.threshold() == Approx(min_valid_snr(2)));
    CHECK(err.snr() == 1e6);
  }
  // Directly: x_min,2 > x_max,2 at 1e6.
  CHECK(std::cbrt(1e6) * std::log(1e6) > 1000.0);

  CHECK_THROWS_AS(PowerAllocation(1.0, {{2.0, 1.0}}), InputError);
  CHECK_THROWS_AS(PowerAllocation(1.0, {}), InputError);
  CHECK_THROWS_AS(a2.level(2), InputError);
}

TEST_CASE("property: nesting and separation ratio above the threshold") {
  for (std::size_t kappa = 1; kappa <= 3; ++kappa) {
    const double e0 = min_valid_snr(kappa);
    for (double f : {std::numbers::e, 10.0, 1e3, 1e6}) {
      const double e = e0 * f;
      const auto a = allocation(e, kappa);
      REQUIRE(a.nested());
      for (std::size_t nu = 0; nu < kappa; ++nu) {
        REQUIRE(a.level(nu).x_min < a.level(nu).x_max);
        if (nu + 1 < kappa)
          REQUIRE(a.separation_ratio(nu) == Approx(std::log(e) * std::log(e)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("property: log log(x_max^2 / x_min^2) tracks log log E") {
  // Holds with spread < 1 for kappa = 1 and for the first level of kappa = 2.
  for (auto [kappa, nu] : {std::pair<std::size_t, std::size_t>{1, 0}, {2, 0}}) {
    const double e0 = min_valid_snr(kappa);
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < 6; ++k) {
      const double e = e0 * std::pow(10.0, 2.0 + 2.0 * k);
      const auto lv = allocation(e, kappa).level(nu);
      const double d = std::log(std::log(lv.x_max * lv.x_max / (lv.x_min * lv.x_min))) -
                       std::log(std::log(e));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    CHECK(hi - lo < 1.0);
  }
}

TEST_CASE("effective noise variance") {
  const auto a = allocation(1e8, 2);
  CHECK(effective_noise_variance(1, a, 4.0) == 1.0);
  CHECK(effective_noise_variance(0, a, 4.0) == Approx(4.00000001e8));
  const auto a3 = allocation(min_valid_snr(3) * 10.0, 3);
  CHECK(effective_noise_variance(0, a3, 2.0) >= effective_noise_variance(1, a3, 2.0));
  CHECK(effective_noise_variance(1, a3, 2.0) >= effective_noise_variance(2, a3, 2.0));
  CHECK_THROWS_AS(effective_noise_variance(2, a, 4.0), InputError);
  CHECK_THROWS_AS(effective_noise_variance(0, a, 0.0), InputError);
}

TEST_CASE("per-level lower bound") {
  CHECK(lemma5_lower_bound(1e3, 1e6, 1.0, 1.0, -kGamma) == Approx(1.047).epsilon(1e-3));
  CHECK(lemma5_lower_bound(1e3, 1e6, 1.0, 1.0, -kGamma) ==
        Approx(level_bound_oracle(1e3, 1e6, 1.0, 1.0, -kGamma)).epsilon(1e-13));
  CHECK(lemma5_lower_bound(1e3, 1e6, 1.0, 0.0, -kGamma) ==
        Approx(std::log(std::log(1e6)) - kGamma - 1.0).epsilon(1e-13));
  CHECK_THROWS_AS(lemma5_lower_bound(1e3, 1e3, 1.0, 1.0, 0.0), InputError);
  CHECK_THROWS_AS(lemma5_lower_bound(1e3, 1e6, 0.0, 1.0, 0.0), InputError);
  CHECK_THROWS_AS(lemma5_lower_bound(1e3, 1e6, 1.0, -1.0, 0.0), InputError);
}

TEST_CASE("property: per-level bound monotonicity") {
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const double xm = std::exp(10.0 * uniform01(rng));
    const double xM = xm * std::exp(0.01 + 10.0 * uniform01(rng));
    const double sh = 0.1 + 3.0 * uniform01(rng);
    const double sw = 5.0 * uniform01(rng);
    const double e = 2.0 * (uniform01(rng) - 0.5);
    const double base = lemma5_lower_bound(xm, xM, sh, sw, e);
    REQUIRE(lemma5_lower_bound(xm, 1.5 * xM, sh, sw, e) > base);
    REQUIRE(lemma5_lower_bound(xm, xM, sh, sw, e + 0.1) > base);
    REQUIRE(lemma5_lower_bound(xm, xM, sh, sw + 0.5, e) < base);
  }
}

TEST_CASE("interference penalty") {
  const auto a = allocation(1e8, 2);
  CHECK(interference_penalty(1, a, 4.0, 1.0) == 0.0);
  const double xm = 1e4 * std::log(1e8);
  CHECK(interference_penalty(0, a, 4.0, 1.0) == Approx(std::log(1.0 + 4e8 / (1.0 + xm * xm))));
  CHECK(interference_penalty(0, a, 4.0, 1.0) == Approx(0.01172).epsilon(1e-3));
  double prev = 1e300;
  for (int k = 8; k <= 16; k += 2) {
    const double p = interference_penalty(0, allocation(std::pow(10.0, k), 2), 4.0, 1.0);
    CHECK(p < prev);
    prev = p;
  }
  CHECK_THROWS_AS(interference_penalty(0, a, 4.0, 0.0), InputError);
}

TEST_CASE("scheme rate lower bound") {
  SUBCASE("single link equals the per-level bound with unit noise") {
    const auto model = FadingModel::iid(make_full(1, 1));
    const auto chain = longest_chain(model.topology()).chain;
    const auto lb = scheme_rate_lower_bound(model, chain, 1e8);
    const auto lv = allocation(1e8, 1).level(0);
    CHECK(lb.total == Approx(level_bound_oracle(lv.x_min, lv.x_max, 1.0, 1.0, -kGamma)).epsilon(1e-12));
    CHECK(lb.single_user == lb.total);
  }
  SUBCASE("diagonal network sums independent levels") {
    const auto model = FadingModel::iid(make_diagonal(2));
    const auto chain = longest_chain(model.topology()).chain;
    const double e = 1e10;
    const auto lb = scheme_rate_lower_bound(model, chain, e);
    const auto a = allocation(e, 2);
    const double noise0 = 1.0 + 2.0 * a.level(1).x_max * a.level(1).x_max;
    const double expected =
        level_bound_oracle(a.level(0).x_min, a.level(0).x_max, 1.0, std::sqrt(noise0), -kGamma) +
        level_bound_oracle(a.level(1).x_min, a.level(1).x_max, 1.0, 1.0, -kGamma);
    CHECK(lb.total == Approx(expected).epsilon(1e-12));
    REQUIRE(lb.levels.size() == 2);
    CHECK(lb.levels[0].eps2 == Approx(1.0));
  }
  SUBCASE("interferer reaching the first witness lowers eps2 only through correlation") {
    // t1 heard by r1 only; t2 heard by r1 and r2.
    const Topology topo(2, 2, {{1, 0}});
    Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(3, 3);
    cov(0, 1) = cov(1, 0) = 0.5;
    const FadingModel model(topo, Eigen::VectorXcd::Zero(3), cov);
    const auto chain = longest_chain(topo).chain;
    const auto lb = scheme_rate_lower_bound(model, chain, 1e9);
    CHECK(lb.levels[0].eps2 == Approx(0.75));
    CHECK(lb.levels[0].penalty > 0.0);
    CHECK(lb.levels[1].penalty == 0.0);
  }
  const auto model = FadingModel::iid(make_diagonal(2));
  CHECK_THROWS_AS(scheme_rate_lower_bound(model, longest_chain(model.topology()).chain, 1e6),
                  InfeasibleAllocation);
  PowerChain bad{{0, 1}, {1, 1}};
  CHECK_THROWS_AS(scheme_rate_lower_bound(model, bad, 1e8), InputError);
}

TEST_CASE("sup-term maximizer sits at the entropy crossover") {
  for (double frob2 : {1.0, 4.0, 9.0})
    for (std::size_t n : {1, 2, 3})
      for (double h : {-3.0, 0.0, 2.0, 6.0}) {
        const double nn = static_cast<double>(n);
        const double rho_c = std::exp((nn * std::log(std::numbers::pi * std::numbers::e) - h) / nn);
        const double at_c = nn * std::log(frob2 * 2.0 * rho_c + nn) -
                            nn * std::log(std::numbers::pi * std::numbers::e);
        const auto s = sup_term(frob2, n, 2, h);
        CHECK(s.value == Approx(at_c).epsilon(1e-6));
        CHECK(std::log(s.rho) == Approx(std::log(rho_c)).epsilon(1e-5));
      }
  CHECK_THROWS_AS(sup_term(1.0, 1, 1, 0.0, 1e-30, 1e-20), NumericalError);
  CHECK_THROWS_AS(sup_term(0.0, 1, 1, 0.0), InputError);
}

TEST_CASE("duality upper bound") {
  const auto model = FadingModel::iid(make_full(1, 1));
  // Scalar Rayleigh: closed form of every term.
  const double e = 1e8;
  const double d = 1.0 + std::log(e + 1.0) + kGamma;
  const double sup = std::log(2.0) - std::log(std::numbers::pi * std::numbers::e);
  const double expected =
      std::log(std::numbers::pi) + sup + 1.0 + std::lgamma(1.0 / d) + std::log(d) / d;
  CHECK(duality_upper_bound(model, e) == Approx(expected).epsilon(1e-9));

  double lo = 1e300, hi = -1e300;
  for (double x : {1e8, 1e10, 1e12, 1e14}) {
    const double g = duality_upper_bound(model, x) - std::log(std::log(x));
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  CHECK(hi - lo < 2.0);

  for (double x : {1e8, 1e12}) {
    const auto chain = longest_chain(model.topology()).chain;
    CHECK(duality_upper_bound(model, x) >= scheme_rate_lower_bound(model, chain, x).total);
  }

  CHECK_THROWS_AS(duality_upper_bound(FadingModel::iid(make_diagonal(2)), e), InputError);
  Block block{{0, 1}, {0, 1}, 0};
  CHECK_THROWS_AS(block_upper_bound(FadingModel::iid(make_diagonal(2)), block, e), InputError);
}

TEST_CASE("converse envelope") {
  const auto full = FadingModel::iid(make_full(2, 2));
  const auto c0 = converse_envelope(full, 0.0);
  CHECK(c0.value == Approx(c0.constant));
  CHECK(c0.kappa_star == 1);
  CHECK(c0.log_factorial == Approx(std::log(2.0)));

  const auto diag = FadingModel::iid(make_diagonal(2));
  const auto cd = converse_envelope(diag, 1e10);
  CHECK(cd.kappa_star == 2);
  REQUIRE(cd.phases.size() == 2);
  CHECK(cd.phases[0].cross_information == 0.0);
  CHECK(cd.value == Approx(2.0 * std::log1p(std::log1p(1e10)) + cd.constant));

  // Each phase constant dominates its block bound on and off the grid.
  for (const auto &p : cd.phases)
    for (double x : {0.0, 0.3, 17.0, 3.3e5, 1e9, 4.2e22})
      REQUIRE(block_upper_bound(diag, p.block, x).value - std::log1p(std::log1p(x)) <=
              p.constant + 1e-9);

  double lo = 1e300, hi = -1e300;
  for (int k = 8; k <= 16; k += 2) {
    const double x = std::pow(10.0, k);
    const double g = converse_envelope(diag, x).value - 2.0 * std::log(std::log(x));
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  CHECK(hi - lo < 1.0);

  // Correlated entries across receiver blocks add a cross term.
  const Topology t(2, 2, {{1, 0}});
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(3, 3);
  cov(1, 2) = cov(2, 1) = 0.5; // H(1,2) with H(2,2)
  const FadingModel corr(t, Eigen::VectorXcd::Zero(3), cov);
  const auto cc = converse_envelope(corr, 1e9);
  REQUIRE(cc.phases.size() == 2);
  CHECK(cc.phases[0].cross_information == Approx(-std::log(0.75)));
}

TEST_CASE("bound report and lower <= upper") {
  for (const auto &topo : {make_full(1, 1), make_full(2, 2), make_diagonal(2), make_wyner_linear(2)}) {
    const auto model = FadingModel::iid(topo);
    for (int k = 8; k <= 16; k += 4) {
      const auto rep = bound_report(model, std::pow(10.0, k));
      if (!rep.feasible) continue;
      REQUIRE(rep.lower_bound.has_value());
      CHECK(*rep.lower_bound <= rep.upper_bound);
    }
  }
  const auto rep = bound_report(FadingModel::iid(make_diagonal(2)), 1e6);
  CHECK_FALSE(rep.feasible);
  CHECK_FALSE(rep.lower_bound.has_value());
  CHECK_FALSE(rep.note.empty());

  const auto j = to_json(bound_report(FadingModel::iid(make_diagonal(2)), 1e8));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"snr", "kappa_star", "loglog", "feasible", "lower",
                                         "single_user_lower", "upper", "levels", "converse"});
  CHECK(j["levels"][0]["witness"] == 1);
  CHECK_THROWS_AS(bound_report(FadingModel::iid(make_diagonal(2)), 1.0), InputError);
}
