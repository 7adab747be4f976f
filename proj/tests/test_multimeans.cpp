#include <doctest.h>

#include <cmath>

#include "opmeans/error.hpp"
#include "opmeans/multimean.hpp"
#include "support.hpp"

using namespace opmeans;
using opmeans::testing::diagonal;
using opmeans::testing::random_draw;
using opmeans::testing::rel_diff;

namespace {

bool leq(const SpdMatrix& a, const SpdMatrix& b, double tol = 1e-9) {
  const auto r = loewner_compare(a, b, tol).relation;
  return r == LoewnerRelation::LessEqual || r == LoewnerRelation::Equal;
}

double deformed_residual(const MultiMeanSpec& base, const RepFn& sigma, const Ensemble& as,
                         const SpdMatrix& x) {
  Ensemble ys;
  for (const auto& a : as) ys.push_back(two_var_mean(sigma, x, a));
  return thompson_distance(x, mean_value(base, ys));
}

}  // namespace

TEST_CASE("weights") {
  CHECK(Weights::uniform(4)[2] == doctest::Approx(0.25));
  CHECK_THROWS_AS(Weights({0.5, 0.6}), Error);
  CHECK_THROWS_AS(Weights({1.5, -0.5}), Error);
  CHECK_THROWS_AS(Weights(std::vector<double>{}), Error);
}

TEST_CASE("elementary means and arity") {
  const Ensemble as{diagonal({1.0, 4.0}), diagonal({3.0, 2.0})};
  const Weights w({0.25, 0.75});
  CHECK(mean_value(MultiMeanSpec::arithmetic(w), as)(0, 0) == doctest::Approx(2.5));
  CHECK(mean_value(MultiMeanSpec::harmonic(w), as)(1, 1) ==
        doctest::Approx(1.0 / (0.25 / 4.0 + 0.75 / 2.0)));
  CHECK_THROWS_AS(mean_value(MultiMeanSpec::arithmetic(Weights::uniform(3)), as), Error);
  const Ensemble mixed{diagonal({1.0, 4.0}), diagonal({1.0, 2.0, 3.0})};
  CHECK_THROWS_AS(mean_value(MultiMeanSpec::arithmetic(Weights::uniform(2)), mixed), Error);
}

TEST_CASE("power means: endpoints, scalars and errors") {
  const Weights w({0.3, 0.7});
  const Ensemble as{diagonal({1.0, 4.0}), diagonal({3.0, 2.0})};
  const SpdMatrix p1 = power_mean(w, 1.0, as).value;
  CHECK(rel_diff(p1, mean_value(MultiMeanSpec::arithmetic(w), as)) < 1e-12);
  const SpdMatrix pm1 = power_mean(w, -1.0, as).value;
  CHECK(rel_diff(pm1, mean_value(MultiMeanSpec::harmonic(w), as)) < 1e-10);

  // 1×1 inputs: P_{w,α}(1, x) = (1 − w + w x^α)^{1/α}.
  for (double alpha : {0.25, 0.5, 0.8, -0.5}) {
    for (double x : {0.1, 2.0, 9.0}) {
      const Ensemble sc{diagonal({1.0}), diagonal({x})};
      const double want = std::pow(0.3 + 0.7 * std::pow(x, alpha), 1.0 / alpha);
      CHECK(power_mean(w, alpha, sc).value(0, 0) == doctest::Approx(want).epsilon(1e-10));
    }
  }
  try {
    power_mean(w, 0.0, as);
    FAIL("expected AlphaZero");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AlphaZero);
  }
  CHECK_THROWS_AS(power_mean(w, 1.5, as), Error);
}

TEST_CASE("power means interpolate monotonically in alpha") {
  const auto d = random_draw(5, 4, 3);
  SpdMatrix prev = power_mean(d.w, -1.0, d.as).value;
  for (double alpha : {-0.5, -0.125, 0.125, 0.5, 1.0}) {
    const SpdMatrix next = power_mean(d.w, alpha, d.as).value;
    CHECK(leq(prev, next));
    prev = next;
  }
}

TEST_CASE("deformed mean: fixed point, trivial cases, errors") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto d = random_draw(seed, 2 + static_cast<Eigen::Index>(seed % 4), 2 + seed % 3);
    const MultiMeanSpec base = MultiMeanSpec::arithmetic(d.w);
    for (const RepFn& sigma : {RepFn::geometric(0.5), RepFn::harmonic(0.4), RepFn::example37()}) {
      const MeanResult r = deformed_mean(base, sigma, d.as);
      CHECK(r.residual_dt < 1e-11);
      CHECK(deformed_residual(base, sigma, d.as, r.value) < 2e-11);
      // H ≤ M_σ ≤ A for a base squeezed between harmonic and arithmetic.
      CHECK(leq(mean_value(MultiMeanSpec::harmonic(d.w), d.as), r.value));
      CHECK(leq(r.value, mean_value(base, d.as)));
    }
  }
  const SpdMatrix a = random_spd(3, 0.5, 2.0, 9);
  const Ensemble same{a, a, a};
  const MeanResult r = deformed_mean(MultiMeanSpec::arithmetic(Weights::uniform(3)),
                                     RepFn::geometric(0.5), same);
  CHECK(r.iterations == 0);
  CHECK(rel_diff(r.value, a) < 1e-15);
  const auto d = random_draw(3, 3, 2);
  CHECK(rel_diff(deformed_mean(MultiMeanSpec::arithmetic(d.w), RepFn::right_trivial(), d.as).value,
                 mean_value(MultiMeanSpec::arithmetic(d.w), d.as)) < 1e-14);
  try {
    deformed_mean(MultiMeanSpec::arithmetic(d.w), RepFn::left_trivial(), d.as);
    FAIL("expected SigmaIsLeftTrivial");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SigmaIsLeftTrivial);
  }
}

TEST_CASE("deformed mean reports NoConvergence with the last iterate") {
  const auto d = random_draw(4, 3, 3);
  SolverConfig cfg;
  cfg.max_iters = 2;
  try {
    deformed_mean(MultiMeanSpec::arithmetic(d.w), RepFn::geometric(0.25), d.as, cfg);
    FAIL("expected NoConvergenceError");
  } catch (const NoConvergenceError& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
    CHECK(e.last().iterations == 2);
    CHECK(e.last().residual_dt > 0.0);
  }
}

TEST_CASE("comparison principle") {
  const auto d = random_draw(6, 3, 3);
  const MultiMeanSpec base = MultiMeanSpec::arithmetic(d.w);
  const RepFn sigma = RepFn::geometric(0.5);
  const SpdMatrix x = deformed_mean(base, sigma, d.as).value;
  // A small multiple of I satisfies Y ≤ M(YσA…), so Y ≤ M_σ.
  const SpdMatrix y = SpdMatrix::identity(3).scaled(0.05);
  const auto v = comparison_bound(base, sigma, d.as, y, BoundDirection::Lower);
  CHECK((v.relation == LoewnerRelation::LessEqual || v.relation == LoewnerRelation::Equal));
  CHECK(leq(y, x));
  CHECK_THROWS_AS(comparison_bound(base, sigma, d.as, SpdMatrix::identity(3).scaled(50.0),
                                   BoundDirection::Lower),
                  Error);
}

TEST_CASE("Karcher mean: commuting inputs, certificate, residual") {
  const Ensemble as{diagonal({1.0, 4.0, 0.5}), diagonal({3.0, 2.0, 8.0}),
                    diagonal({0.2, 1.0, 1.0})};
  const Weights w({0.2, 0.5, 0.3});
  const MeanResult r = karcher_mean(w, as);
  for (Eigen::Index i = 0; i < 3; ++i) {
    double want = 1.0;
    for (std::size_t j = 0; j < 3; ++j) want *= std::pow(as[j](i, i), w[j]);
    CHECK(std::abs(r.value(i, i) - want) <= 1e-9 * want);
  }
  // The enclosure width is max_i |log(P_α / P_−α)| entrywise at α = 1/64.
  REQUIRE(r.enclosure_gap.has_value());
  double gap = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    double up = 0.0, lo = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      up += w[j] * std::pow(as[j](i, i), 1.0 / 64);
      lo += w[j] * std::pow(as[j](i, i), -1.0 / 64);
    }
    gap = std::max(gap, std::abs(64.0 * std::log(up) + 64.0 * std::log(lo)));
  }
  CHECK(*r.enclosure_gap == doctest::Approx(gap).epsilon(1e-8));

  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const auto d = random_draw(seed, 4, 3);
    const MeanResult k = karcher_mean(d.w, d.as);
    CHECK(karcher_residual(d.w, d.as, k.value) < 1e-10);
    CHECK(leq(power_mean(d.w, -1.0 / 64, d.as).value, k.value));
    CHECK(leq(k.value, power_mean(d.w, 1.0 / 64, d.as).value));
  }
  // Two variables with equal weights: A # B.
  const auto d = random_draw(30, 3, 2);
  CHECK(rel_diff(karcher_mean(Weights::uniform(2), d.as).value,
                 two_var_mean(RepFn::geometric(0.5), d.as[0], d.as[1])) < 1e-9);
  const Ensemble ids(3, SpdMatrix::identity(2));
  const MeanResult triv = karcher_mean(Weights::uniform(3), ids);
  CHECK(triv.iterations == 0);
}

TEST_CASE("multivariate mean axioms on random ensembles") {
  for (std::uint64_t seed = 40; seed < 44; ++seed) {
    const auto d = random_draw(seed, 3, 3);
    for (const MultiMeanSpec& spec :
         {MultiMeanSpec::karcher(d.w), MultiMeanSpec::power(d.w, 0.5),
          MultiMeanSpec::deformed(MultiMeanSpec::arithmetic(d.w), RepFn::example37())}) {
      SolverConfig cfg;
      cfg.certify_karcher = false;
      const SpdMatrix m = mean_value(spec, d.as, cfg);
      // Homogeneity.
      Ensemble scaled;
      for (const auto& a : d.as) scaled.push_back(a.scaled(3.0));
      CHECK(rel_diff(mean_value(spec, scaled, cfg), m.scaled(3.0)) < 1e-9);
      // Monotonicity.
      Ensemble bigger = d.as;
      bigger[0] = SpdMatrix::unchecked(bigger[0].matrix() + Matrix::Identity(3, 3));
      CHECK(leq(m, mean_value(spec, bigger, cfg)));
      // Congruence invariance.
      Rng rng(seed);
      const Matrix s = random_orthogonal(3, rng) * random_spd(3, 0.5, 2.0, rng).matrix();
      Ensemble moved;
      for (const auto& a : d.as) moved.push_back(congruence(s, a));
      CHECK(rel_diff(mean_value(spec, moved, cfg), congruence(s, m)) < 1e-8);
      // Idempotence.
      const Ensemble same(3, d.as[0]);
      CHECK(rel_diff(mean_value(spec, same, cfg), d.as[0]) < 1e-10);
    }
  }
}

TEST_CASE("adjoints") {
  const auto d = random_draw(50, 4, 3);
  SolverConfig cfg;
  cfg.certify_karcher = false;
  const MultiMeanSpec p = MultiMeanSpec::power(d.w, 0.5);
  // P_α* = P_{−α}; H = A*; G* = G.
  CHECK(rel_diff(adjoint_eval(p, d.as, cfg).value, power_mean(d.w, -0.5, d.as, cfg).value) < 1e-9);
  CHECK(rel_diff(adjoint_eval(MultiMeanSpec::arithmetic(d.w), d.as).value,
                 mean_value(MultiMeanSpec::harmonic(d.w), d.as)) < 1e-12);
  CHECK(rel_diff(adjoint_eval(MultiMeanSpec::karcher(d.w), d.as, cfg).value,
                 karcher_mean(d.w, d.as, cfg).value) < 1e-9);
  // (M*)* = M.
  const MultiMeanSpec twice = MultiMeanSpec::adjoint_of(MultiMeanSpec::adjoint_of(p));
  CHECK(rel_diff(mean_value(twice, d.as, cfg), mean_value(p, d.as, cfg)) < 1e-9);
  // (M_σ)* = (M*)_{σ*}.
  const RepFn sigma = RepFn::example37();
  const SpdMatrix lhs =
      adjoint_eval(MultiMeanSpec::deformed(MultiMeanSpec::arithmetic(d.w), sigma), d.as).value;
  const SpdMatrix rhs =
      deformed_mean(MultiMeanSpec::harmonic(d.w), sigma.adjoint(), d.as).value;
  CHECK(rel_diff(lhs, rhs) < 1e-8);
}

TEST_CASE("log-Euclidean mean on commuting inputs equals the Karcher mean") {
  const Ensemble as{diagonal({1.0, 4.0}), diagonal({9.0, 0.25})};
  const Weights w = Weights::uniform(2);
  CHECK(rel_diff(log_euclidean_mean(w, as), karcher_mean(w, as).value) < 1e-10);
}

TEST_CASE("Karcher mean converges on widely spread, ill-conditioned inputs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto d = random_draw(seed, 2 + static_cast<Eigen::Index>(seed % 3), 2 + seed % 4, 0.1, 10.0);
    for (double r : {1.0, 2.0, 3.0}) {
      const Ensemble as = powered(d.as, r);
      MeanResult k;
      REQUIRE_NOTHROW(k = karcher_mean(d.w, as));
      // Condition numbers reach 1e6 at r = 3; the residual is limited by rounding there.
      CHECK(k.residual_dt < std::max(1e-11, 1e-12 * std::pow(100.0, r)));
    }
  }
}
