#include <doctest.h>

#include <cmath>

#include "opmeans/error.hpp"
#include "opmeans/inequalities.hpp"
#include "support.hpp"

using namespace opmeans;
using opmeans::testing::diagonal;
using opmeans::testing::random_draw;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an opmeans::Error");
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("Kantorovich constant") {
  for (double h : {1.5, 2.0, 10.0}) CHECK(std::abs(kantorovich(h, 1.0) - 1.0) < 1e-10);
  // (4−2)/(1·1) · ((1/2)·(3/2))² = 9/8.
  CHECK(std::abs(kantorovich(2.0, 2.0) - 9.0 / 8.0) < 1e-12);
  // p = 2 closed form (h+1)²/(4h).
  for (double h : {1.1, 3.0, 16.0}) {
    CHECK(kantorovich(h, 2.0) == doctest::Approx((h + 1) * (h + 1) / (4 * h)).epsilon(1e-13));
  }
  // Continuity through the removable singularity.
  CHECK(kantorovich(3.0, 1.0 + 1e-6) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(kantorovich(3.0, 0.0) == 1.0);
  CHECK(code_of([] { kantorovich(1.0, 2.0); }) == ErrorCode::BadH);
  // K(h^t, p)^{1/t} increases in t and stays in [1, h^{p−1}].
  double prev = 0.0;
  for (double t = 0.05; t <= 4.0; t += 0.05) {
    const double v = std::pow(kantorovich(std::pow(3.0, t), 2.0), 1.0 / t);
    CHECK(v >= 1.0 - 1e-12);
    CHECK(v <= 3.0 + 1e-12);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("Ando-Hiai families on power means") {
  const auto d = random_draw(3, 4, 3);
  const MultiMeanSpec p = MultiMeanSpec::power(d.w, 0.5);
  for (double r : {1.0, 1.5, 2.0, 3.0}) {
    CHECK(check_ah_family(p, d.as, r, AhVariant::ForwardLower).holds);
    CHECK(check_ah_family(p, d.as, r, AhVariant::AdjointForwardUpper).holds);
  }
  for (double r : {0.25, 0.5, 1.0}) {
    CHECK(check_ah_family(p, d.as, r, AhVariant::ComplementaryUpper).holds);
    CHECK(check_ah_family(p, d.as, r, AhVariant::AdjointComplementaryLower).holds);
  }
  const CheckReport at_one = check_ah_family(p, d.as, 1.0, AhVariant::ForwardLower);
  CHECK(std::abs(at_one.margin) < 1e-12);
  CHECK(at_one.inequality_id == "3.1");
  CHECK(code_of([&] { check_ah_family(p, d.as, 0.5, AhVariant::ForwardLower); }) ==
        ErrorCode::BadR);
  CHECK(code_of([&] { check_ah_family(p, d.as, 2.0, AhVariant::ComplementaryUpper); }) ==
        ErrorCode::BadR);
}

TEST_CASE("Ando-Hiai for commuting power means matches the scalar oracle") {
  const Ensemble as{diagonal({1.0, 4.0}), diagonal({3.0, 0.5})};
  const Weights w({0.4, 0.6});
  const double alpha = 0.5, r = 2.0;
  auto pm = [&](double x, double y, double s) {
    return std::pow(0.4 * std::pow(std::pow(x, s), alpha) + 0.6 * std::pow(std::pow(y, s), alpha),
                    1.0 / alpha);
  };
  const double x0 = pm(1.0, 3.0, 1.0), x1 = pm(4.0, 0.5, 1.0);
  const double lam = std::min(x0, x1);
  const double margin0 = pm(1.0, 3.0, r) - lam * x0;
  const double margin1 = pm(4.0, 0.5, r) - lam * x1;
  const double want = std::min(margin0, margin1) / (std::max(x0, x1) * lam + std::max(pm(1.0, 3.0, r), pm(4.0, 0.5, r)));
  const CheckReport rep =
      check_ah_family(MultiMeanSpec::power(w, alpha), as, r, AhVariant::ForwardLower);
  CHECK(rep.holds);
  CHECK(rep.margin == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("Karcher Ando-Hiai sandwich and the weak form") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = random_draw(seed, 3, 3);
    CHECK(check_karcher_ah(d.w, d.as, 2.0).inequality_id == "3.13");
    CHECK(check_karcher_ah(d.w, d.as, 2.0).holds);
    CHECK(check_karcher_ah(d.w, d.as, 0.5).inequality_id == "3.14");
    CHECK(check_karcher_ah(d.w, d.as, 0.5).holds);
    CHECK(check_weak_ah(MultiMeanSpec::karcher(d.w), d.as, 2.0).holds);
  }
}

TEST_CASE("modified and two-variable forms") {
  const auto d = random_draw(8, 3, 3);
  const MultiMeanSpec base = MultiMeanSpec::arithmetic(d.w);
  CHECK(check_modified(base, RepFn::example37(), d.as, 2.0, ModifiedForm::Inner).holds);
  CHECK(check_modified(base, RepFn::example37(), d.as, 0.5, ModifiedForm::Outer).holds);
  CHECK(code_of([&] {
          check_modified(base, RepFn::left_trivial(), d.as, 2.0, ModifiedForm::Inner);
        }) == ErrorCode::SigmaIsLeftTrivial);

  const SpdMatrix a = d.as[0], b = d.as[1];
  const RepFn tau = RepFn::arithmetic(0.5);
  CHECK(check_two_var(tau, RepFn::geometric(0.5), a, b, 2.0, TwoVarForm::Deformed).holds);
  CHECK(check_two_var(tau, RepFn::geometric(0.5), a, b, 0.5, TwoVarForm::DeformedComplement).holds);
  // The bracket form for the weighted geometric mean is the original Ando-Hiai inequality.
  CHECK(check_two_var(RepFn::geometric(0.3), tau, a, b, 2.0, TwoVarForm::Bracket).holds);
  CHECK(check_two_var(RepFn::harmonic(0.3), tau, a, b, 0.5, TwoVarForm::BracketComplement).holds);
  const CheckReport eq = check_two_var(tau, RepFn::geometric(0.5), a, a, 1.0, TwoVarForm::Deformed);
  CHECK(std::abs(eq.margin) < 1e-12);
}

TEST_CASE("equivalence of the matrix and scalar power conditions") {
  const auto grid = log_grid(1e-3, 1e3, 101);
  const CheckReport same =
      corollary_4_6_test(RepFn::geometric(0.5), RepFn::geometric(0.5), 2.0, grid, 10, 1);
  CHECK(same.holds);
  CHECK(same.constants.at("cond_ii_margin") >= -1e-12);
  // t^{rα} against (1−w+wt)^r fails for small α, and the failure lifts to matrices.
  const CheckReport split =
      corollary_4_6_test(RepFn::geometric(0.1), RepFn::arithmetic(0.5), 2.0, grid, 10, 1);
  CHECK(split.holds);
  CHECK(split.constants.at("cond_ii_margin") < 0.0);
  CHECK(split.constants.at("lifted_margin") < 0.0);
}

TEST_CASE("reverse inequalities: valid ones hold") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto d = random_draw(seed, 3, 3, 1.0, 4.0);
    const SpectrumBounds b{1.0, 4.0};
    CHECK(check_ineq_5_3(d.w, d.as, 2.0, b).holds);
    CHECK(check_reverse(d.w, 0.5, d.as, 2.0, ReverseForm::PowerUpper, b).holds);
    CHECK(check_reverse(d.w, -0.5, d.as, 2.0, ReverseForm::PowerLower, b).holds);
  }
  const auto d = random_draw(1, 3, 3, 1.0, 4.0);
  CHECK(code_of([&] {
          check_reverse(d.w, 0.5, d.as, 2.0, ReverseForm::PowerUpper, {1.5, 4.0});
        }) == ErrorCode::BoundsViolated);
  CHECK(code_of([&] {
          check_reverse(d.w, 0.5, d.as, 0.5, ReverseForm::PowerUpper, {1.0, 4.0});
        }) == ErrorCode::BadR);
  CHECK(code_of([&] {
          check_reverse(d.w, -0.5, d.as, 2.0, ReverseForm::PowerUpper, {1.0, 4.0});
        }) == ErrorCode::DomainError);
  // r = 1 makes every Kantorovich factor 1.
  const CheckReport one = check_reverse(d.w, 1.0, d.as, 1.0, ReverseForm::Karcher, {1.0, 4.0});
  CHECK(one.holds);
  CHECK(one.constants.at("K") == 1.0);
}

// The multiplier lemma and the bounds derived from it fail on explicit inputs. These cases pin
// the behavior: the checks evaluate the stated inequality and report the violation.
TEST_CASE("documented counterexamples to the Kantorovich multiplier bounds") {
  // Scalar: m = 1, M = 1.01, μ = 1/4, A = 1.01, C = 1/2.
  const CheckReport lemma = check_lemma_5_1(diagonal({1.01}), diagonal({0.5}), 2.0,
                                            {1.0, 1.01}, 0.25);
  CHECK_FALSE(lemma.holds);
  CHECK(lemma.constants.at("K") == doctest::Approx(kantorovich(4.04, 2.0)));
  CHECK(lemma.margin < -0.1);
  // C = I, μ = 1 reduces to K ≥ 1 and holds.
  CHECK(check_lemma_5_1(diagonal({1.0, 3.0}), diagonal({1.0, 1.0}), 2.0, {1.0, 3.0}, 1.0).holds);

  // A single matrix diag(1, 2) with [m, M] = [1, 2]: G(A²) = diag(1, 4) exceeds
  // K(4, 2)·λ_min·A = (25/16)·diag(1, 2).
  const Ensemble one{diagonal({1.0, 2.0})};
  const CheckReport karcher =
      check_reverse(Weights::uniform(1), 1.0, one, 2.0, ReverseForm::Karcher, {1.0, 2.0});
  CHECK_FALSE(karcher.holds);
  CHECK(karcher.constants.at("K") == doctest::Approx(25.0 / 16.0));
  CHECK(karcher.constants.at("upper_margin") < 0.0);
}

TEST_CASE("a reverse bound sharper than the forward bound exists") {
  const auto inst = find_reverse_improvement(1, 400, 2, 2);
  REQUIRE(inst.has_value());
  CHECK(inst->reverse_bound < inst->forward_bound);
  CHECK(inst->kappa0 < 4.0);
  const double s = std::sqrt(inst->kappa0);
  CHECK(inst->kappa_x > 1.0 / (s * (2.0 - s)));
}

TEST_CASE("Lie-Trotter gaps and log-majorization") {
  const auto d = random_draw(12, 3, 3);
  const LieTrotterReport lt = lie_trotter_gap(MultiMeanSpec::power(d.w, 0.5), d.as);
  CHECK(lt.nonincreasing);
  CHECK(lt.gaps.size() == 7);
  CHECK(lt.gaps.back() < 0.05);
  const Ensemble commuting{diagonal({1.0, 5.0}), diagonal({2.0, 0.5})};
  for (double g : lie_trotter_gap(MultiMeanSpec::karcher(Weights::uniform(2)), commuting).gaps) {
    CHECK(g < 1e-10);
  }
  for (double r : {0.25, 0.5, 1.0}) CHECK(check_log_majorization(d.w, d.as, r).holds);
  CHECK(code_of([&] { check_log_majorization(d.w, d.as, 2.0); }) == ErrorCode::BadR);
}

TEST_CASE("optimality searches") {
  CHECK(parse_optimality_mode("prop_6_1") == OptimalityMode::Prop61);
  CHECK(code_of([] { parse_optimality_mode("bogus"); }) == ErrorCode::BadMode);
  CHECK(optimality_scan(RepFn::arithmetic(0.5), 2.0, OptimalityMode::Prop61).has_value());
  CHECK_FALSE(optimality_scan(RepFn::arithmetic(0.5), 1.0, OptimalityMode::Prop61).has_value());
  const auto cx = optimality_scan(RepFn::harmonic(0.5), 0.5, OptimalityMode::Prop62);
  REQUIRE(cx.has_value());
  CHECK(cx->violation_margin < 0.0);
  // The stored pair re-verifies as a violation.
  const CheckReport again =
      check_optimality_instance(RepFn::harmonic(0.5), cx->a, cx->b, cx->r, cx->mode);
  CHECK_FALSE(again.holds);
  CHECK(again.margin == doctest::Approx(cx->violation_margin));
  CHECK_FALSE(optimality_scan(RepFn::geometric(0.5), 2.0, OptimalityMode::Prop62).has_value());
}
