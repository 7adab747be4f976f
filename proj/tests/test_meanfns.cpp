#include <doctest.h>

#include <cmath>

#include "opmeans/error.hpp"
#include "opmeans/repfn.hpp"

using namespace opmeans;

namespace {

// Independent closed forms, written out directly from the scalar equations.
double surd_arith_harm(double w, double a, double t) {
  const double b = (1.0 - a - w) * t + w - a;
  return (std::sqrt(b * b + 4.0 * a * (1.0 - a) * t) - b) / (2.0 * a);
}

double geo_half_by_arith(double a, double t) {
  const double c = (1.0 - a) * (1.0 + t);
  return (c + std::sqrt(c * c + 4.0 * a * (2.0 - a) * t)) / (2.0 * (2.0 - a));
}

// Inverse of the representing function of #_w deformed by ∇_α.
double g_inverse_oracle(double w, double a, double x) {
  return x / a * (std::pow(1.0 - a + a / x, (w - 1.0) / w) - 1.0 + a);
}

}  // namespace

TEST_CASE("catalog representing functions") {
  CHECK(rep_eval(RepFn::left_trivial(), 5.0) == 1.0);
  CHECK(rep_eval(RepFn::right_trivial(), 5.0) == 5.0);
  CHECK(rep_eval(RepFn::arithmetic(0.25), 5.0) == doctest::Approx(2.0));
  CHECK(rep_eval(RepFn::harmonic(0.5), 3.0) == doctest::Approx(1.5));
  CHECK(rep_eval(RepFn::geometric(0.5), 9.0) == doctest::Approx(3.0));
  for (double x : {0.01, 0.5, 1.0, 3.0, 100.0}) {
    for (const RepFn& f : {RepFn::arithmetic(0.3), RepFn::harmonic(0.7), RepFn::geometric(0.4),
                           RepFn::example37()}) {
      CHECK(f(1.0) == doctest::Approx(1.0));
      CHECK(f(x) > 0.0);
    }
  }
  CHECK_THROWS_AS(RepFn::arithmetic(1.5), Error);
  CHECK_THROWS_AS(rep_eval(RepFn::geometric(0.5), 0.0), Error);
}

TEST_CASE("Example37 exact values") {
  const RepFn f = RepFn::example37();
  CHECK(std::abs(f(8.0) - 59.0 / 24.0) <= 1e-12 * 59.0 / 24.0);
  CHECK(std::abs(std::pow(f(2.0), 3) - 1331.0 / 512.0) <= 1e-12 * 1331.0 / 512.0);
  // f(2^3) < f(2)^3: not power monotone increasing.
  const MarginReport pmi = pmi_margin(f, {2.0}, {3.0});
  CHECK(pmi.worst_margin == doctest::Approx(59.0 / 24.0 - 1331.0 / 512.0));
  CHECK(pmi.worst_margin < 0.0);
  CHECK(condition_vi_margin(f, default_x_grid(), default_r_grid()).worst_margin >= -1e-12);
}

TEST_CASE("geometric means are power monotone; grids are as documented") {
  // Margins are absolute; the largest term on the grid is f(1e3^8) = 1e12.
  CHECK(pmi_margin(RepFn::geometric(0.5), default_x_grid(), default_r_grid()).worst_margin >=
        -1e-14 * 1e12);
  const auto xs = default_x_grid();
  CHECK(std::find(xs.begin(), xs.end(), 2.0) != xs.end());
  const auto rs = default_r_grid();
  CHECK(rs.front() == doctest::Approx(1.0));
  CHECK(rs.back() == doctest::Approx(8.0));
  CHECK_THROWS_AS(pmi_margin(RepFn::geometric(0.5), xs, {0.5}), Error);
}

TEST_CASE("transforms") {
  const RepFn a = RepFn::arithmetic(0.5);
  for (double x : {0.1, 0.7, 2.0, 13.0}) {
    CHECK(a.adjoint()(x) == doctest::Approx(RepFn::harmonic(0.5)(x)));
    CHECK(RepFn::arithmetic(0.3).transpose()(x) == doctest::Approx(RepFn::arithmetic(0.7)(x)));
    CHECK(a.power_inner(2.0)(x) == doctest::Approx(a(x * x)));
    CHECK(a.power_inner_outer(2.0)(x) == doctest::Approx(std::sqrt(a(x * x))));
    CHECK(a.power_outer(0.5)(x) == doctest::Approx(std::sqrt(a(x))));
    // Involutions.
    CHECK(a.adjoint().adjoint()(x) == doctest::Approx(a(x)));
    CHECK(RepFn::example37().transpose().transpose()(x) == doctest::Approx(RepFn::example37()(x)));
  }
  CHECK_THROWS_AS(a.with(TransformOp::PowerInner), Error);
  CHECK_THROWS_AS(a.power_outer(2.0), Error);
}

TEST_CASE("deformed representing functions: closed forms") {
  const auto grid = log_grid(1e-3, 1e3, 50);
  for (double w : {0.3, 0.5, 0.7}) {
    for (double al : {0.3, 0.5, 0.7}) {
      for (double t : grid) {
        const double pw = deformed_rep(RepFn::arithmetic(w), RepFn::geometric(al), t);
        CHECK(pw == doctest::Approx(std::pow(1.0 - w + w * std::pow(t, al), 1.0 / al)).epsilon(1e-10));
        const double ah = deformed_rep(RepFn::arithmetic(w), RepFn::harmonic(al), t);
        CHECK(ah == doctest::Approx(surd_arith_harm(w, al, t)).epsilon(1e-10));
        const double ga = deformed_rep(RepFn::geometric(w), RepFn::arithmetic(al), t);
        CHECK(g_inverse_oracle(w, al, ga) == doctest::Approx(t).epsilon(1e-9));
      }
    }
  }
  for (double al : {0.3, 0.5, 0.7}) {
    for (double t : {0.01, 0.5, 2.0, 40.0}) {
      CHECK(deformed_rep(RepFn::geometric(0.5), RepFn::arithmetic(al), t) ==
            doctest::Approx(geo_half_by_arith(al, t)).epsilon(1e-10));
    }
  }
  // ∇ deformed by ! is the geometric mean.
  CHECK(deformed_rep(RepFn::arithmetic(0.5), RepFn::harmonic(0.5), 4.0) == doctest::Approx(2.0));
}

TEST_CASE("deformation identities") {
  const RepFn tau = RepFn::example37();
  for (double t : {0.2, 1.0, 5.0}) {
    // τ_r = τ, l_σ = l, r_σ = r, (#_w)_{#_α} = #_w.
    CHECK(deformed_rep(tau, RepFn::right_trivial(), t) == doctest::Approx(tau(t)));
    CHECK(deformed_rep(RepFn::left_trivial(), RepFn::geometric(0.5), t) == doctest::Approx(1.0));
    CHECK(deformed_rep(RepFn::right_trivial(), RepFn::geometric(0.5), t) == doctest::Approx(t));
    CHECK(deformed_rep(RepFn::geometric(0.3), RepFn::geometric(0.6), t) ==
          doctest::Approx(std::pow(t, 0.3)));
  }
  CHECK_THROWS_AS(deformed_rep(tau, RepFn::left_trivial(), 2.0), Error);
  // Derivative at 1 is preserved.
  const RepFn d = RepFn::deformed(RepFn::arithmetic(0.3), RepFn::harmonic(0.6));
  CHECK(d.derivative_at_one() == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("two-variable means: Kubo-Ando properties") {
  const SpdMatrix a = random_spd(3, 0.3, 4.0, 21);
  const SpdMatrix b = random_spd(3, 0.3, 4.0, 22);
  const RepFn g = RepFn::geometric(0.5);

  // Riccati characterization of A # B.
  const SpdMatrix m = two_var_mean(g, a, b);
  CHECK((m.matrix() * inverse(a).matrix() * m.matrix() - b.matrix()).norm() < 1e-10);
  // Symmetry of the geometric mean and the identity A σ A = A.
  CHECK((two_var_mean(g, b, a).matrix() - m.matrix()).norm() < 1e-10);
  CHECK((two_var_mean(RepFn::example37(), a, a).matrix() - a.matrix()).norm() < 1e-11);

  for (const RepFn& f : {RepFn::arithmetic(0.3), RepFn::harmonic(0.6), RepFn::example37(), g}) {
    // Transformer equality for invertible congruences.
    Rng rng(3);
    const Matrix s = random_orthogonal(3, rng) * random_spd(3, 0.5, 2.0, rng).matrix();
    const SpdMatrix lhs = congruence(s, two_var_mean(f, a, b));
    const SpdMatrix rhs = two_var_mean(f, congruence(s, a), congruence(s, b));
    CHECK((lhs.matrix() - rhs.matrix()).norm() < 1e-9 * lhs.matrix().norm());
    // Monotonicity in the second argument.
    const SpdMatrix bigger = SpdMatrix::unchecked(b.matrix() + Matrix::Identity(3, 3));
    const auto v = loewner_compare(two_var_mean(f, a, b), two_var_mean(f, a, bigger));
    CHECK((v.relation == LoewnerRelation::LessEqual || v.relation == LoewnerRelation::Equal));
    // Adjoint: (A⁻¹ σ B⁻¹)⁻¹ = A σ* B.
    const SpdMatrix adj = inverse(two_var_mean(f, inverse(a), inverse(b)));
    CHECK((adj.matrix() - two_var_mean(f.adjoint(), a, b).matrix()).norm() < 1e-9);
    // Transpose swaps the arguments.
    CHECK((two_var_mean(f.transpose(), a, b).matrix() - two_var_mean(f, b, a).matrix()).norm() <
          1e-9);
  }
}

TEST_CASE("two-variable means on commuting inputs reduce to scalars") {
  Matrix da = Vector::LinSpaced(4, 0.5, 3.0).asDiagonal();
  Matrix db = Vector::LinSpaced(4, 2.0, 0.25).asDiagonal();
  const SpdMatrix a = validate_spd(da), b = validate_spd(db);
  for (const RepFn& f : {RepFn::harmonic(0.3), RepFn::example37(),
                         RepFn::deformed(RepFn::arithmetic(0.4), RepFn::geometric(0.5))}) {
    const SpdMatrix m = two_var_mean(f, a, b);
    for (Eigen::Index i = 0; i < 4; ++i) {
      CHECK(m(i, i) == doctest::Approx(scalar_mean(f, da(i, i), db(i, i))).epsilon(1e-10));
    }
  }
}
