#include "opmeans/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace opmeans {

double kantorovich(double h, double p) {
  if (!(h > 1.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::BadH, "Kantorovich constant needs h > 1, got " + std::to_string(h));
  }
  if (!std::isfinite(p)) throw Error(ErrorCode::DomainError, "Kantorovich exponent must be finite");
  // Both removable singularities have limit 1.
  if (std::abs(p - 1.0) < 1e-8 || std::abs(p) < 1e-8) return 1.0;
  const double lh = std::log(h);
  // h^p − h = h·expm1((p−1) log h) and h^p − 1 = expm1(p log h) avoid cancellation near p = 1.
  const double hp_minus_h = h * std::expm1((p - 1.0) * lh);
  const double hp_minus_1 = std::expm1(p * lh);
  const double lead = hp_minus_h / ((p - 1.0) * (h - 1.0));
  const double base = (p - 1.0) / p * hp_minus_1 / hp_minus_h;
  return lead * std::pow(base, p);
}

double normalized_margin(const Matrix& lhs, const Matrix& rhs) {
  const double scale = sym_norm(lhs) + sym_norm(rhs);
  const Matrix diff = rhs - lhs;
  const double lam = eigenvalues_of((diff + diff.transpose()) * 0.5)(0);
  return scale > 0.0 ? lam / scale : lam;
}

namespace {

void require_r(bool ok, double r, const char* range) {
  if (!ok || !std::isfinite(r)) {
    throw Error(ErrorCode::BadR, "r = " + std::to_string(r) + " outside " + range);
  }
}

void require_r_ge1(double r) { require_r(r >= 1.0, r, "[1, ∞)"); }
void require_r_le1(double r) { require_r(r > 0.0 && r <= 1.0, r, "(0, 1]"); }

CheckReport make_report(std::string id, double margin) {
  CheckReport rep;
  rep.inequality_id = std::move(id);
  rep.margin = margin;
  rep.holds = margin >= -kCheckTol;
  return rep;
}

void attach_inputs(CheckReport& rep, std::span<const SpdMatrix> as) {
  for (std::size_t j = 0; j < as.size(); ++j) {
    rep.matrices.emplace_back("A" + std::to_string(j + 1), as[j]);
  }
}

// lo ≤ mid ≤ hi, reporting the worse side.
double sandwich_margin(const Matrix& lo, const Matrix& mid, const Matrix& hi) {
  return std::min(normalized_margin(lo, mid), normalized_margin(mid, hi));
}

/// Mean evaluations inside a check never need the Karcher certificate.
SolverConfig inner_config(const SolverConfig& cfg) {
  SolverConfig c = cfg;
  c.certify_karcher = false;
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view ah_variant_id(AhVariant v) {
  switch (v) {
    case AhVariant::ForwardLower: return "3.1";
    case AhVariant::AdjointForwardUpper: return "3.2";
    case AhVariant::ComplementaryUpper: return "3.3";
    case AhVariant::AdjointComplementaryLower: return "3.4";
  }
  return "3.1";
}

CheckReport check_ah_family(const MultiMeanSpec& spec, std::span<const SpdMatrix> as, double r,
                            AhVariant variant, const SolverConfig& cfg) {
  const SolverConfig c = inner_config(cfg);
  const bool forward = variant == AhVariant::ForwardLower ||
                       variant == AhVariant::AdjointForwardUpper;
  forward ? require_r_ge1(r) : require_r_le1(r);
  const bool adjoint = variant == AhVariant::AdjointForwardUpper ||
                       variant == AhVariant::AdjointComplementaryLower;

  const Ensemble ar = powered(as, r);
  const SpdMatrix x = adjoint ? adjoint_eval(spec, as, c).value : mean_value(spec, as, c);
  const SpdMatrix z = adjoint ? adjoint_eval(spec, ar, c).value : mean_value(spec, ar, c);
  const SpectralStats st = spectral_stats(x);
  const double scalar = adjoint ? st.op_norm : st.lambda_min;
  const double prefactor = std::pow(scalar, r - 1.0);
  const Matrix bound = prefactor * x.matrix();

  double margin = 0.0;
  switch (variant) {
    case AhVariant::ForwardLower:
    case AhVariant::AdjointComplementaryLower: margin = normalized_margin(bound, z.matrix()); break;
    case AhVariant::AdjointForwardUpper:
    case AhVariant::ComplementaryUpper: margin = normalized_margin(z.matrix(), bound); break;
  }
  CheckReport rep = make_report(std::string(ah_variant_id(variant)), margin);
  rep.constants = {{"r", r}, {"prefactor", prefactor}};
  rep.constants[adjoint ? "op_norm" : "lambda_min"] = scalar;
  attach_inputs(rep, as);
  return rep;
}

CheckReport check_karcher_ah(const Weights& w, std::span<const SpdMatrix> as, double r,
                             const SolverConfig& cfg) {
  require_r(r > 0.0, r, "(0, ∞)");
  const SolverConfig c = inner_config(cfg);
  const SpdMatrix g = karcher_mean(w, as, c).value;
  const SpdMatrix gr = karcher_mean(w, powered(as, r), c).value;
  const SpectralStats st = spectral_stats(g);
  const double low_pref = std::pow(r >= 1.0 ? st.lambda_min : st.op_norm, r - 1.0);
  const double high_pref = std::pow(r >= 1.0 ? st.op_norm : st.lambda_min, r - 1.0);
  const double margin =
      sandwich_margin(low_pref * g.matrix(), gr.matrix(), high_pref * g.matrix());
  CheckReport rep = make_report(r >= 1.0 ? "3.13" : "3.14", margin);
  rep.constants = {{"r", r},
                   {"lambda_min", st.lambda_min},
                   {"op_norm", st.op_norm},
                   {"lower_prefactor", low_pref},
                   {"upper_prefactor", high_pref}};
  attach_inputs(rep, as);
  return rep;
}

CheckReport check_weak_ah(const MultiMeanSpec& spec, std::span<const SpdMatrix> as, double r,
                          const SolverConfig& cfg) {
  require_r_ge1(r);
  const SolverConfig c = inner_config(cfg);
  const double scale = 1.0 / lambda_min(mean_value(spec, as, c));
  Ensemble scaled;
  for (const auto& a : as) scaled.push_back(a.scaled(scale));
  const SpdMatrix z = mean_value(spec, powered(scaled, r), c);
  const Eigen::Index d = as.front().dim();
  CheckReport rep = make_report("3.5", normalized_margin(Matrix::Identity(d, d), z.matrix()));
  rep.constants = {{"r", r}, {"scale", scale}};
  attach_inputs(rep, scaled);
  return rep;
}

CheckReport check_modified(const MultiMeanSpec& base, const RepFn& sigma,
                           std::span<const SpdMatrix> as, double r, ModifiedForm form,
                           const SolverConfig& cfg) {
  if (sigma.is_left_trivial()) {
    throw Error(ErrorCode::SigmaIsLeftTrivial, "cannot deform by the left trivial mean");
  }
  const SolverConfig c = inner_config(cfg);
  const Ensemble ar = powered(as, r);
  double margin = 0.0;
  CheckReport rep;
  if (form == ModifiedForm::Inner) {
    require_r_ge1(r);
    const SpdMatrix x = deformed_mean(base, sigma, as, c).value;
    const SpdMatrix z = deformed_mean(base, sigma.power_inner(1.0 / r), ar, c).value;
    const SpectralStats st = spectral_stats(x);
    const double lo = std::pow(st.lambda_min, r - 1.0), hi = std::pow(st.op_norm, r - 1.0);
    margin = sandwich_margin(lo * x.matrix(), z.matrix(), hi * x.matrix());
    rep = make_report("4.1", margin);
    rep.constants = {{"r", r}, {"lower_prefactor", lo}, {"upper_prefactor", hi}};
  } else {
    require_r_le1(r);
    const SpdMatrix y = deformed_mean(base, sigma.power_inner(r), as, c).value;
    const SpdMatrix z = deformed_mean(base, sigma, ar, c).value;
    const SpectralStats st = spectral_stats(y);
    const double lo = std::pow(st.op_norm, r - 1.0), hi = std::pow(st.lambda_min, r - 1.0);
    margin = sandwich_margin(lo * y.matrix(), z.matrix(), hi * y.matrix());
    rep = make_report("4.2", margin);
    rep.constants = {{"r", r}, {"lower_prefactor", lo}, {"upper_prefactor", hi}};
  }
  attach_inputs(rep, as);
  return rep;
}

std::string_view two_var_id(TwoVarForm f) {
  switch (f) {
    case TwoVarForm::Deformed: return "4.6";
    case TwoVarForm::DeformedComplement: return "4.7";
    case TwoVarForm::Bracket: return "4.8";
    case TwoVarForm::BracketComplement: return "4.9";
  }
  return "4.6";
}

CheckReport check_two_var(const RepFn& tau, const RepFn& sigma, const SpdMatrix& a,
                          const SpdMatrix& b, double r, TwoVarForm form, const SolverConfig& cfg) {
  const bool forward = form == TwoVarForm::Deformed || form == TwoVarForm::Bracket;
  forward ? require_r_ge1(r) : require_r_le1(r);
  const SpdMatrix ar = power(a, r), br = power(b, r);

  // reference: the mean whose norm/λ_min scales the bounds; probe: the mean on powered inputs.
  RepFn reference = tau, probe = tau;
  switch (form) {
    case TwoVarForm::Deformed:
      reference = RepFn::deformed(tau, sigma, cfg);
      probe = RepFn::deformed(tau, sigma.power_inner(1.0 / r), cfg);
      break;
    case TwoVarForm::DeformedComplement:
      reference = RepFn::deformed(tau, sigma.power_inner(r), cfg);
      probe = RepFn::deformed(tau, sigma, cfg);
      break;
    case TwoVarForm::Bracket: probe = tau.power_inner_outer(1.0 / r); break;
    case TwoVarForm::BracketComplement: reference = tau.power_inner_outer(r); break;
  }
  const SpdMatrix x = two_var_mean(reference, a, b);
  const SpdMatrix z = two_var_mean(probe, ar, br);
  const SpectralStats st = spectral_stats(x);
  const double lo = std::pow(forward ? st.lambda_min : st.op_norm, r - 1.0);
  const double hi = std::pow(forward ? st.op_norm : st.lambda_min, r - 1.0);
  CheckReport rep = make_report(std::string(two_var_id(form)),
                                sandwich_margin(lo * x.matrix(), z.matrix(), hi * x.matrix()));
  rep.constants = {{"r", r}, {"lower_prefactor", lo}, {"upper_prefactor", hi}};
  rep.matrices = {{"A", a}, {"B", b}};
  return rep;
}

CheckReport corollary_4_6_test(const RepFn& sigma, const RepFn& tau, double r,
                               const std::vector<double>& t_grid, int matrix_trials,
                               std::uint64_t seed, const SolverConfig& cfg) {
  (void)cfg;
  require_r_ge1(r);
  if (t_grid.empty()) throw Error(ErrorCode::DomainError, "t grid must be nonempty");

  // Scalar condition, relative to the size of both sides.
  double ii_margin = std::numeric_limits<double>::infinity();
  double worst_t = 1.0;
  for (double t : t_grid) {
    const double lhs = sigma(std::pow(t, r)), rhs = std::pow(tau(t), r);
    const double m = (lhs - rhs) / (lhs + rhs);
    if (m < ii_margin) {
      ii_margin = m;
      worst_t = t;
    }
  }
  const bool ii_holds = ii_margin >= -kCheckTol;

  // Matrix condition on random pairs rescaled so that A τ B ≥ I is tight.
  Rng rng(seed);
  double i_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < matrix_trials; ++k) {
    const Eigen::Index d = 2 + (k % 2);
    const SpdMatrix a0 = random_spd(d, 0.25, 4.0, rng);
    const SpdMatrix b0 = random_spd(d, 0.25, 4.0, rng);
    const double c = 1.0 / lambda_min(two_var_mean(tau, a0, b0));
    const SpdMatrix z = two_var_mean(sigma, power(a0.scaled(c), r), power(b0.scaled(c), r));
    i_margin = std::min(i_margin, normalized_margin(Matrix::Identity(d, d), z.matrix()));
  }

  CheckReport rep;
  rep.inequality_id = "C4.6";
  double lifted = std::numeric_limits<double>::quiet_NaN();
  if (!ii_holds) {
    // (1/x) I τ (t/x) I = I with x = f_τ(t); the scalar failure lifts to a 2×2 violation.
    const double x = tau(worst_t);
    const SpdMatrix a = SpdMatrix::identity(2).scaled(1.0 / x);
    const SpdMatrix b = SpdMatrix::identity(2).scaled(worst_t / x);
    const SpdMatrix z = two_var_mean(sigma, power(a, r), power(b, r));
    lifted = normalized_margin(Matrix::Identity(2, 2), z.matrix());
    i_margin = std::min(i_margin, lifted);
    rep.matrices = {{"A", a}, {"B", b}};
  }
  const bool i_holds = i_margin >= -kCheckTol;
  rep.holds = ii_holds == i_holds;
  rep.margin = std::min(ii_margin, i_margin);
  rep.constants = {{"r", r},
                   {"cond_ii_margin", ii_margin},
                   {"cond_ii_worst_t", worst_t},
                   {"cond_i_margin", i_margin},
                   {"agree", rep.holds ? 1.0 : 0.0},
                   {"grid_artifact", (ii_holds && !i_holds) ? 1.0 : 0.0}};
  if (!std::isnan(lifted)) rep.constants["lifted_margin"] = lifted;
  rep.witness_seed = seed;
  return rep;
}

// ---------------------------------------------------------------------------

std::string_view reverse_id(ReverseForm f) {
  switch (f) {
    case ReverseForm::PowerUpper: return "5.4";
    case ReverseForm::PowerLower: return "5.5";
    case ReverseForm::Deformed: return "5.8";
    case ReverseForm::PowerDeformed: return "5.9";
    case ReverseForm::Karcher: return "5.10";
  }
  return "5.4";
}

namespace {

void require_bounds(std::span<const SpdMatrix> as, SpectrumBounds b) {
  if (!(b.m > 0.0) || !(b.m < b.big_m)) {
    throw Error(ErrorCode::BadInterval, "spectrum bounds must satisfy 0 < m < M");
  }
  constexpr double slack = 1e-10;
  for (const auto& a : as) {
    const SpectralStats s = spectral_stats(a);
    if (s.lambda_min < b.m * (1.0 - slack) || s.op_norm > b.big_m * (1.0 + slack)) {
      throw Error(ErrorCode::BoundsViolated, "input spectrum [" + std::to_string(s.lambda_min) +
                                                 ", " + std::to_string(s.op_norm) +
                                                 "] escapes the declared bounds");
    }
  }
}

void require_alpha(bool ok, double alpha, const char* range) {
  if (!ok) {
    throw Error(alpha == 0.0 ? ErrorCode::AlphaZero : ErrorCode::DomainError,
                "alpha = " + std::to_string(alpha) + " outside " + range);
  }
}

/// K₁⁻¹‖X‖^{r−1}X ≤ Z ≤ K₁λ_min^{r−1}(X)X.
CheckReport reverse_sandwich(std::string id, const SpdMatrix& x, const SpdMatrix& z, double r,
                             double kappa0) {
  const SpectralStats st = spectral_stats(x);
  const double k1 = kappa0 * st.condition_number > 1.0
                        ? kantorovich(kappa0 * st.condition_number, r)
                        : 1.0;
  const double lo = std::pow(st.op_norm, r - 1.0) / k1;
  const double hi = k1 * std::pow(st.lambda_min, r - 1.0);
  CheckReport rep = make_report(
      std::move(id), sandwich_margin(lo * x.matrix(), z.matrix(), hi * x.matrix()));
  rep.constants = {{"r", r},
                   {"kappa0", kappa0},
                   {"kappa_x", st.condition_number},
                   {"K", k1},
                   {"lambda_min_pow", std::pow(st.lambda_min, r - 1.0)},
                   {"op_norm_pow", std::pow(st.op_norm, r - 1.0)},
                   {"lower_margin", normalized_margin(lo * x.matrix(), z.matrix())},
                   {"upper_margin", normalized_margin(z.matrix(), hi * x.matrix())}};
  return rep;
}

}  // namespace

CheckReport check_reverse(const Weights& w, double alpha, std::span<const SpdMatrix> as, double r,
                          ReverseForm form, SpectrumBounds bounds, const SolverConfig& cfg) {
  require_r_ge1(r);
  require_bounds(as, bounds);
  const SolverConfig c = inner_config(cfg);
  const double kappa0 = bounds.big_m / bounds.m;
  const Ensemble ar = powered(as, r);
  CheckReport rep;

  switch (form) {
    case ReverseForm::PowerUpper:
    case ReverseForm::PowerLower: {
      const bool upper = form == ReverseForm::PowerUpper;
      upper ? require_alpha(alpha > 0.0 && alpha <= 1.0, alpha, "(0, 1]")
            : require_alpha(alpha < 0.0 && alpha >= -1.0, alpha, "[-1, 0)");
      const SpdMatrix x = power_mean(w, alpha, as, c).value;
      const SpdMatrix z = power_mean(w, alpha, ar, c).value;
      const SpectralStats st = spectral_stats(x);
      const double h = kappa0 * st.condition_number;
      const double k1 = h > 1.0 ? kantorovich(h, r) : 1.0;
      const double ha = std::pow(h, std::abs(alpha));
      const double k2 = ha > 1.0 ? kantorovich(ha, r) : 1.0;
      if (upper) {
        const double pref = k1 * std::pow(k2, 1.0 / alpha) * std::pow(st.lambda_min, r - 1.0);
        rep = make_report("5.4", normalized_margin(z.matrix(), pref * x.matrix()));
        rep.constants["prefactor"] = pref;
      } else {
        const double pref = std::pow(k2, 1.0 / alpha) / k1 * std::pow(st.op_norm, r - 1.0);
        rep = make_report("5.5", normalized_margin(pref * x.matrix(), z.matrix()));
        rep.constants["prefactor"] = pref;
      }
      rep.constants.insert({{"r", r}, {"alpha", alpha}, {"kappa0", kappa0},
                            {"kappa_x", st.condition_number}, {"K1", k1}, {"K2", k2}});
      break;
    }
    case ReverseForm::Deformed: {
      require_alpha(alpha != 0.0 && std::abs(alpha) <= 1.0, alpha, "[-1, 1]∖{0}");
      const MultiMeanSpec base =
          alpha > 0.0 ? MultiMeanSpec::arithmetic(w) : MultiMeanSpec::harmonic(w);
      rep = check_reverse_deformed(base, RepFn::harmonic(std::abs(alpha)), as, r, bounds, c);
      rep.constants["alpha"] = alpha;
      rep.matrices.clear();
      break;
    }
    case ReverseForm::PowerDeformed: {
      require_alpha(alpha != 0.0 && std::abs(alpha) <= 1.0, alpha, "[-1, 1]∖{0}");
      const SpdMatrix x = power_mean(w, alpha, as, c).value;
      const SpdMatrix z = power_mean(w, alpha / r, ar, c).value;
      rep = reverse_sandwich("5.9", x, z, r, kappa0);
      rep.constants["alpha"] = alpha;
      break;
    }
    case ReverseForm::Karcher: {
      const SpdMatrix x = karcher_mean(w, as, c).value;
      const SpdMatrix z = karcher_mean(w, ar, c).value;
      rep = reverse_sandwich("5.10", x, z, r, kappa0);
      break;
    }
  }
  rep.constants["m"] = bounds.m;
  rep.constants["M"] = bounds.big_m;
  attach_inputs(rep, as);
  return rep;
}

CheckReport check_reverse_deformed(const MultiMeanSpec& base, const RepFn& sigma,
                                   std::span<const SpdMatrix> as, double r, SpectrumBounds bounds,
                                   const SolverConfig& cfg) {
  require_r_ge1(r);
  require_bounds(as, bounds);
  const SolverConfig c = inner_config(cfg);
  const SpdMatrix x = deformed_mean(base, sigma, as, c).value;
  const SpdMatrix z = deformed_mean(base, sigma.power_inner(1.0 / r), powered(as, r), c).value;
  CheckReport rep = reverse_sandwich("5.8", x, z, r, bounds.big_m / bounds.m);
  attach_inputs(rep, as);
  return rep;
}

CheckReport check_lemma_5_1(const SpdMatrix& a, const SpdMatrix& c, double r, SpectrumBounds bounds,
                            double mu, const SolverConfig& cfg) {
  (void)cfg;
  require_r_ge1(r);
  const SpdMatrix one[] = {a};
  require_bounds(one, bounds);
  if (!(mu > 0.0)) throw Error(ErrorCode::BadInterval, "mu must be positive");
  if (a.dim() != c.dim()) throw Error(ErrorCode::DimensionMismatch, "A and C differ in dimension");
  const SpectralStats cs = spectral_stats(SpdMatrix::unchecked(c.matrix() * c.matrix()));
  constexpr double slack = 1e-10;
  if (cs.lambda_min < mu * (1.0 - slack) || cs.op_norm > 1.0 + slack) {
    throw Error(ErrorCode::BoundsViolated, "C² must lie between μI and I");
  }
  const double h1 = bounds.big_m / (bounds.m * mu);
  const double k = kantorovich(h1, r);
  const Matrix lhs = c.matrix() * power(a, r).matrix() * c.matrix();
  const Matrix rhs = k * power(congruence(c.matrix(), a), r).matrix();
  CheckReport rep = make_report("L5.1", normalized_margin(lhs, rhs));
  rep.constants = {{"r", r}, {"m", bounds.m}, {"M", bounds.big_m}, {"mu", mu}, {"h1", h1},
                   {"K", k}};
  rep.matrices = {{"A", a}, {"C", c}};
  return rep;
}

CheckReport check_ineq_5_3(const Weights& w, std::span<const SpdMatrix> as, double r,
                           SpectrumBounds bounds, const SolverConfig& cfg) {
  (void)cfg;
  require_r_ge1(r);
  require_bounds(as, bounds);
  const double k = kantorovich(bounds.big_m / bounds.m, r);
  const SpdMatrix lhs = elementary_mean(ElementaryKind::Arithmetic, w, powered(as, r));
  const SpdMatrix mean = elementary_mean(ElementaryKind::Arithmetic, w, as);
  CheckReport rep =
      make_report("5.3", normalized_margin(lhs.matrix(), k * power(mean, r).matrix()));
  rep.constants = {{"r", r}, {"m", bounds.m}, {"M", bounds.big_m}, {"K", k}};
  attach_inputs(rep, as);
  return rep;
}

std::optional<ImprovementInstance> find_reverse_improvement(std::uint64_t seed, int attempts,
                                                            Eigen::Index dim, std::size_t n,
                                                            const SolverConfig& cfg) {
  const SolverConfig c = inner_config(cfg);
  const Weights w = Weights::uniform(n);
  for (int k = 0; k < attempts; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    Rng rng(s);
    std::uniform_real_distribution<double> top(1.05, 3.95);
    const SpectrumBounds b{1.0, top(rng)};
    Ensemble as;
    for (std::size_t j = 0; j < n; ++j) as.push_back(random_spd(dim, b.m, b.big_m, rng));
    const SpdMatrix x = karcher_mean(w, as, c).value;
    const SpectralStats st = spectral_stats(x);
    const double kappa0 = b.big_m / b.m;
    const double reverse = kantorovich(kappa0 * st.condition_number, 2.0) * st.lambda_min;
    if (reverse < st.op_norm) {
      return ImprovementInstance{s, std::move(as), b, kappa0, st.condition_number, reverse,
                                 st.op_norm};
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

LieTrotterReport lie_trotter_gap(const MultiMeanSpec& spec, std::span<const SpdMatrix> as,
                                 std::vector<double> p_sequence, const SolverConfig& cfg) {
  const SolverConfig c = inner_config(cfg);
  if (p_sequence.empty()) {
    for (double p = 1.0; p >= 1.0 / 64; p /= 2) p_sequence.push_back(p);
  }
  const Weights& w = spec.weights();
  const SpdMatrix m = mean_value(spec, as, c);
  const SpdMatrix h = elementary_mean(ElementaryKind::Harmonic, w, as);
  const SpdMatrix a = elementary_mean(ElementaryKind::Arithmetic, w, as);
  if (sandwich_margin(h.matrix(), m.matrix(), a.matrix()) < -kCheckTol) {
    throw Error(ErrorCode::SandwichFails, "mean is not between the harmonic and arithmetic means");
  }
  const SpdMatrix target = log_euclidean_mean(w, as);
  LieTrotterReport rep;
  for (double p : p_sequence) {
    if (!(p > 0.0)) throw Error(ErrorCode::DomainError, "Lie-Trotter exponents must be positive");
    const SpdMatrix y = power(mean_value(spec, powered(as, p), c), 1.0 / p);
    const double gap = thompson_distance(y, target);
    if (!rep.gaps.empty() && gap > rep.gaps.back() + 1e-9) rep.nonincreasing = false;
    rep.p.push_back(p);
    rep.gaps.push_back(gap);
  }
  return rep;
}

CheckReport check_log_majorization(const Weights& w, std::span<const SpdMatrix> as, double r,
                                   const SolverConfig& cfg) {
  require_r_le1(r);
  const SolverConfig c = inner_config(cfg);
  const Vector g = eigenvalues_of(karcher_mean(w, as, c).value.matrix()).reverse();
  const Vector gr = eigenvalues_of(karcher_mean(w, powered(as, r), c).value.matrix()).reverse();
  const Eigen::Index n = g.size();
  double lhs = 0.0, rhs = 0.0;  // log partial products
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    lhs += std::log(gr(i));
    rhs += (r - 1.0) * std::log(g(n - 1 - i)) + std::log(g(i));
    // (e^{rhs} − e^{lhs}) / (e^{rhs} + e^{lhs})
    margin = std::min(margin, std::tanh(0.5 * (rhs - lhs)));
  }
  const double total_defect = std::abs(std::expm1(lhs - rhs));
  CheckReport rep;
  rep.inequality_id = "LM";
  rep.margin = margin;
  rep.holds = margin >= -kCheckTol && total_defect <= 1e-8;
  rep.constants = {{"r", r}, {"total_defect", total_defect}};
  attach_inputs(rep, as);
  return rep;
}

// ---------------------------------------------------------------------------

OptimalityMode parse_optimality_mode(std::string_view s) {
  if (s == "prop_6_1") return OptimalityMode::Prop61;
  if (s == "prop_6_2") return OptimalityMode::Prop62;
  throw Error(ErrorCode::BadMode, "unknown search mode '" + std::string(s) + "'");
}

std::string_view to_string(OptimalityMode m) {
  return m == OptimalityMode::Prop61 ? "prop_6_1" : "prop_6_2";
}

CheckReport check_optimality_instance(const RepFn& tau, const SpdMatrix& a, const SpdMatrix& b,
                                      double r, OptimalityMode mode) {
  if (!(r > 0.0)) throw Error(ErrorCode::BadR, "r must be positive");
  CheckReport rep;
  if (mode == OptimalityMode::Prop61) {
    // ‖A τ_{[r]} B‖^{r−1} (A τ_{[r]} B) ≤ A^r τ B^r
    const SpdMatrix y = two_var_mean(tau.power_inner_outer(r), a, b);
    const SpdMatrix z = two_var_mean(tau, power(a, r), power(b, r));
    const double pref = std::pow(op_norm(y), r - 1.0);
    rep = make_report("6.1", normalized_margin(pref * y.matrix(), z.matrix()));
    rep.constants = {{"r", r}, {"prefactor", pref}};
  } else {
    // Rescale so A τ B ≤ I is tight, then test A^r τ_{[1/r]} B^r ≤ I.
    const double beta = op_norm(two_var_mean(tau, a, b));
    const SpdMatrix as = a.scaled(1.0 / beta), bs = b.scaled(1.0 / beta);
    const SpdMatrix z = two_var_mean(tau.power_inner_outer(1.0 / r), power(as, r), power(bs, r));
    rep = make_report("6.3", normalized_margin(z.matrix(), Matrix::Identity(a.dim(), a.dim())));
    rep.constants = {{"r", r}, {"beta", beta}};
  }
  rep.matrices = {{"A", a}, {"B", b}};
  return rep;
}

namespace {

SpdMatrix rank_one_family(double t, double shift) {
  Matrix b(2, 2);
  const double off = std::sqrt(t * (1.0 - t));
  b << t + shift, off, off, 1.0 - t + shift;
  return SpdMatrix::unchecked(b);
}

struct Best {
  std::optional<Counterexample> cx;
  void offer(const RepFn& tau, OptimalityMode mode, double x, double y, double t, double r,
             double shift, const SpdMatrix& a, const SpdMatrix& b, double tol) {
    const CheckReport rep = check_optimality_instance(tau, a, b, r, mode);
    if (rep.margin < -tol && (!cx || rep.margin < cx->violation_margin)) {
      cx = Counterexample{mode, x, y, t, r, shift, a, b, rep.inequality_id, rep.margin};
    }
  }
};

}  // namespace

std::optional<Counterexample> optimality_scan(const RepFn& tau, double r, OptimalityMode mode,
                                              const SearchConfig& search) {
  if (!(r > 0.0)) throw Error(ErrorCode::BadR, "r must be positive");
  Best best;
  if (mode == OptimalityMode::Prop61) {
    const SpdMatrix a = SpdMatrix::identity(2);
    for (double x : log_grid(1e-4, 1.0, search.diag_points)) {
      Matrix b = Matrix::Identity(2, 2);
      b(1, 1) = x;
      best.offer(tau, mode, x, 1.0, 1.0, r, 0.0, a, SpdMatrix::unchecked(b), search.tol);
    }
    return best.cx;
  }

  if (tau.is_left_trivial() || tau.is_right_trivial()) {
    throw Error(ErrorCode::BadMode, "prop_6_2 search needs a nontrivial mean");
  }
  const auto diag_a = [](double x, double y) {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 1.0 / x;
    a(1, 1) = 1.0 / y;
    return SpdMatrix::unchecked(a);
  };
  const std::vector<double> axis = log_grid(search.x_lo, search.x_hi, search.xy_points);
  for (double t : search.t_values) {
    const SpdMatrix b = rank_one_family(t, search.shift);
    for (double x : axis) {
      for (double y : axis) {
        best.offer(tau, mode, x, y, t, r, search.shift, diag_a(x, y), b, search.tol);
      }
    }
  }
  // Near-identity family x = 1 + ε, y = 1 − ε, t = (1 + kε)/2.
  const std::vector<double> ks = linear_grid(-search.k_max, search.k_max, search.k_points);
  for (double eps : search.eps_values) {
    for (double k : ks) {
      const double t = 0.5 * (1.0 + k * eps);
      if (!(t > 0.0 && t < 1.0)) continue;
      const double x = 1.0 + eps, y = 1.0 - eps;
      best.offer(tau, mode, x, y, t, r, search.shift, diag_a(x, y),
                 rank_one_family(t, search.shift), search.tol);
    }
  }
  return best.cx;
}

}  // namespace opmeans
