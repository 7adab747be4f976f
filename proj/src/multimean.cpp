#include "opmeans/multimean.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace opmeans {

Weights::Weights(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::ArityMismatch, "weights must be nonempty");
  double total = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::DomainError, "weights must be nonnegative");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::DomainError, "weights must sum to 1, got " + std::to_string(total));
  }
}

Weights Weights::uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::ArityMismatch, "weights must be nonempty");
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  // Put the rounding remainder on the last entry so the sum is 1 to machine precision.
  v.back() = 1.0 - std::accumulate(v.begin(), v.end() - 1, 0.0);
  return Weights(std::move(v));
}

MultiMeanSpec MultiMeanSpec::arithmetic(Weights w) { return MultiMeanSpec(mean_kind::Arithmetic{std::move(w)}); }
MultiMeanSpec MultiMeanSpec::harmonic(Weights w) { return MultiMeanSpec(mean_kind::Harmonic{std::move(w)}); }
MultiMeanSpec MultiMeanSpec::karcher(Weights w) { return MultiMeanSpec(mean_kind::Karcher{std::move(w)}); }

MultiMeanSpec MultiMeanSpec::deformed(const MultiMeanSpec& base, RepFn sigma) {
  if (sigma.is_left_trivial()) {
    throw Error(ErrorCode::SigmaIsLeftTrivial, "cannot deform by the left trivial mean");
  }
  return MultiMeanSpec(
      mean_kind::Deformed{std::make_shared<const MultiMeanSpec>(base), std::move(sigma)});
}

MultiMeanSpec MultiMeanSpec::power(Weights w, double alpha) {
  if (alpha == 0.0) throw Error(ErrorCode::AlphaZero, "power mean exponent must be nonzero");
  if (!(std::abs(alpha) <= 1.0)) {
    throw Error(ErrorCode::DomainError, "power mean exponent must lie in [-1, 1]");
  }
  return MultiMeanSpec(mean_kind::Power{std::move(w), alpha});
}

MultiMeanSpec MultiMeanSpec::adjoint_of(const MultiMeanSpec& inner) {
  return MultiMeanSpec(mean_kind::AdjointOf{std::make_shared<const MultiMeanSpec>(inner)});
}

const Weights& MultiMeanSpec::weights() const {
  struct Visitor {
    const Weights& operator()(const mean_kind::Arithmetic& k) const { return k.w; }
    const Weights& operator()(const mean_kind::Harmonic& k) const { return k.w; }
    const Weights& operator()(const mean_kind::Deformed& k) const { return k.base->weights(); }
    const Weights& operator()(const mean_kind::Power& k) const { return k.w; }
    const Weights& operator()(const mean_kind::Karcher& k) const { return k.w; }
    const Weights& operator()(const mean_kind::AdjointOf& k) const { return k.inner->weights(); }
  };
  return std::visit(Visitor{}, v_);
}

namespace {

void check_ensemble(std::span<const SpdMatrix> as, std::size_t arity) {
  if (as.empty()) throw Error(ErrorCode::ArityMismatch, "mean of an empty ensemble");
  if (as.size() != arity) {
    throw Error(ErrorCode::ArityMismatch, "expected " + std::to_string(arity) +
                                              " matrices, got " + std::to_string(as.size()));
  }
  for (const auto& a : as) {
    if (a.dim() != as.front().dim()) {
      throw Error(ErrorCode::DimensionMismatch, "ensemble matrices differ in dimension");
    }
  }
}

bool all_equal(std::span<const SpdMatrix> as) {
  return std::all_of(as.begin(), as.end(),
                     [&](const SpdMatrix& a) { return a.matrix() == as.front().matrix(); });
}

MeanResult trivial_result(const SpdMatrix& a) { return {a, 0, 0.0, std::nullopt}; }

}  // namespace

Ensemble inverted(std::span<const SpdMatrix> as) {
  Ensemble out;
  out.reserve(as.size());
  for (const auto& a : as) out.push_back(inverse(a));
  return out;
}

Ensemble powered(std::span<const SpdMatrix> as, double r) {
  Ensemble out;
  out.reserve(as.size());
  for (const auto& a : as) out.push_back(power(a, r));
  return out;
}

SpdMatrix elementary_mean(ElementaryKind kind, const Weights& w, std::span<const SpdMatrix> as) {
  check_ensemble(as, w.size());
  const Eigen::Index d = as.front().dim();
  Matrix acc = Matrix::Zero(d, d);
  if (kind == ElementaryKind::Arithmetic) {
    for (std::size_t j = 0; j < as.size(); ++j) acc += w[j] * as[j].matrix();
    return SpdMatrix::unchecked(acc);
  }
  for (std::size_t j = 0; j < as.size(); ++j) acc += w[j] * inverse(as[j]).matrix();
  return inverse(SpdMatrix::unchecked(acc));
}

namespace {

/// Whitening by X^{-1/2} amplifies rounding by roughly the condition number of the inputs.
double roundoff_floor(std::span<const SpdMatrix> as) {
  double kappa = 1.0;
  for (const auto& a : as) kappa = std::max(kappa, spectral_stats(a).condition_number);
  return 256.0 * std::numeric_limits<double>::epsilon() * kappa;
}

}  // namespace

MeanResult deformed_mean(const MultiMeanSpec& base, const RepFn& sigma,
                         std::span<const SpdMatrix> as, const SolverConfig& cfg) {
  cfg.validate();
  if (sigma.is_left_trivial()) {
    throw Error(ErrorCode::SigmaIsLeftTrivial, "cannot deform by the left trivial mean");
  }
  check_ensemble(as, base.arity());
  if (as.size() == 1 || all_equal(as)) return trivial_result(as.front());
  // X σ A = A for the right trivial mean, so the fixed point is M(A_1, …, A_n) itself.
  if (sigma.is_right_trivial()) return evaluate(base, as, cfg);

  double delta = 1.0;
  for (const auto& a : as) {
    const SpectralStats s = spectral_stats(a);
    delta = std::min({delta, s.lambda_min, 1.0 / s.op_norm});
  }
  delta = std::max(delta, cfg.delta_floor);

  const Eigen::Index d = as.front().dim();
  SpdMatrix x = SpdMatrix::identity(d).scaled(1.0 / delta);
  SolverConfig inner = cfg;
  inner.certify_karcher = false;
  // Steps below the rounding floor of the whitened inputs are noise.
  const double target = std::max(cfg.dt_tol, roundoff_floor(as));
  // Iterates decrease in Loewner order; nested iterative bases add their own tolerance.
  const double mono_tol = std::max(cfg.loewner_tol, 10.0 * target);
  Ensemble ys(as.size());
  double step = 0.0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const CongruenceFrame frame(x);
    for (std::size_t j = 0; j < as.size(); ++j) ys[j] = two_var_mean(sigma, frame, as[j]);
    SpdMatrix next = evaluate(base, ys, inner).value;
    step = thompson_distance(x, next);
    const LoewnerVerdict v = loewner_compare(next, x, mono_tol);
    if (v.relation != LoewnerRelation::LessEqual && v.relation != LoewnerRelation::Equal) {
      throw Error(ErrorCode::SolverInvariant,
                  "fixed-point iterate increased at step " + std::to_string(it));
    }
    x = std::move(next);
    if (step < target) return {x, it, step, std::nullopt};
  }
  throw NoConvergenceError("deformed mean did not converge in " +
                               std::to_string(cfg.max_iters) + " iterations",
                           {x, cfg.max_iters, step, std::nullopt});
}

LoewnerVerdict comparison_bound(const MultiMeanSpec& base, const RepFn& sigma,
                                std::span<const SpdMatrix> as, const SpdMatrix& y,
                                BoundDirection direction, const SolverConfig& cfg) {
  check_ensemble(as, base.arity());
  if (y.dim() != as.front().dim()) {
    throw Error(ErrorCode::DimensionMismatch, "comparison point has the wrong dimension");
  }
  const CongruenceFrame frame(y);
  Ensemble ys;
  for (const auto& a : as) ys.push_back(two_var_mean(sigma, frame, a));
  const SpdMatrix image = evaluate(base, ys, cfg).value;

  const bool lower = direction == BoundDirection::Lower;
  const LoewnerVerdict hyp = lower ? loewner_compare(y, image, cfg.loewner_tol)
                                   : loewner_compare(image, y, cfg.loewner_tol);
  if (hyp.relation != LoewnerRelation::LessEqual && hyp.relation != LoewnerRelation::Equal) {
    throw Error(ErrorCode::HypothesisFails,
                "premise of the comparison principle does not hold (margin " +
                    std::to_string(hyp.margin) + ")");
  }
  const SpdMatrix x = deformed_mean(base, sigma, as, cfg).value;
  return loewner_compare(y, x, cfg.loewner_tol);
}

MeanResult power_mean(const Weights& w, double alpha, std::span<const SpdMatrix> as,
                      const SolverConfig& cfg) {
  if (alpha == 0.0) throw Error(ErrorCode::AlphaZero, "power mean exponent must be nonzero");
  if (!(std::abs(alpha) <= 1.0)) {
    throw Error(ErrorCode::DomainError, "power mean exponent must lie in [-1, 1]");
  }
  if (alpha > 0.0) {
    return deformed_mean(MultiMeanSpec::arithmetic(w), RepFn::geometric(alpha), as, cfg);
  }
  const Ensemble inv = inverted(as);
  MeanResult r = power_mean(w, -alpha, inv, cfg);
  r.value = inverse(r.value);
  return r;
}

namespace {

struct KarcherStep {
  Matrix grad;
  double theta;  // step length adapted to the spread of the whitened inputs
};

// Σ w_j log(X^{-1/2} A_j X^{-1/2}) and the step 2 / Σ w_j ((c_j+1)/(c_j−1)) log c_j, where
// c_j is the condition number of the j-th whitened input; the step is 1 when all c_j are 1.
KarcherStep karcher_step(const Weights& w, std::span<const SpdMatrix> as,
                         const CongruenceFrame& frame) {
  const Eigen::Index d = as.front().dim();
  KarcherStep out{Matrix::Zero(d, d), 1.0};
  double denom = 0.0;
  for (std::size_t j = 0; j < as.size(); ++j) {
    const Spectrum s = spectrum_of(frame.whiten(as[j].matrix()));
    out.grad += w[j] * spectral_apply(s, [](double v) { return std::log(v); });
    const double lc = std::log(s.values(s.values.size() - 1) / s.values(0));
    // (c+1)/(c−1)·log c = log c / tanh(log c / 2) → 2 as c → 1.
    denom += w[j] * (lc < 1e-8 ? 2.0 : lc / std::tanh(lc / 2.0));
  }
  out.theta = 2.0 / denom;
  return out;
}

// Rounding noise in the residual at x, estimated by recomputing the gradient spectrum through a
// Cholesky whitening instead of the symmetric square root. Both frames give the same spectrum in
// exact arithmetic.
double gradient_noise(const Weights& w, std::span<const SpdMatrix> as, const SpdMatrix& x,
                      const Matrix& grad) {
  const Eigen::LLT<Matrix> llt(x.matrix());
  const Eigen::Index d = x.dim();
  Matrix g = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < as.size(); ++j) {
    const Matrix half = llt.matrixL().solve(as[j].matrix());
    const Matrix white = llt.matrixL().solve(half.transpose());
    g += w[j] * symmetric_function(0.5 * (white + white.transpose()),
                                   [](double v) { return std::log(v); });
  }
  return (eigenvalues_of(g) - eigenvalues_of(0.5 * (grad + grad.transpose()))).cwiseAbs().maxCoeff();
}

}  // namespace

double karcher_residual(const Weights& w, std::span<const SpdMatrix> as, const SpdMatrix& x) {
  check_ensemble(as, w.size());
  return sym_norm(karcher_step(w, as, CongruenceFrame(x)).grad);
}

SpdMatrix log_euclidean_mean(const Weights& w, std::span<const SpdMatrix> as) {
  check_ensemble(as, w.size());
  const Eigen::Index d = as.front().dim();
  Matrix acc = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < as.size(); ++j) {
    acc += w[j] * matrix_function(as[j], [](double v) { return std::log(v); });
  }
  return SpdMatrix::unchecked(symmetric_function(acc, [](double v) { return std::exp(v); }));
}

MeanResult karcher_mean(const Weights& w, std::span<const SpdMatrix> as, const SolverConfig& cfg) {
  cfg.validate();
  check_ensemble(as, w.size());
  if (as.size() == 1 || all_equal(as)) {
    MeanResult r = trivial_result(as.front());
    if (cfg.certify_karcher) r.enclosure_gap = 0.0;
    return r;
  }

  SpdMatrix x = elementary_mean(ElementaryKind::Arithmetic, w, as);
  CongruenceFrame frame(x);
  KarcherStep cur = karcher_step(w, as, frame);
  double res = sym_norm(cur.grad);
  // Below the rounding floor further damping cannot make progress.
  const double target = std::max(cfg.dt_tol, roundoff_floor(as));
  // Extra damping: halved when the residual grows, doubled back (up to 1) after a success.
  double damping = 1.0;
  int it = 0;
  while (res >= target) {
    if (it >= cfg.max_iters) {
      throw NoConvergenceError("Karcher iteration did not converge in " +
                                   std::to_string(cfg.max_iters) + " iterations",
                               {x, it, res, std::nullopt});
    }
    ++it;
    const Matrix step = symmetric_function(cur.grad * (damping * cur.theta),
                                           [](double v) { return std::exp(v); });
    const SpdMatrix cand = SpdMatrix::unchecked(frame.color(step));
    const CongruenceFrame cand_frame(cand);
    KarcherStep next = karcher_step(w, as, cand_frame);
    const double cand_res = sym_norm(next.grad);
    if (cand_res > res) {
      damping *= 0.5;
      if (damping < 1e-12) {
        // No descent direction left: accept only if the residual is at its rounding noise.
        if (res <= 4.0 * gradient_noise(w, as, x, cur.grad)) break;
        throw NoConvergenceError("Karcher damping collapsed", {x, it, res, std::nullopt});
      }
      continue;
    }
    x = cand;
    frame = cand_frame;
    cur = std::move(next);
    res = cand_res;
    damping = std::min(1.0, 2.0 * damping);
  }

  MeanResult out{x, it, res, std::nullopt};
  if (cfg.certify_karcher) {
    const SpdMatrix hi = power_mean(w, cfg.karcher_alpha, as, cfg).value;
    const SpdMatrix lo = power_mean(w, -cfg.karcher_alpha, as, cfg).value;
    const auto below = loewner_compare(lo, x, cfg.loewner_tol).relation;
    const auto above = loewner_compare(x, hi, cfg.loewner_tol).relation;
    const auto ok = [](LoewnerRelation r) {
      return r == LoewnerRelation::LessEqual || r == LoewnerRelation::Equal;
    };
    if (!ok(below) || !ok(above)) {
      throw Error(ErrorCode::CertificationFailure,
                  "Karcher solution escapes the power-mean enclosure");
    }
    out.enclosure_gap = thompson_distance(hi, lo);
  }
  return out;
}

MeanResult adjoint_eval(const MultiMeanSpec& spec, std::span<const SpdMatrix> as,
                        const SolverConfig& cfg) {
  const Ensemble inv = inverted(as);
  MeanResult r = evaluate(spec, inv, cfg);
  r.value = inverse(r.value);
  return r;
}

MeanResult evaluate(const MultiMeanSpec& spec, std::span<const SpdMatrix> as,
                    const SolverConfig& cfg) {
  struct Visitor {
    std::span<const SpdMatrix> as;
    const SolverConfig& cfg;
    MeanResult operator()(const mean_kind::Arithmetic& k) const {
      return trivial_result(elementary_mean(ElementaryKind::Arithmetic, k.w, as));
    }
    MeanResult operator()(const mean_kind::Harmonic& k) const {
      return trivial_result(elementary_mean(ElementaryKind::Harmonic, k.w, as));
    }
    MeanResult operator()(const mean_kind::Deformed& k) const {
      return deformed_mean(*k.base, k.sigma, as, cfg);
    }
    MeanResult operator()(const mean_kind::Power& k) const {
      return power_mean(k.w, k.alpha, as, cfg);
    }
    MeanResult operator()(const mean_kind::Karcher& k) const { return karcher_mean(k.w, as, cfg); }
    MeanResult operator()(const mean_kind::AdjointOf& k) const {
      return adjoint_eval(*k.inner, as, cfg);
    }
  };
  return std::visit(Visitor{as, cfg}, spec.kind());
}

SpdMatrix mean_value(const MultiMeanSpec& spec, std::span<const SpdMatrix> as,
                     const SolverConfig& cfg) {
  return evaluate(spec, as, cfg).value;
}

}  // namespace opmeans
