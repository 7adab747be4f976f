#include "opmeans/repfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace opmeans {

struct RepFn::State {
  RepKind kind = RepKind::RightTrivial;
  double param = 0.0;
  std::vector<Term> terms;
  std::shared_ptr<const RepFn> tau;
  std::shared_ptr<const RepFn> sigma;
  SolverConfig cfg;
  std::vector<Transform> transforms;
  double deriv1 = 1.0;
};

namespace {

constexpr double kDerivStep = 1e-6;
constexpr double kTrivialSlope = 1e-8;

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::DomainError, std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

std::string_view to_string(RepKind kind) {
  switch (kind) {
    case RepKind::LeftTrivial: return "LeftTrivial";
    case RepKind::RightTrivial: return "RightTrivial";
    case RepKind::Arithmetic: return "Arithmetic";
    case RepKind::Harmonic: return "Harmonic";
    case RepKind::Geometric: return "Geometric";
    case RepKind::ConvexCombo: return "ConvexCombo";
    case RepKind::Example37: return "Example37";
    case RepKind::Deformed: return "Deformed";
  }
  return "Unknown";
}

std::string_view to_string(TransformOp op) {
  switch (op) {
    case TransformOp::Adjoint: return "Adjoint";
    case TransformOp::Transpose: return "Transpose";
    case TransformOp::PowerInner: return "PowerInner";
    case TransformOp::PowerInnerOuter: return "PowerInnerOuter";
    case TransformOp::PowerOuter: return "PowerOuter";
  }
  return "Unknown";
}

RepFn RepFn::make(State s) {
  auto ptr = std::make_shared<State>(std::move(s));
  RepFn f(ptr);
  ptr->deriv1 = (f(1.0 + kDerivStep) - f(1.0 - kDerivStep)) / (2.0 * kDerivStep);
  return f;
}

RepFn RepFn::left_trivial() { return make({.kind = RepKind::LeftTrivial}); }
RepFn RepFn::right_trivial() { return make({.kind = RepKind::RightTrivial}); }

RepFn RepFn::arithmetic(double w) {
  require_unit(w, "arithmetic weight");
  return make({.kind = RepKind::Arithmetic, .param = w});
}

RepFn RepFn::harmonic(double alpha) {
  require_unit(alpha, "harmonic weight");
  return make({.kind = RepKind::Harmonic, .param = alpha});
}

RepFn RepFn::geometric(double alpha) {
  require_unit(alpha, "geometric weight");
  return make({.kind = RepKind::Geometric, .param = alpha});
}

RepFn RepFn::convex_combo(std::vector<Term> terms) {
  if (terms.empty()) throw Error(ErrorCode::MissingParameter, "convex combination has no terms");
  double total = 0.0;
  for (const auto& t : terms) {
    if (!(t.weight >= 0.0)) throw Error(ErrorCode::DomainError, "negative convex weight");
    total += t.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::DomainError, "convex weights must sum to 1");
  }
  return make({.kind = RepKind::ConvexCombo, .terms = std::move(terms)});
}

RepFn RepFn::example37() { return make({.kind = RepKind::Example37}); }

RepFn RepFn::deformed(const RepFn& tau, const RepFn& sigma, const SolverConfig& cfg) {
  if (sigma.is_left_trivial()) {
    throw Error(ErrorCode::SigmaIsLeftTrivial, "cannot deform by the left trivial mean");
  }
  return make({.kind = RepKind::Deformed,
               .tau = std::make_shared<const RepFn>(tau),
               .sigma = std::make_shared<const RepFn>(sigma),
               .cfg = cfg});
}

RepFn RepFn::with(TransformOp op, std::optional<double> r) const {
  const bool needs_r = op == TransformOp::PowerInner || op == TransformOp::PowerInnerOuter ||
                       op == TransformOp::PowerOuter;
  Transform t{op, 1.0};
  if (needs_r) {
    if (!r) throw Error(ErrorCode::MissingParameter, std::string(to_string(op)) + " needs r");
    if (!(*r > 0.0) || !std::isfinite(*r)) {
      throw Error(ErrorCode::DomainError, "transform exponent must be positive");
    }
    if (op == TransformOp::PowerOuter && *r > 1.0) {
      throw Error(ErrorCode::DomainError, "PowerOuter exponent must lie in (0, 1]");
    }
    t.r = *r;
  }
  State next = *s_;
  next.transforms.push_back(t);
  return make(std::move(next));
}

double RepFn::eval_base(double t) const {
  switch (s_->kind) {
    case RepKind::LeftTrivial: return 1.0;
    case RepKind::RightTrivial: return t;
    case RepKind::Arithmetic: return 1.0 - s_->param + s_->param * t;
    case RepKind::Harmonic: return 1.0 / (1.0 - s_->param + s_->param / t);
    case RepKind::Geometric: return std::pow(t, s_->param);
    case RepKind::Example37: return 0.25 * (t + 1.0) / 2.0 + 0.75 * (2.0 * t / (t + 1.0));
    case RepKind::ConvexCombo: {
      double acc = 0.0;
      for (const auto& term : s_->terms) acc += term.weight * term.fn(t);
      return acc;
    }
    case RepKind::Deformed: return deformed_rep(*s_->tau, *s_->sigma, t, s_->cfg);
  }
  return t;
}

double RepFn::eval_level(std::size_t level, double t) const {
  if (level == 0) return eval_base(t);
  const Transform& tr = s_->transforms[level - 1];
  switch (tr.op) {
    case TransformOp::Adjoint: return 1.0 / eval_level(level - 1, 1.0 / t);
    case TransformOp::Transpose: return t * eval_level(level - 1, 1.0 / t);
    case TransformOp::PowerInner: return eval_level(level - 1, std::pow(t, tr.r));
    case TransformOp::PowerInnerOuter:
      return std::pow(eval_level(level - 1, std::pow(t, tr.r)), 1.0 / tr.r);
    case TransformOp::PowerOuter: return std::pow(eval_level(level - 1, t), tr.r);
  }
  return t;
}

double RepFn::operator()(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::DomainError, "representing function needs t > 0, got " +
                                            std::to_string(t));
  }
  return eval_level(s_->transforms.size(), t);
}

double RepFn::derivative_at_one() const { return s_->deriv1; }
bool RepFn::is_left_trivial() const { return std::abs(s_->deriv1) < kTrivialSlope; }
// f'(1) = 1 forces f(x) = x for an operator monotone f with f(1) = 1.
bool RepFn::is_right_trivial() const { return std::abs(s_->deriv1 - 1.0) < kTrivialSlope; }

RepKind RepFn::kind() const { return s_->kind; }
double RepFn::param() const { return s_->param; }
const std::vector<RepFn::Term>& RepFn::terms() const { return s_->terms; }
const std::vector<Transform>& RepFn::transforms() const { return s_->transforms; }

const RepFn& RepFn::tau() const {
  if (!s_->tau) throw Error(ErrorCode::MissingParameter, "not a deformed representing function");
  return *s_->tau;
}

const RepFn& RepFn::sigma() const {
  if (!s_->sigma) throw Error(ErrorCode::MissingParameter, "not a deformed representing function");
  return *s_->sigma;
}

double rep_eval(const RepFn& f, double t) { return f(t); }

RepFn rep_transform(const RepFn& f, TransformOp op, std::optional<double> r) {
  return f.with(op, r);
}

double scalar_mean(const RepFn& f, double a, double b) { return a * f(b / a); }

SpdMatrix two_var_mean(const RepFn& f, const CongruenceFrame& a, const SpdMatrix& b) {
  if (a.half().rows() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "two_var_mean on different dimensions");
  }
  // Whitening a nearly singular B can leave eigenvalues that are zero up to rounding; those are
  // evaluated at the smallest positive double, i.e. as f(0+).
  const Spectrum s = spectrum_of(a.whiten(b.matrix()));
  const double noise = 1024 * std::numeric_limits<double>::epsilon() * s.values.cwiseAbs().maxCoeff();
  const Matrix inner = spectral_apply(s, [&f, noise](double x) {
    return f(x <= 0.0 && x >= -noise ? std::numeric_limits<double>::min() : x);
  });
  return SpdMatrix::unchecked(a.color(inner));
}

SpdMatrix two_var_mean(const RepFn& f, const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "two_var_mean on different dimensions");
  }
  return two_var_mean(f, CongruenceFrame(a), b);
}

namespace {

// Residual of f_σ(1/x) f_τ(f_σ(t/x)/f_σ(1/x)) = 1. Decreasing in x.
double deformed_residual(const RepFn& tau, const RepFn& sigma, double t, double x) {
  const double lo = sigma(1.0 / x);
  return lo * tau(sigma(t / x) / lo) - 1.0;
}

}  // namespace

double deformed_rep(const RepFn& tau, const RepFn& sigma, double t, const SolverConfig& cfg) {
  if (sigma.is_left_trivial()) {
    throw Error(ErrorCode::SigmaIsLeftTrivial, "cannot deform by the left trivial mean");
  }
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::DomainError, "deformed_rep needs t > 0");
  }
  // Fixed point x ← (x σ 1) τ (x σ t) = x·(1 + residual(x)).
  double x = 1.0;
  for (int it = 0; it < cfg.scalar_max_iters; ++it) {
    const double g = deformed_residual(tau, sigma, t, x);
    if (std::abs(g) < cfg.scalar_tol) return x;
    x *= 1.0 + g;
    if (!(x > 0.0) || !std::isfinite(x)) break;
  }

  // Bisection in log x on the bracket [min(1,t), max(1,t)].
  double lo = std::log(std::min(1.0, t));
  double hi = std::log(std::max(1.0, t));
  const double g_lo = deformed_residual(tau, sigma, t, std::exp(lo));
  const double g_hi = deformed_residual(tau, sigma, t, std::exp(hi));
  if (g_lo < -cfg.scalar_tol || g_hi > cfg.scalar_tol) {
    throw Error(ErrorCode::NoConvergence, "deformed_rep bracket does not straddle the root");
  }
  if (std::abs(g_lo) < cfg.scalar_tol) return std::exp(lo);
  if (std::abs(g_hi) < cfg.scalar_tol) return std::exp(hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = deformed_residual(tau, sigma, t, std::exp(mid));
    if (std::abs(g) < cfg.scalar_tol || hi - lo < 4 * std::numeric_limits<double>::epsilon()) {
      return std::exp(mid);
    }
    (g > 0 ? lo : hi) = mid;
  }
  throw Error(ErrorCode::NoConvergence, "deformed_rep bisection did not converge");
}

namespace {

template <class Quantity>
MarginReport grid_margin(const std::vector<double>& x_grid, const std::vector<double>& r_grid,
                         Quantity&& q) {
  if (x_grid.empty() || r_grid.empty()) {
    throw Error(ErrorCode::DomainError, "margin grids must be nonempty");
  }
  MarginReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  rep.grid_size = x_grid.size() * r_grid.size();
  for (double r : r_grid) {
    if (!(r >= 1.0)) throw Error(ErrorCode::DomainError, "r grid must lie in [1, ∞)");
    for (double x : x_grid) {
      const double v = q(x, r);
      if (v < rep.worst_margin) {
        rep.worst_margin = v;
        rep.worst_x = x;
        rep.worst_r = r;
      }
    }
  }
  return rep;
}

}  // namespace

MarginReport pmi_margin(const RepFn& f, const std::vector<double>& x_grid,
                        const std::vector<double>& r_grid) {
  return grid_margin(x_grid, r_grid, [&f](double x, double r) {
    if (r == 1.0) return 0.0;
    return f(std::pow(x, r)) - std::pow(f(x), r);
  });
}

MarginReport condition_vi_margin(const RepFn& f, const std::vector<double>& x_grid,
                                 const std::vector<double>& r_grid) {
  return grid_margin(x_grid, r_grid, [&f](double x, double r) {
    if (r == 1.0) return 0.0;
    return f(std::pow(x, r)) - r * f(x) + r - 1.0;
  });
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  if (n == 1) return {lo};
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  if (n == 1) return {lo};
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return g;
}

std::vector<double> default_x_grid() {
  auto g = log_grid(1e-3, 1e3, 200);
  g.push_back(2.0);
  std::sort(g.begin(), g.end());
  return g;
}

std::vector<double> default_r_grid() {
  auto g = linear_grid(1.0, 8.0, 50);
  for (double& r : g) r = std::round(r * 7.0) / 7.0;  // exact multiples of 1/7, so 3 is on-grid
  return g;
}

}  // namespace opmeans
