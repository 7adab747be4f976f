#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "opmeans/config.hpp"
#include "opmeans/spd.hpp"

namespace opmeans {

enum class RepKind {
  LeftTrivial,
  RightTrivial,
  Arithmetic,  // 1 − w + w x
  Harmonic,    // (1 − α + α/x)^{-1}
  Geometric,   // x^α
  ConvexCombo,
  Example37,   // ¼·(x+1)/2 + ¾·2x/(x+1)
  Deformed,    // f_{τ_σ}, solved pointwise
};

enum class TransformOp {
  Adjoint,          // f ↦ 1/f(1/x)
  Transpose,        // f ↦ x f(1/x)
  PowerInner,       // f ↦ f(x^r)
  PowerInnerOuter,  // f ↦ f(x^r)^{1/r}
  PowerOuter,       // f ↦ f(x)^p, p ∈ (0, 1]
};

struct Transform {
  TransformOp op;
  double r = 1.0;
};

std::string_view to_string(RepKind kind);
std::string_view to_string(TransformOp op);

/// Representing function of a Kubo-Ando operator mean: a catalog entry with an
/// ordered stack of transforms. Immutable; copies share their state.
class RepFn {
 public:
  struct Term;

  static RepFn left_trivial();
  static RepFn right_trivial();
  static RepFn arithmetic(double w);
  static RepFn harmonic(double alpha);
  static RepFn geometric(double alpha);
  static RepFn convex_combo(std::vector<Term> terms);
  static RepFn example37();
  /// f_{τ_σ}; throws SigmaIsLeftTrivial.
  static RepFn deformed(const RepFn& tau, const RepFn& sigma, const SolverConfig& cfg = {});

  /// Appends a transform. Throws MissingParameter when a power transform has no exponent.
  RepFn with(TransformOp op, std::optional<double> r = std::nullopt) const;
  RepFn adjoint() const { return with(TransformOp::Adjoint); }
  RepFn transpose() const { return with(TransformOp::Transpose); }
  RepFn power_inner(double r) const { return with(TransformOp::PowerInner, r); }
  RepFn power_inner_outer(double r) const { return with(TransformOp::PowerInnerOuter, r); }
  RepFn power_outer(double p) const { return with(TransformOp::PowerOuter, p); }

  double operator()(double t) const;
  double derivative_at_one() const;
  bool is_left_trivial() const;
  bool is_right_trivial() const;

  RepKind kind() const;
  /// w for Arithmetic, α for Harmonic/Geometric, 0 otherwise.
  double param() const;
  const std::vector<Term>& terms() const;
  const std::vector<Transform>& transforms() const;
  const RepFn& tau() const;
  const RepFn& sigma() const;

 private:
  struct State;
  explicit RepFn(std::shared_ptr<const State> s) : s_(std::move(s)) {}
  static RepFn make(State s);
  double eval_base(double t) const;
  double eval_level(std::size_t level, double t) const;

  std::shared_ptr<const State> s_;
};

struct RepFn::Term {
  double weight;
  RepFn fn;
};

/// rep_eval / rep_transform as free functions.
double rep_eval(const RepFn& f, double t);
RepFn rep_transform(const RepFn& f, TransformOp op, std::optional<double> r = std::nullopt);

/// Scalar a σ b = a f(b/a).
double scalar_mean(const RepFn& f, double a, double b);

/// A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}.
SpdMatrix two_var_mean(const RepFn& f, const SpdMatrix& a, const SpdMatrix& b);
/// Same with a precomputed frame for A.
SpdMatrix two_var_mean(const RepFn& f, const CongruenceFrame& a, const SpdMatrix& b);

/// Unique x > 0 with (x σ 1) τ (x σ t) = x, i.e. the representing function of τ_σ at t.
double deformed_rep(const RepFn& tau, const RepFn& sigma, double t, const SolverConfig& cfg = {});

struct MarginReport {
  double worst_margin = 0.0;
  double worst_x = 1.0;
  double worst_r = 1.0;
  std::size_t grid_size = 0;
};

/// min over the grid of f(x^r) − f(x)^r. Negative certifies failure of power monotonicity.
MarginReport pmi_margin(const RepFn& f, const std::vector<double>& x_grid,
                        const std::vector<double>& r_grid);
/// min over the grid of f(x^r) − r f(x) + r − 1.
MarginReport condition_vi_margin(const RepFn& f, const std::vector<double>& x_grid,
                                 const std::vector<double>& r_grid);

std::vector<double> log_grid(double lo, double hi, std::size_t n);
std::vector<double> linear_grid(double lo, double hi, std::size_t n);
/// 200 log-spaced points in [1e-3, 1e3] plus the witness x = 2.
std::vector<double> default_x_grid();
/// 50 equally spaced points in [1, 8] (contains r = 3).
std::vector<double> default_r_grid();

}  // namespace opmeans
