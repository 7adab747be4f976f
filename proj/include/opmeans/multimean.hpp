#pragma once

#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "opmeans/config.hpp"
#include "opmeans/repfn.hpp"
#include "opmeans/spd.hpp"

namespace opmeans {

/// Probability vector.
class Weights {
 public:
  explicit Weights(std::vector<double> values);
  static Weights uniform(std::size_t n);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

class MultiMeanSpec;

namespace mean_kind {
struct Arithmetic { Weights w; };
struct Harmonic { Weights w; };
struct Deformed { std::shared_ptr<const MultiMeanSpec> base; RepFn sigma; };
struct Power { Weights w; double alpha; };
struct Karcher { Weights w; };
struct AdjointOf { std::shared_ptr<const MultiMeanSpec> inner; };
}  // namespace mean_kind

/// Description of an n-variable mean; evaluation recurses through nested kinds.
class MultiMeanSpec {
 public:
  using Variant = std::variant<mean_kind::Arithmetic, mean_kind::Harmonic, mean_kind::Deformed,
                               mean_kind::Power, mean_kind::Karcher, mean_kind::AdjointOf>;

  static MultiMeanSpec arithmetic(Weights w);
  static MultiMeanSpec harmonic(Weights w);
  static MultiMeanSpec deformed(const MultiMeanSpec& base, RepFn sigma);
  static MultiMeanSpec power(Weights w, double alpha);
  static MultiMeanSpec karcher(Weights w);
  static MultiMeanSpec adjoint_of(const MultiMeanSpec& inner);

  const Variant& kind() const { return v_; }
  /// Weights of the innermost elementary/power/Karcher mean.
  const Weights& weights() const;
  std::size_t arity() const { return weights().size(); }

 private:
  explicit MultiMeanSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct MeanResult {
  SpdMatrix value;
  int iterations = 0;
  double residual_dt = 0.0;
  std::optional<double> enclosure_gap;  // Karcher only
};

/// Raised by the iterative solvers; carries the last iterate.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, MeanResult last)
      : Error(ErrorCode::NoConvergence, what), last_(std::move(last)) {}
  const MeanResult& last() const { return last_; }

 private:
  MeanResult last_;
};

using Ensemble = std::vector<SpdMatrix>;

enum class ElementaryKind { Arithmetic, Harmonic };

SpdMatrix elementary_mean(ElementaryKind kind, const Weights& w, std::span<const SpdMatrix> as);

/// Unique X with X = M(X σ A_1, …, X σ A_n), iterated down from δ^{-1} I.
MeanResult deformed_mean(const MultiMeanSpec& base, const RepFn& sigma,
                         std::span<const SpdMatrix> as, const SolverConfig& cfg = {});

enum class BoundDirection { Lower, Upper };

/// Checks Y ≤ M(YσA…) (Lower) or Y ≥ M(YσA…) (Upper) and compares Y with M_σ(A…).
/// Throws HypothesisFails when the premise does not hold.
LoewnerVerdict comparison_bound(const MultiMeanSpec& base, const RepFn& sigma,
                                std::span<const SpdMatrix> as, const SpdMatrix& y,
                                BoundDirection direction, const SolverConfig& cfg = {});

MeanResult power_mean(const Weights& w, double alpha, std::span<const SpdMatrix> as,
                      const SolverConfig& cfg = {});

/// Damped exp-log iteration for Σ w_j log(X^{-1/2} A_j X^{-1/2}) = 0, optionally certified
/// by P_{ω,−α} ≤ X ≤ P_{ω,α}.
MeanResult karcher_mean(const Weights& w, std::span<const SpdMatrix> as,
                        const SolverConfig& cfg = {});

/// M(A_1^{-1}, …, A_n^{-1})^{-1}.
MeanResult adjoint_eval(const MultiMeanSpec& spec, std::span<const SpdMatrix> as,
                        const SolverConfig& cfg = {});

MeanResult evaluate(const MultiMeanSpec& spec, std::span<const SpdMatrix> as,
                    const SolverConfig& cfg = {});

/// Convenience: evaluate(...).value.
SpdMatrix mean_value(const MultiMeanSpec& spec, std::span<const SpdMatrix> as,
                     const SolverConfig& cfg = {});

/// ‖Σ w_j log(X^{-1/2} A_j X^{-1/2})‖_∞.
double karcher_residual(const Weights& w, std::span<const SpdMatrix> as, const SpdMatrix& x);

/// exp(Σ w_j log A_j).
SpdMatrix log_euclidean_mean(const Weights& w, std::span<const SpdMatrix> as);

Ensemble inverted(std::span<const SpdMatrix> as);
Ensemble powered(std::span<const SpdMatrix> as, double r);

}  // namespace opmeans
