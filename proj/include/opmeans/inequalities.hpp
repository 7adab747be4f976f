#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opmeans/multimean.hpp"

namespace opmeans {

/// Default pass threshold on normalized margins.
inline constexpr double kCheckTol = 1e-9;

/// Outcome of one inequality instance.
struct CheckReport {
  std::string inequality_id;
  bool holds = true;
  /// λ_min of the favorable difference over (‖lhs‖ + ‖rhs‖); worst side for two-sided checks.
  double margin = 0.0;
  std::map<std::string, double> constants;
  std::optional<std::uint64_t> witness_seed;
  /// Named inputs, embedded in serialized reports on failure.
  std::vector<std::pair<std::string, SpdMatrix>> matrices;
};

/// K(h, p); equals 1 at p = 1 and p = 0. Throws BadH for h ≤ 1.
double kantorovich(double h, double p);

/// Normalized margin of lhs ≤ rhs.
double normalized_margin(const Matrix& lhs, const Matrix& rhs);

// ---------------------------------------------------------------------------
// Forward families

enum class AhVariant {
  ForwardLower,             // M(A^r) ≥ λ_min^{r−1}(M(A)) M(A),        r ≥ 1
  AdjointForwardUpper,      // M*(A^r) ≤ ‖M*(A)‖^{r−1} M*(A),           r ≥ 1
  ComplementaryUpper,       // M(A^r) ≤ λ_min^{r−1}(M(A)) M(A),         0 < r ≤ 1
  AdjointComplementaryLower // M*(A^r) ≥ ‖M*(A)‖^{r−1} M*(A),           0 < r ≤ 1
};

std::string_view ah_variant_id(AhVariant v);

/// Throws BadR when r is outside the variant's range.
CheckReport check_ah_family(const MultiMeanSpec& spec, std::span<const SpdMatrix> as, double r,
                            AhVariant variant, const SolverConfig& cfg = {});

/// Both bounds of the geometric-mean sandwich for r ≥ 1 ("3.13") or 0 < r ≤ 1 ("3.14").
CheckReport check_karcher_ah(const Weights& w, std::span<const SpdMatrix> as, double r,
                             const SolverConfig& cfg = {});

/// Weak form: M(A) ≥ I ⟹ M(A^r) ≥ I for r ≥ 1, tested after rescaling so M(A) ≥ I is tight.
CheckReport check_weak_ah(const MultiMeanSpec& spec, std::span<const SpdMatrix> as, double r,
                          const SolverConfig& cfg = {});

enum class ModifiedForm {
  Inner,  // M_{σ_{1/r}}(A^r) between λ_min^{r−1}X·X and ‖X‖^{r−1}X, X = M_σ(A), r ≥ 1
  Outer,  // M_σ(A^r) between ‖Y‖^{r−1}Y and λ_min^{r−1}(Y)Y, Y = M_{σ_r}(A), 0 < r ≤ 1
};

CheckReport check_modified(const MultiMeanSpec& base, const RepFn& sigma,
                           std::span<const SpdMatrix> as, double r, ModifiedForm form,
                           const SolverConfig& cfg = {});

enum class TwoVarForm {
  Deformed,         // r ≥ 1, deformation by σ_{1/r}
  DeformedComplement,  // 0 < r ≤ 1, deformation by σ_r
  Bracket,          // r ≥ 1, τ_{[1/r]}
  BracketComplement,   // 0 < r ≤ 1, τ_{[r]}
};

std::string_view two_var_id(TwoVarForm f);

/// Two-variable forms. sigma is ignored for the bracket forms.
CheckReport check_two_var(const RepFn& tau, const RepFn& sigma, const SpdMatrix& a,
                          const SpdMatrix& b, double r, TwoVarForm form,
                          const SolverConfig& cfg = {});

/// Equivalence of "A τ B ≥ I ⟹ A^r σ B^r ≥ I" with "f_σ(t^r) ≥ f_τ(t)^r".
/// constants: cond_ii_margin, cond_ii_worst_t, cond_i_margin, lifted_margin, agree.
/// holds reports agreement of the two conditions.
CheckReport corollary_4_6_test(const RepFn& sigma, const RepFn& tau, double r,
                               const std::vector<double>& t_grid, int matrix_trials,
                               std::uint64_t seed, const SolverConfig& cfg = {});

// ---------------------------------------------------------------------------
// Reverse (Kantorovich) families

struct SpectrumBounds {
  double m;
  double big_m;
};

enum class ReverseForm {
  PowerUpper,       // α ∈ (0, 1]
  PowerLower,       // α ∈ [−1, 0)
  Deformed,         // generic M_σ with σ_{1/r}
  PowerDeformed,    // P_{ω,α/r}(A^r), α ∈ [−1, 1]∖{0}
  Karcher,
};

std::string_view reverse_id(ReverseForm f);

/// Throws BoundsViolated if some A_j escapes [m, M], BadR if r < 1.
CheckReport check_reverse(const Weights& w, double alpha, std::span<const SpdMatrix> as, double r,
                          ReverseForm form, SpectrumBounds bounds, const SolverConfig& cfg = {});

/// The deformed reverse bound for an arbitrary base mean and σ.
CheckReport check_reverse_deformed(const MultiMeanSpec& base, const RepFn& sigma,
                                   std::span<const SpdMatrix> as, double r, SpectrumBounds bounds,
                                   const SolverConfig& cfg = {});

/// C A^r C ≤ K(M/(mμ), r) (C A C)^r.
CheckReport check_lemma_5_1(const SpdMatrix& a, const SpdMatrix& c, double r, SpectrumBounds bounds,
                            double mu, const SolverConfig& cfg = {});

/// Σ w_j A_j^r ≤ K(M/m, r) (Σ w_j A_j)^r.
CheckReport check_ineq_5_3(const Weights& w, std::span<const SpdMatrix> as, double r,
                           SpectrumBounds bounds, const SolverConfig& cfg = {});

/// An ensemble for which the reverse Karcher bound at r = 2 is sharper than the forward one.
struct ImprovementInstance {
  std::uint64_t seed;
  Ensemble as;
  SpectrumBounds bounds;
  double kappa0;
  double kappa_x;
  double reverse_bound;  // K(κ₀κ(X), 2) λ_min(X)
  double forward_bound;  // ‖X‖
};

std::optional<ImprovementInstance> find_reverse_improvement(std::uint64_t seed, int attempts,
                                                            Eigen::Index dim, std::size_t n,
                                                            const SolverConfig& cfg = {});

// ---------------------------------------------------------------------------
// Limits and majorization

struct LieTrotterReport {
  std::vector<double> p;
  std::vector<double> gaps;
  bool nonincreasing = true;
};

/// d_T(M(A^p)^{1/p}, exp(Σ w_j log A_j)) along p. Throws SandwichFails if H_ω ≤ M ≤ A_ω fails.
LieTrotterReport lie_trotter_gap(const MultiMeanSpec& spec, std::span<const SpdMatrix> as,
                                 std::vector<double> p_sequence = {}, const SolverConfig& cfg = {});

/// Partial products of decreasing eigenvalues of G(A^r) against λ_{N+1−i}^{r−1}(G) λ_i(G).
CheckReport check_log_majorization(const Weights& w, std::span<const SpdMatrix> as, double r,
                                   const SolverConfig& cfg = {});

// ---------------------------------------------------------------------------
// Optimality searches

enum class OptimalityMode { Prop61, Prop62 };

OptimalityMode parse_optimality_mode(std::string_view s);
std::string_view to_string(OptimalityMode m);

struct SearchConfig {
  std::size_t xy_points = 41;  // log grid per axis on [x_lo, x_hi]
  double x_lo = 1e-2;
  double x_hi = 1e2;
  std::vector<double> t_values{0.5, 0.1, 0.25, 0.75, 0.9};
  std::vector<double> eps_values{1e-1, 3e-2, 1e-2, 3e-3};
  std::size_t k_points = 81;  // k on [−k_max, k_max]
  double k_max = 40.0;
  std::size_t diag_points = 200;  // x on (0, 1] for the diagonal family
  double shift = 1e-9;
  double tol = kCheckTol;
};

struct Counterexample {
  OptimalityMode mode;
  double x;
  double y;
  double t;
  double r;
  double shift;
  SpdMatrix a;
  SpdMatrix b;
  std::string violated_id;
  double violation_margin;
};

/// Re-evaluates the optimality inequality on a stored pair. For Prop62 the pair is rescaled so
/// that A τ B ≤ I is tight before testing A^r τ_{[1/r]} B^r ≤ I.
CheckReport check_optimality_instance(const RepFn& tau, const SpdMatrix& a, const SpdMatrix& b,
                                      double r, OptimalityMode mode);

std::optional<Counterexample> optimality_scan(const RepFn& tau, double r, OptimalityMode mode,
                                              const SearchConfig& search = {});

}  // namespace opmeans
