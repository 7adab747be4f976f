#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "opmeans/error.hpp"

namespace opmeans {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Dense real symmetric positive definite matrix.
///
/// Instances are produced either by validate_spd() (full check) or by
/// SpdMatrix::unchecked() for results of operations that preserve positive
/// definiteness by construction. Both paths store the symmetrized entries.
class SpdMatrix {
 public:
  SpdMatrix() = default;

  static SpdMatrix unchecked(const Matrix& m) { return SpdMatrix((m + m.transpose()) * 0.5); }
  static SpdMatrix identity(Eigen::Index dim) { return SpdMatrix(Matrix::Identity(dim, dim)); }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  SpdMatrix scaled(double t) const { return SpdMatrix(m_ * t); }

 private:
  explicit SpdMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
struct Spectrum {
  Vector values;
  Matrix vectors;
};

Spectrum spectrum_of(const Matrix& sym);
Vector eigenvalues_of(const Matrix& sym);

/// U f(Λ) Uᵀ, symmetrized. Throws DomainError if f is not finite at an eigenvalue.
template <class F>
Matrix spectral_apply(const Spectrum& s, F&& f) {
  Vector fv(s.values.size());
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    fv(i) = f(s.values(i));
    if (!std::isfinite(fv(i))) {
      throw Error(ErrorCode::DomainError,
                  "function undefined at eigenvalue " + std::to_string(s.values(i)));
    }
  }
  Matrix out = s.vectors * fv.asDiagonal() * s.vectors.transpose();
  return (out + out.transpose()) * 0.5;
}

template <class F>
Matrix matrix_function(const SpdMatrix& a, F&& f) {
  return spectral_apply(spectrum_of(a.matrix()), std::forward<F>(f));
}

/// Functional calculus on an arbitrary symmetric matrix (e.g. exp of a log).
template <class F>
Matrix symmetric_function(const Matrix& sym, F&& f) {
  return spectral_apply(spectrum_of(sym), std::forward<F>(f));
}

SpdMatrix validate_spd(const Matrix& entries, double tol = 1e-12);

SpdMatrix power(const SpdMatrix& a, double r);
SpdMatrix sqrt(const SpdMatrix& a);
SpdMatrix inv_sqrt(const SpdMatrix& a);
SpdMatrix inverse(const SpdMatrix& a);
SpdMatrix congruence(const Matrix& s, const SpdMatrix& a);  // Sᵀ A S

/// Caches X^{1/2} and X^{-1/2} for repeated congruences against one base point.
class CongruenceFrame {
 public:
  explicit CongruenceFrame(const SpdMatrix& x);

  /// X^{-1/2} B X^{-1/2}
  Matrix whiten(const Matrix& b) const { return symmetrized(inv_half_ * b * inv_half_); }
  /// X^{1/2} M X^{1/2}
  Matrix color(const Matrix& m) const { return symmetrized(half_ * m * half_); }

  const Matrix& half() const { return half_; }
  const Matrix& inv_half() const { return inv_half_; }

 private:
  static Matrix symmetrized(const Matrix& m) { return (m + m.transpose()) * 0.5; }
  Matrix half_;
  Matrix inv_half_;
};

double thompson_distance(const SpdMatrix& a, const SpdMatrix& b);

enum class LoewnerRelation { LessEqual, GreaterEqual, Equal, Incomparable };

std::string_view to_string(LoewnerRelation rel);

struct LoewnerVerdict {
  LoewnerRelation relation = LoewnerRelation::Incomparable;
  double margin = 0.0;  // λ_min of the favorable difference
};

inline constexpr double kDefaultLoewnerTol = 1e-10;

/// A ≤ B iff λ_min(B − A) ≥ −tol·(‖A‖ + ‖B‖). Arguments need only be symmetric.
LoewnerVerdict loewner_compare(const Matrix& a, const Matrix& b, double tol = kDefaultLoewnerTol);
inline LoewnerVerdict loewner_compare(const SpdMatrix& a, const SpdMatrix& b,
                                      double tol = kDefaultLoewnerTol) {
  return loewner_compare(a.matrix(), b.matrix(), tol);
}

struct SpectralStats {
  double lambda_min = 0.0;
  double op_norm = 0.0;
  double condition_number = 1.0;
};

SpectralStats spectral_stats(const SpdMatrix& a);
double lambda_min(const SpdMatrix& a);
double op_norm(const SpdMatrix& a);
/// Spectral norm of a symmetric matrix.
double sym_norm(const Matrix& sym);

/// Haar-distributed orthogonal matrix.
Matrix random_orthogonal(Eigen::Index dim, Rng& rng);

/// Q Λ Qᵀ with Λ uniform on [m, M]; both endpoints are eigenvalues when dim ≥ 2.
SpdMatrix random_spd(Eigen::Index dim, double m, double big_m, std::uint64_t seed);
SpdMatrix random_spd(Eigen::Index dim, double m, double big_m, Rng& rng);

}  // namespace opmeans
