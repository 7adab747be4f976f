#include "opmeans/spd.hpp"

#include <algorithm>

namespace opmeans {

std::string_view to_string(LoewnerRelation rel) {
  switch (rel) {
    case LoewnerRelation::LessEqual: return "LessEqual";
    case LoewnerRelation::GreaterEqual: return "GreaterEqual";
    case LoewnerRelation::Equal: return "Equal";
    case LoewnerRelation::Incomparable: return "Incomparable";
  }
  return "Incomparable";
}

Spectrum spectrum_of(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenFailure, "symmetric eigensolver did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

Vector eigenvalues_of(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenFailure, "symmetric eigensolver did not converge");
  }
  return es.eigenvalues();
}

SpdMatrix validate_spd(const Matrix& entries, double tol) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw Error(ErrorCode::NotSquare, "expected a nonempty square array, got " +
                                          std::to_string(entries.rows()) + "x" +
                                          std::to_string(entries.cols()));
  }
  if (!entries.allFinite()) {
    throw Error(ErrorCode::DomainError, "matrix has non-finite entries");
  }
  const double scale = entries.cwiseAbs().maxCoeff();
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > std::max(tol, 1e-12) * scale) {
    throw Error(ErrorCode::NotSymmetric, "asymmetry " + std::to_string(asym) +
                                             " exceeds tolerance at scale " +
                                             std::to_string(scale));
  }
  SpdMatrix out = SpdMatrix::unchecked(entries);
  const Vector ev = eigenvalues_of(out.matrix());
  const double spectral_scale = ev.cwiseAbs().maxCoeff();
  if (!(ev(0) > tol * spectral_scale)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "smallest eigenvalue " + std::to_string(ev(0)) + " is not positive");
  }
  return out;
}

SpdMatrix power(const SpdMatrix& a, double r) {
  if (r == 1.0) return a;
  return SpdMatrix::unchecked(matrix_function(a, [r](double x) { return std::pow(x, r); }));
}

SpdMatrix sqrt(const SpdMatrix& a) {
  return SpdMatrix::unchecked(matrix_function(a, [](double x) { return std::sqrt(x); }));
}

SpdMatrix inv_sqrt(const SpdMatrix& a) {
  return SpdMatrix::unchecked(matrix_function(a, [](double x) { return 1.0 / std::sqrt(x); }));
}

SpdMatrix inverse(const SpdMatrix& a) {
  return SpdMatrix::unchecked(a.matrix().llt().solve(Matrix::Identity(a.dim(), a.dim())));
}

SpdMatrix congruence(const Matrix& s, const SpdMatrix& a) {
  if (s.rows() != a.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "congruence factor has wrong size");
  }
  return SpdMatrix::unchecked(s.transpose() * a.matrix() * s);
}

CongruenceFrame::CongruenceFrame(const SpdMatrix& x) {
  const Spectrum s = spectrum_of(x.matrix());
  half_ = spectral_apply(s, [](double v) { return std::sqrt(v); });
  inv_half_ = spectral_apply(s, [](double v) { return 1.0 / std::sqrt(v); });
}

double thompson_distance(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "thompson_distance on different dimensions");
  }
  // Eigenvalues of A^{-1/2} B A^{-1/2} are those of the pencil (B, A).
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(b.matrix(), a.matrix(),
                                                       Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenFailure, "generalized eigensolver did not converge");
  }
  const Vector& ev = es.eigenvalues();
  if (!(ev(0) > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite, "thompson_distance on a non-definite pencil");
  }
  return std::max(std::abs(std::log(ev(0))), std::abs(std::log(ev(ev.size() - 1))));
}

double sym_norm(const Matrix& sym) { return eigenvalues_of(sym).cwiseAbs().maxCoeff(); }

LoewnerVerdict loewner_compare(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "loewner_compare on different dimensions");
  }
  const double slack = tol * (sym_norm(a) + sym_norm(b));
  const Matrix diff = (b - a + (b - a).transpose()) * 0.5;
  const Vector ev = eigenvalues_of(diff);
  const double up = ev(0);                 // λ_min(B − A)
  const double down = -ev(ev.size() - 1);  // λ_min(A − B)
  const bool le = up >= -slack;
  const bool ge = down >= -slack;
  if (le && ge) return {LoewnerRelation::Equal, std::min(up, down)};
  if (le) return {LoewnerRelation::LessEqual, up};
  if (ge) return {LoewnerRelation::GreaterEqual, down};
  return {LoewnerRelation::Incomparable, std::max(up, down)};
}

SpectralStats spectral_stats(const SpdMatrix& a) {
  const Vector ev = eigenvalues_of(a.matrix());
  SpectralStats s;
  s.lambda_min = ev(0);
  s.op_norm = ev(ev.size() - 1);
  s.condition_number = s.op_norm / s.lambda_min;
  return s;
}

double lambda_min(const SpdMatrix& a) { return eigenvalues_of(a.matrix())(0); }

double op_norm(const SpdMatrix& a) {
  const Vector ev = eigenvalues_of(a.matrix());
  return ev(ev.size() - 1);
}

Matrix random_orthogonal(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

SpdMatrix random_spd(Eigen::Index dim, double m, double big_m, Rng& rng) {
  if (dim < 1) throw Error(ErrorCode::BadInterval, "dimension must be positive");
  if (!(m > 0.0) || !(m < big_m) || !std::isfinite(big_m)) {
    throw Error(ErrorCode::BadInterval, "spectrum interval must satisfy 0 < m < M");
  }
  std::uniform_real_distribution<double> unif(m, big_m);
  Vector lam(dim);
  for (Eigen::Index i = 0; i < dim; ++i) lam(i) = unif(rng);
  if (dim >= 2) {
    lam(0) = m;
    lam(1) = big_m;
  }
  const Matrix q = random_orthogonal(dim, rng);
  return SpdMatrix::unchecked(q * lam.asDiagonal() * q.transpose());
}

SpdMatrix random_spd(Eigen::Index dim, double m, double big_m, std::uint64_t seed) {
  Rng rng(seed);
  return random_spd(dim, m, big_m, rng);
}

}  // namespace opmeans
