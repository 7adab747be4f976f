#pragma once

#include <random>

#include "opmeans/multimean.hpp"

namespace opmeans::testing {

struct Draw {
  Weights w;
  Ensemble as;
};

/// n matrices of size dim with spectra in [m, M] and Dirichlet-like weights.
inline Draw random_draw(std::uint64_t seed, Eigen::Index dim, std::size_t n, double m = 0.2,
                        double big_m = 5.0) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) total += (x = u(rng));
  for (double& x : w) x /= total;
  Ensemble as;
  for (std::size_t j = 0; j < n; ++j) as.push_back(random_spd(dim, m, big_m, rng));
  return {Weights(std::move(w)), std::move(as)};
}

inline SpdMatrix diagonal(const std::vector<double>& v) {
  Vector d(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) d(static_cast<Eigen::Index>(i)) = v[i];
  return validate_spd(Matrix(d.asDiagonal()));
}

inline double rel_diff(const SpdMatrix& a, const SpdMatrix& b) {
  return (a.matrix() - b.matrix()).norm() / std::max(1.0, b.matrix().norm());
}

}  // namespace opmeans::testing
