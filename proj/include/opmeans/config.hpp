#pragma once

namespace opmeans {

/// Tolerances and iteration caps shared by every solver.
struct SolverConfig {
  double dt_tol = 1e-11;            // Thompson-metric step size that stops a matrix fixed point
  int max_iters = 20000;
  double karcher_alpha = 1.0 / 64;  // power-mean sandwich parameter for Karcher certification
  double delta_floor = 1e-8;        // lower clamp for the initial box parameter
  double scalar_tol = 1e-12;        // residual target for scalar root finding
  int scalar_max_iters = 10000;
  double loewner_tol = 1e-10;
  bool certify_karcher = true;

  /// Throws ConfigError on nonsensical settings.
  void validate() const;
};

}  // namespace opmeans
