#include "opmeans/config.hpp"

#include <cmath>
#include <string>

#include "opmeans/error.hpp"

namespace opmeans {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

}  // namespace

void SolverConfig::validate() const {
  require(dt_tol > 0.0 && std::isfinite(dt_tol), "dt_tol must be positive");
  require(max_iters >= 1, "max_iters must be at least 1");
  require(karcher_alpha > 0.0 && karcher_alpha <= 1.0, "karcher_alpha must lie in (0, 1]");
  require(delta_floor > 0.0 && delta_floor < 1.0, "delta_floor must lie in (0, 1)");
  require(scalar_tol > 0.0, "scalar_tol must be positive");
  require(scalar_max_iters >= 1, "scalar_max_iters must be at least 1");
  require(loewner_tol >= 0.0, "loewner_tol must be nonnegative");
}

}  // namespace opmeans
