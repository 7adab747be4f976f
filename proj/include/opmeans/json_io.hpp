#pragma once

#include <json.hpp>

#include "opmeans/inequalities.hpp"

namespace opmeans {

using Json = nlohmann::json;

/// {"dim": n, "entries": [[...], ...]}; asymmetry above tolerance is rejected.
Json to_json(const SpdMatrix& a);
SpdMatrix spd_from_json(const Json& j);

/// A list of matrices, either a bare array or {"matrices": [...]}.
Ensemble ensemble_from_json(const Json& j);

Json to_json(const RepFn& f);
RepFn repfn_from_json(const Json& j, const SolverConfig& cfg = {});

Json to_json(const Weights& w);
Weights weights_from_json(const Json& j);

Json to_json(const MultiMeanSpec& spec);
MultiMeanSpec multimean_from_json(const Json& j, const SolverConfig& cfg = {});

Json to_json(const MeanResult& r);

/// Witness matrices are embedded when the check failed or when with_matrices is set.
Json to_json(const CheckReport& rep, bool with_matrices = false);

Json to_json(const Counterexample& cx);

}  // namespace opmeans
