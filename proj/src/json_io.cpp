#include "opmeans/json_io.hpp"

#include <string>

namespace opmeans {

namespace {

[[noreturn]] void bad(ErrorCode code, const std::string& what) { throw Error(code, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    bad(ErrorCode::MissingParameter, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) bad(ErrorCode::DomainError, std::string("field '") + key + "' must be numeric");
  return v.get<double>();
}

}  // namespace

Json to_json(const SpdMatrix& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < a.dim(); ++k) row.push_back(a(i, k));
    rows.push_back(std::move(row));
  }
  return {{"dim", a.dim()}, {"entries", std::move(rows)}};
}

SpdMatrix spd_from_json(const Json& j) {
  const Json& rows = field(j, "entries");
  if (!rows.is_array() || rows.empty()) bad(ErrorCode::NotSquare, "entries must be a nonempty array");
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != n) {
    bad(ErrorCode::NotSquare, "dim does not match the number of rows");
  }
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      bad(ErrorCode::NotSquare, "row " + std::to_string(i) + " has the wrong length");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      const Json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) bad(ErrorCode::DomainError, "matrix entries must be numeric");
      m(i, k) = v.get<double>();
    }
  }
  return validate_spd(m);
}

Ensemble ensemble_from_json(const Json& j) {
  const Json& list = j.is_object() ? field(j, "matrices") : j;
  if (!list.is_array() || list.empty()) bad(ErrorCode::ArityMismatch, "expected a nonempty list of matrices");
  Ensemble out;
  for (const auto& item : list) out.push_back(spd_from_json(item));
  return out;
}

// ---------------------------------------------------------------------------

Json to_json(const RepFn& f) {
  Json j{{"kind", std::string(to_string(f.kind()))}};
  switch (f.kind()) {
    case RepKind::Arithmetic: j["w"] = f.param(); break;
    case RepKind::Harmonic:
    case RepKind::Geometric: j["alpha"] = f.param(); break;
    case RepKind::ConvexCombo: {
      Json terms = Json::array();
      for (const auto& t : f.terms()) terms.push_back({{"weight", t.weight}, {"fn", to_json(t.fn)}});
      j["terms"] = std::move(terms);
      break;
    }
    case RepKind::Deformed:
      j["tau"] = to_json(f.tau());
      j["sigma"] = to_json(f.sigma());
      break;
    default: break;
  }
  if (!f.transforms().empty()) {
    Json ts = Json::array();
    for (const auto& t : f.transforms()) {
      Json e{{"op", std::string(to_string(t.op))}};
      if (t.op != TransformOp::Adjoint && t.op != TransformOp::Transpose) e["r"] = t.r;
      ts.push_back(std::move(e));
    }
    j["transforms"] = std::move(ts);
  }
  return j;
}

namespace {

TransformOp parse_transform(const std::string& s) {
  for (TransformOp op : {TransformOp::Adjoint, TransformOp::Transpose, TransformOp::PowerInner,
                         TransformOp::PowerInnerOuter, TransformOp::PowerOuter}) {
    if (s == to_string(op)) return op;
  }
  bad(ErrorCode::UnknownKind, "unknown transform '" + s + "'");
}

}  // namespace

RepFn repfn_from_json(const Json& j, const SolverConfig& cfg) {
  const std::string kind = field(j, "kind").get<std::string>();
  RepFn f = RepFn::right_trivial();
  if (kind == "LeftTrivial") {
    f = RepFn::left_trivial();
  } else if (kind == "RightTrivial") {
    f = RepFn::right_trivial();
  } else if (kind == "Arithmetic") {
    f = RepFn::arithmetic(number(j, "w"));
  } else if (kind == "Harmonic") {
    f = RepFn::harmonic(number(j, "alpha"));
  } else if (kind == "Geometric") {
    f = RepFn::geometric(number(j, "alpha"));
  } else if (kind == "Example37") {
    f = RepFn::example37();
  } else if (kind == "ConvexCombo") {
    std::vector<RepFn::Term> terms;
    for (const auto& t : field(j, "terms")) {
      terms.push_back({number(t, "weight"), repfn_from_json(field(t, "fn"), cfg)});
    }
    f = RepFn::convex_combo(std::move(terms));
  } else if (kind == "Deformed") {
    f = RepFn::deformed(repfn_from_json(field(j, "tau"), cfg),
                        repfn_from_json(field(j, "sigma"), cfg), cfg);
  } else {
    bad(ErrorCode::UnknownKind, "unknown representing function '" + kind + "'");
  }
  if (j.contains("transforms")) {
    for (const auto& t : j.at("transforms")) {
      const TransformOp op = parse_transform(field(t, "op").get<std::string>());
      std::optional<double> r;
      if (t.contains("r")) r = t.at("r").get<double>();
      f = f.with(op, r);
    }
  }
  return f;
}

Json to_json(const Weights& w) { return w.values(); }

Weights weights_from_json(const Json& j) {
  if (j.is_number_integer()) return Weights::uniform(j.get<std::size_t>());
  if (!j.is_array()) bad(ErrorCode::DomainError, "weights must be an array or a count");
  return Weights(j.get<std::vector<double>>());
}

Json to_json(const MultiMeanSpec& spec) {
  struct Visitor {
    Json operator()(const mean_kind::Arithmetic& k) const {
      return {{"kind", "Arithmetic"}, {"weights", to_json(k.w)}};
    }
    Json operator()(const mean_kind::Harmonic& k) const {
      return {{"kind", "Harmonic"}, {"weights", to_json(k.w)}};
    }
    Json operator()(const mean_kind::Deformed& k) const {
      return {{"kind", "Deformed"}, {"base", to_json(*k.base)}, {"sigma", to_json(k.sigma)}};
    }
    Json operator()(const mean_kind::Power& k) const {
      return {{"kind", "Power"}, {"weights", to_json(k.w)}, {"alpha", k.alpha}};
    }
    Json operator()(const mean_kind::Karcher& k) const {
      return {{"kind", "Karcher"}, {"weights", to_json(k.w)}};
    }
    Json operator()(const mean_kind::AdjointOf& k) const {
      return {{"kind", "AdjointOf"}, {"inner", to_json(*k.inner)}};
    }
  };
  return std::visit(Visitor{}, spec.kind());
}

MultiMeanSpec multimean_from_json(const Json& j, const SolverConfig& cfg) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "Arithmetic") return MultiMeanSpec::arithmetic(weights_from_json(field(j, "weights")));
  if (kind == "Harmonic") return MultiMeanSpec::harmonic(weights_from_json(field(j, "weights")));
  if (kind == "Karcher") return MultiMeanSpec::karcher(weights_from_json(field(j, "weights")));
  if (kind == "Power") {
    return MultiMeanSpec::power(weights_from_json(field(j, "weights")), number(j, "alpha"));
  }
  if (kind == "Deformed") {
    return MultiMeanSpec::deformed(multimean_from_json(field(j, "base"), cfg),
                                   repfn_from_json(field(j, "sigma"), cfg));
  }
  if (kind == "AdjointOf") return MultiMeanSpec::adjoint_of(multimean_from_json(field(j, "inner"), cfg));
  bad(ErrorCode::UnknownKind, "unknown mean kind '" + kind + "'");
}

Json to_json(const MeanResult& r) {
  Json j{{"value", to_json(r.value)},
         {"iterations", r.iterations},
         {"residual_dt", r.residual_dt},
         {"enclosure_gap", nullptr}};
  if (r.enclosure_gap) j["enclosure_gap"] = *r.enclosure_gap;
  return j;
}

Json to_json(const CheckReport& rep, bool with_matrices) {
  Json j{{"inequality_id", rep.inequality_id},
         {"holds", rep.holds},
         {"margin", rep.margin},
         {"constants", rep.constants},
         {"witness_seed", nullptr}};
  if (rep.witness_seed) j["witness_seed"] = *rep.witness_seed;
  if (!rep.holds || with_matrices) {
    Json ms = Json::object();
    for (const auto& [name, m] : rep.matrices) ms[name] = to_json(m);
    j["matrices"] = std::move(ms);
  }
  return j;
}

Json to_json(const Counterexample& cx) {
  return {{"mode", std::string(to_string(cx.mode))},
          {"family_params", {{"x", cx.x}, {"y", cx.y}, {"t", cx.t}}},
          {"r", cx.r},
          {"shift", cx.shift},
          {"matrices", {{"A", to_json(cx.a)}, {"B", to_json(cx.b)}}},
          {"violated_id", cx.violated_id},
          {"violation_margin", cx.violation_margin}};
}

}  // namespace opmeans
