#include "opmeans/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace opmeans {

namespace {

const std::set<std::string> kAlphaIds{"3.5", "3.9", "3.10", "3.11", "3.12", "4.4", "4.5",
                                      "4.6", "4.7", "4.8", "4.9", "5.4", "5.5", "5.8", "5.9"};
const std::set<std::string> kPlainIds{"3.13", "3.14", "4.1", "4.2", "5.3", "L5.1", "5.10", "LM"};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

bool is_two_var(const std::string& id) {
  return id == "4.6" || id == "4.7" || id == "4.8" || id == "4.9";
}

bool is_reverse(const std::string& id) {
  return id == "5.3" || id == "L5.1" || id == "5.4" || id == "5.5" || id == "5.8" ||
         id == "5.9" || id == "5.10";
}

double alpha_of(const CellParams& cell) {
  if (!cell.alpha) throw Error(ErrorCode::MissingParameter, "check " + cell.id + " needs alpha");
  return *cell.alpha;
}

Json cell_json(const CellParams& cell, const Weights& w, int trial) {
  Json j{{"dim", cell.dim}, {"r", cell.r}, {"alpha", nullptr}, {"trial", trial},
         {"weights", w.values()}};
  if (cell.alpha) j["alpha"] = *cell.alpha;
  if (is_reverse(cell.id)) {
    j["m"] = cell.bounds.m;
    j["M"] = cell.bounds.big_m;
  }
  if (cell.id == "L5.1") j["mu"] = cell.mu;
  return j;
}

template <typename T>
std::vector<T> list_of(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ConfigError, std::string("campaign needs '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_array()) throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be a list");
  try {
    return v.get<std::vector<T>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad entry in '") + key + "': " + e.what());
  }
}

SpectrumBounds bounds_from(const Json& j) {
  return {j.at("m").get<double>(), j.at("M").get<double>()};
}

}  // namespace

bool known_check_id(const std::string& id) { return kAlphaIds.count(id) || kPlainIds.count(id); }
bool check_takes_alpha(const std::string& id) { return kAlphaIds.count(id) > 0; }

std::uint64_t trial_seed(std::uint64_t seed, std::size_t cell, int trial) {
  return splitmix64(splitmix64(seed ^ splitmix64(cell)) + static_cast<std::uint64_t>(trial));
}

const std::vector<double>& CampaignConfig::r_for(const std::string& id) const {
  const auto it = r_by_id.find(id);
  return it == r_by_id.end() ? r_values : it->second;
}

void CampaignConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (replay.empty()) {
    if (inequality_ids.empty()) fail("inequality_ids is empty");
    if (dimensions.empty()) fail("dimensions is empty");
  }
  for (const auto& id : inequality_ids) {
    if (r_for(id).empty()) fail("no r values for " + id);
  }
  for (const auto& [id, rs] : r_by_id) {
    if (std::find(inequality_ids.begin(), inequality_ids.end(), id) == inequality_ids.end()) {
      fail("r_values names " + id + ", which is not in inequality_ids");
    }
    for (double r : rs) {
      if (!std::isfinite(r)) fail("r values must be finite");
    }
  }
  for (const auto& id : inequality_ids) {
    if (!known_check_id(id)) fail("unknown inequality id '" + id + "'");
  }
  for (int d : dimensions) {
    if (d < 1) fail("dimensions must be ≥ 1");
  }
  for (double r : r_values) {
    if (!std::isfinite(r)) fail("r values must be finite");
  }
  const bool needs_alpha = std::any_of(inequality_ids.begin(), inequality_ids.end(),
                                       [](const std::string& id) { return check_takes_alpha(id); });
  if (needs_alpha && alpha_values.empty()) fail("alpha_values is empty");
  if (trials < 1) fail("trials must be ≥ 1");
  if (!(spectrum.m > 0.0 && spectrum.m < spectrum.big_m)) fail("spectrum needs 0 < m < M");
  if (!(reverse_spectrum.m > 0.0 && reverse_spectrum.m < reverse_spectrum.big_m)) {
    fail("reverse_spectrum needs 0 < m < M");
  }
  if (!(mu > 0.0 && mu <= 1.0)) fail("mu must lie in (0, 1]");
  if (min_arity < 2 || max_arity < min_arity) fail("arity range must satisfy 2 ≤ min ≤ max");
}

CampaignConfig campaign_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "campaign must be a JSON object");
  CampaignConfig c;
  try {
    if (j.contains("replay")) c.replay = j.at("replay").get<std::vector<Json>>();
    if (!c.replay.empty() && !j.contains("inequality_ids")) {
      c.validate();
      return c;
    }
    c.inequality_ids = list_of<std::string>(j, "inequality_ids");
    c.dimensions = list_of<int>(j, "dimensions");
    if (j.contains("r_values") && j.at("r_values").is_object()) {
      for (const auto& [id, rs] : j.at("r_values").items()) {
        c.r_by_id[id] = rs.get<std::vector<double>>();
      }
    } else {
      c.r_values = list_of<double>(j, "r_values");
    }
    if (j.contains("alpha_values")) c.alpha_values = list_of<double>(j, "alpha_values");
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.output_path = j.value("output_path", c.output_path);
    if (j.contains("spectrum")) c.spectrum = bounds_from(j.at("spectrum"));
    if (j.contains("reverse_spectrum")) c.reverse_spectrum = bounds_from(j.at("reverse_spectrum"));
    c.mu = j.value("mu", c.mu);
    c.min_arity = j.value("min_arity", c.min_arity);
    c.max_arity = j.value("max_arity", c.max_arity);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed campaign: ") + e.what());
  }
  c.validate();
  return c;
}

Json to_json(const CampaignConfig& c) {
  Json j{{"inequality_ids", c.inequality_ids},
         {"dimensions", c.dimensions},
         {"r_values", c.r_by_id.empty() ? Json(c.r_values) : Json(c.r_by_id)},
         {"alpha_values", c.alpha_values},
         {"trials", c.trials},
         {"seed", c.seed},
         {"output_path", c.output_path},
         {"spectrum", {{"m", c.spectrum.m}, {"M", c.spectrum.big_m}}},
         {"reverse_spectrum", {{"m", c.reverse_spectrum.m}, {"M", c.reverse_spectrum.big_m}}},
         {"mu", c.mu},
         {"min_arity", c.min_arity},
         {"max_arity", c.max_arity}};
  if (!c.replay.empty()) j["replay"] = c.replay;
  return j;
}

// ---------------------------------------------------------------------------

CheckReport run_check(const CellParams& cell, const Weights& w, const Ensemble& inputs,
                      const SolverConfig& cfg) {
  const std::string& id = cell.id;
  const double r = cell.r;
  if (id == "3.9" || id == "3.10" || id == "3.11" || id == "3.12") {
    static const std::map<std::string, AhVariant> variant{
        {"3.9", AhVariant::ForwardLower},
        {"3.10", AhVariant::AdjointForwardUpper},
        {"3.11", AhVariant::ComplementaryUpper},
        {"3.12", AhVariant::AdjointComplementaryLower}};
    // P_{−α} is the adjoint of P_α, so 3.10 and 3.12 are the adjoint variants.
    CheckReport rep = check_ah_family(MultiMeanSpec::power(w, std::abs(alpha_of(cell))), inputs, r,
                                      variant.at(id), cfg);
    rep.inequality_id = id;
    rep.constants["alpha"] = std::abs(alpha_of(cell));
    return rep;
  }
  if (id == "3.13" || id == "3.14") {
    const bool in_range = id == "3.13" ? r >= 1.0 : (r > 0.0 && r <= 1.0);
    if (!in_range) {
      throw Error(ErrorCode::BadR, "r = " + std::to_string(r) + " outside the range of " + id);
    }
    CheckReport rep = check_karcher_ah(w, inputs, r, cfg);
    rep.inequality_id = id;
    return rep;
  }
  if (id == "3.5") {
    CheckReport rep = check_weak_ah(MultiMeanSpec::power(w, alpha_of(cell)), inputs, r, cfg);
    rep.constants["alpha"] = alpha_of(cell);
    return rep;
  }
  if (id == "4.1" || id == "4.2") {
    return check_modified(MultiMeanSpec::arithmetic(w), RepFn::example37(), inputs, r,
                          id == "4.1" ? ModifiedForm::Inner : ModifiedForm::Outer, cfg);
  }
  if (id == "4.4" || id == "4.5") {
    const double alpha = alpha_of(cell);
    const MultiMeanSpec base =
        alpha > 0.0 ? MultiMeanSpec::arithmetic(w) : MultiMeanSpec::harmonic(w);
    CheckReport rep = check_modified(base, RepFn::geometric(std::abs(alpha)), inputs, r,
                                     id == "4.4" ? ModifiedForm::Inner : ModifiedForm::Outer, cfg);
    rep.inequality_id = id;
    rep.constants["alpha"] = alpha;
    return rep;
  }
  if (is_two_var(id)) {
    if (inputs.size() != 2) throw Error(ErrorCode::ArityMismatch, id + " takes two matrices");
    const double alpha = std::abs(alpha_of(cell));
    static const std::map<std::string, TwoVarForm> form{
        {"4.6", TwoVarForm::Deformed},
        {"4.7", TwoVarForm::DeformedComplement},
        {"4.8", TwoVarForm::Bracket},
        {"4.9", TwoVarForm::BracketComplement}};
    const bool bracket = id == "4.8" || id == "4.9";
    const RepFn tau = bracket ? RepFn::harmonic(alpha) : RepFn::arithmetic(0.5);
    CheckReport rep = check_two_var(tau, RepFn::geometric(alpha), inputs[0], inputs[1], r,
                                    form.at(id), cfg);
    rep.constants["alpha"] = alpha;
    return rep;
  }
  if (id == "5.3") return check_ineq_5_3(w, inputs, r, cell.bounds, cfg);
  if (id == "L5.1") {
    if (inputs.size() != 2) throw Error(ErrorCode::ArityMismatch, "L5.1 takes A and C");
    return check_lemma_5_1(inputs[0], inputs[1], r, cell.bounds, cell.mu, cfg);
  }
  if (id == "5.4" || id == "5.5") {
    const double a = std::abs(alpha_of(cell));
    return id == "5.4" ? check_reverse(w, a, inputs, r, ReverseForm::PowerUpper, cell.bounds, cfg)
                       : check_reverse(w, -a, inputs, r, ReverseForm::PowerLower, cell.bounds, cfg);
  }
  if (id == "5.8") {
    return check_reverse(w, alpha_of(cell), inputs, r, ReverseForm::Deformed, cell.bounds, cfg);
  }
  if (id == "5.9") {
    return check_reverse(w, alpha_of(cell), inputs, r, ReverseForm::PowerDeformed, cell.bounds,
                         cfg);
  }
  if (id == "5.10") {
    return check_reverse(w, 1.0, inputs, r, ReverseForm::Karcher, cell.bounds, cfg);
  }
  if (id == "LM") return check_log_majorization(w, inputs, r, cfg);
  throw Error(ErrorCode::UnknownKind, "unknown inequality id '" + id + "'");
}

namespace {

struct TrialInputs {
  Weights w;
  Ensemble inputs;
};

TrialInputs draw_inputs(const CellParams& cell, const CampaignConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(cell.dim);
  if (cell.id == "L5.1") {
    SpdMatrix a = random_spd(d, cell.bounds.m, cell.bounds.big_m, rng);
    SpdMatrix c = random_spd(d, std::sqrt(cell.mu), 1.0, rng);
    return {Weights::uniform(1), {a, c}};
  }
  std::size_t n = 2;
  if (!is_two_var(cell.id)) {
    std::uniform_int_distribution<int> arity(config.min_arity, config.max_arity);
    n = static_cast<std::size_t>(arity(rng));
  }
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> raw(n);
  double total = 0.0;
  for (double& x : raw) total += (x = u(rng));
  for (double& x : raw) x /= total;
  const SpectrumBounds b = is_reverse(cell.id) ? cell.bounds : config.spectrum;
  Ensemble as;
  for (std::size_t j = 0; j < n; ++j) as.push_back(random_spd(d, b.m, b.big_m, rng));
  return {Weights(std::move(raw)), std::move(as)};
}

struct Outcome {
  std::string line;
  std::string id;
  bool error = false;
  bool no_convergence = false;
  bool holds = true;
  double margin = 0.0;
};

Json error_line(const std::string& id, const Error& e) {
  return {{"inequality_id", id},
          {"error", std::string(to_string(e.code()))},
          {"message", e.what()}};
}

/// Inputs under the names replay expects, so error lines can be re-run too.
Json inputs_json(const std::string& id, const Ensemble& inputs) {
  Json ms = Json::object();
  if (id == "L5.1" || is_two_var(id)) {
    ms["A"] = to_json(inputs[0]);
    ms[id == "L5.1" ? "C" : "B"] = to_json(inputs[1]);
    return ms;
  }
  for (std::size_t j = 0; j < inputs.size(); ++j) ms["A" + std::to_string(j + 1)] = to_json(inputs[j]);
  return ms;
}

Outcome evaluate_trial(const CellParams& cell, const CampaignConfig& config,
                       const SolverConfig& cfg, std::uint64_t seed, int trial) {
  Outcome out;
  out.id = cell.id;
  const TrialInputs in = draw_inputs(cell, config, seed);
  Json line;
  try {
    CheckReport rep = run_check(cell, in.w, in.inputs, cfg);
    rep.witness_seed = seed;
    out.holds = rep.holds;
    out.margin = rep.margin;
    line = to_json(rep);
  } catch (const Error& e) {
    out.error = true;
    out.no_convergence = e.code() == ErrorCode::NoConvergence;
    line = error_line(cell.id, e);
    line["witness_seed"] = seed;
    line["matrices"] = inputs_json(cell.id, in.inputs);
  }
  line["cell"] = cell_json(cell, in.w, trial);
  out.line = line.dump();
  return out;
}

void tally(CampaignSummary& s, const Outcome& o) {
  IdStats& st = s.by_id[o.id];
  ++st.checks;
  ++s.checks;
  if (o.error) {
    ++st.errors;
    o.no_convergence ? ++s.no_convergence : ++s.input_errors;
    return;
  }
  if (st.checks - st.errors == 1 || o.margin < st.worst_margin) st.worst_margin = o.margin;
  if (o.holds) {
    ++s.held;
  } else {
    ++s.failed;
    ++st.failed;
  }
}

std::vector<CellParams> enumerate_cells(const CampaignConfig& c) {
  std::vector<CellParams> cells;
  for (const auto& id : c.inequality_ids) {
    std::vector<std::optional<double>> alphas;
    if (check_takes_alpha(id)) {
      for (double a : c.alpha_values) alphas.emplace_back(a);
    } else {
      alphas.emplace_back(std::nullopt);
    }
    for (int d : c.dimensions) {
      for (double r : c.r_for(id)) {
        for (const auto& a : alphas) {
          cells.push_back({id, d, r, a, c.reverse_spectrum, c.mu});
        }
      }
    }
  }
  return cells;
}

Ensemble matrices_for_replay(const std::string& id, const Json& ms) {
  auto get = [&ms](const std::string& name) {
    if (!ms.contains(name)) throw Error(ErrorCode::MissingParameter, "replay needs matrix " + name);
    return spd_from_json(ms.at(name));
  };
  if (id == "L5.1") return {get("A"), get("C")};
  if (is_two_var(id)) return {get("A"), get("B")};
  Ensemble as;
  for (std::size_t j = 1; ms.contains("A" + std::to_string(j)); ++j) {
    as.push_back(get("A" + std::to_string(j)));
  }
  if (as.empty()) throw Error(ErrorCode::MissingParameter, "replay line has no matrices");
  return as;
}

}  // namespace

CheckReport replay_line(const Json& line, const SolverConfig& cfg) {
  try {
    CellParams cell;
    cell.id = line.at("inequality_id").get<std::string>();
    const Json& c = line.at("cell");
    cell.dim = c.at("dim").get<int>();
    cell.r = c.at("r").get<double>();
    if (c.contains("alpha") && !c.at("alpha").is_null()) cell.alpha = c.at("alpha").get<double>();
    if (c.contains("m")) cell.bounds = {c.at("m").get<double>(), c.at("M").get<double>()};
    if (c.contains("mu")) cell.mu = c.at("mu").get<double>();
    const Ensemble as = matrices_for_replay(cell.id, line.at("matrices"));
    const Weights w = cell.id == "L5.1" ? Weights::uniform(1)
                                        : weights_from_json(c.at("weights"));
    CheckReport rep = run_check(cell, w, as, cfg);
    if (line.contains("witness_seed") && !line.at("witness_seed").is_null()) {
      rep.witness_seed = line.at("witness_seed").get<std::uint64_t>();
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed replay line: ") + e.what());
  }
}

Json to_json(const CampaignSummary& s) {
  Json by_id = Json::object();
  for (const auto& [id, st] : s.by_id) {
    by_id[id] = {{"checks", st.checks},
                 {"failed", st.failed},
                 {"errors", st.errors},
                 {"worst_margin", st.worst_margin}};
  }
  return {{"summary",
           {{"checks", s.checks},
            {"held", s.held},
            {"failed", s.failed},
            {"input_errors", s.input_errors},
            {"no_convergence", s.no_convergence},
            {"by_id", std::move(by_id)}}}};
}

int campaign_exit_code(const CampaignSummary& s) {
  if (s.input_errors > 0) return 1;
  if (s.no_convergence > 0) return 2;
  if (s.failed > 0) return 3;
  return 0;
}

CampaignSummary run_campaign(const CampaignConfig& config, const SolverConfig& cfg, int threads,
                             std::ostream& out) {
  config.validate();
  cfg.validate();
  CampaignSummary summary;

  for (const Json& line : config.replay) {
    Outcome o;
    Json j;
    try {
      o.id = line.at("inequality_id").get<std::string>();
      const CheckReport rep = replay_line(line, cfg);
      o.holds = rep.holds;
      o.margin = rep.margin;
      j = to_json(rep);
      j["cell"] = line.at("cell");
    } catch (const Error& e) {
      o.error = true;
      o.no_convergence = e.code() == ErrorCode::NoConvergence;
      j = error_line(o.id, e);
    } catch (const nlohmann::json::exception& e) {
      o.error = true;
      j = error_line(o.id, Error(ErrorCode::ConfigError, e.what()));
    }
    out << j.dump() << '\n';
    tally(summary, o);
  }

  const std::vector<CellParams> cells = enumerate_cells(config);
  std::vector<std::vector<Outcome>> results(cells.size());
  std::vector<char> done(cells.size(), 0);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      std::vector<Outcome> lines;
      lines.reserve(static_cast<std::size_t>(config.trials));
      for (int t = 0; t < config.trials; ++t) {
        lines.push_back(evaluate_trial(cells[i], config, cfg, trial_seed(config.seed, i, t), t));
      }
      {
        std::lock_guard lock(mu);
        results[i] = std::move(lines);
        done[i] = 1;
      }
      cv.notify_all();
    }
  };

  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  if (n_threads == 1) {
    worker();
  } else {
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }

  // Emit in cell order as soon as each prefix is complete.
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::vector<Outcome> lines;
    {
      std::unique_lock lock(mu);
      if (n_threads > 1) cv.wait(lock, [&] { return done[i] != 0; });
      lines = std::move(results[i]);
    }
    for (const Outcome& o : lines) {
      out << o.line << '\n';
      tally(summary, o);
    }
    out.flush();
  }
  for (auto& th : pool) th.join();

  out << to_json(summary).dump() << '\n';
  return summary;
}

}  // namespace opmeans
