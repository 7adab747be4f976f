// Command-line front end: mean, verify, search, kantorovich.
//
// Exit codes: 0 success, 1 input error, 2 no convergence, 3 inequality failure,
// 4 search exhausted.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "opmeans/campaign.hpp"
#include "opmeans/json_io.hpp"

namespace {

using opmeans::Json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitExhausted = 4;

/// Reads a JSON file, or parses the argument itself when it starts with '{' or '['.
Json read_json(const std::string& path) {
  if (!path.empty() && (path.front() == '{' || path.front() == '[')) {
    try {
      return Json::parse(path);
    } catch (const nlohmann::json::exception& e) {
      throw opmeans::Error(opmeans::ErrorCode::ConfigError, std::string("inline JSON: ") + e.what());
    }
  }
  std::ifstream in(path);
  if (!in) throw opmeans::Error(opmeans::ErrorCode::ConfigError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw opmeans::Error(opmeans::ErrorCode::ConfigError, path + ": " + e.what());
  }
}

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> max_iters;
  int threads = 1;
  std::string output;

  opmeans::SolverConfig solver() const {
    opmeans::SolverConfig cfg;
    if (tol) cfg.dt_tol = *tol;
    if (max_iters) cfg.max_iters = *max_iters;
    cfg.validate();
    return cfg;
  }
};

/// Writes to --output when given, else stdout.
void emit(const Common& common, const std::string& text) {
  if (common.output.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(common.output);
  if (!out) throw opmeans::Error(opmeans::ErrorCode::ConfigError, "cannot write " + common.output);
  out << text << '\n';
}

int cmd_mean(const Common& common, const std::string& spec_file, const std::string& matrices_file) {
  const opmeans::SolverConfig cfg = common.solver();
  const opmeans::MultiMeanSpec spec = opmeans::multimean_from_json(read_json(spec_file), cfg);
  const opmeans::Ensemble as = opmeans::ensemble_from_json(read_json(matrices_file));
  try {
    emit(common, opmeans::to_json(opmeans::evaluate(spec, as, cfg)).dump());
    return kExitOk;
  } catch (const opmeans::NoConvergenceError& e) {
    Json diag{{"error", "NoConvergence"}, {"message", e.what()}, {"last", opmeans::to_json(e.last())}};
    emit(common, diag.dump());
    return kExitNoConvergence;
  }
}

int cmd_verify(const Common& common, const std::string& campaign_file) {
  opmeans::CampaignConfig campaign = opmeans::campaign_from_json(read_json(campaign_file));
  if (common.seed) campaign.seed = *common.seed;
  const std::string path = common.output.empty() ? campaign.output_path : common.output;
  const opmeans::SolverConfig cfg = common.solver();

  opmeans::CampaignSummary summary;
  if (path.empty()) {
    summary = opmeans::run_campaign(campaign, cfg, common.threads, std::cout);
  } else {
    std::ofstream out(path);
    if (!out) throw opmeans::Error(opmeans::ErrorCode::ConfigError, "cannot write " + path);
    summary = opmeans::run_campaign(campaign, cfg, common.threads, out);
    std::cerr << opmeans::to_json(summary).dump() << '\n';
  }
  return opmeans::campaign_exit_code(summary);
}

int cmd_search(const Common& common, const std::string& tau_file, const std::string& mode,
               double r, opmeans::SearchConfig search) {
  const opmeans::RepFn tau = opmeans::repfn_from_json(read_json(tau_file), common.solver());
  const auto cx = opmeans::optimality_scan(tau, r, opmeans::parse_optimality_mode(mode), search);
  if (!cx) {
    emit(common, "none");
    return kExitExhausted;
  }
  emit(common, opmeans::to_json(*cx).dump());
  return kExitOk;
}

int cmd_kantorovich(const Common& common, double h, double p) {
  std::ostringstream s;
  s.precision(17);
  s << opmeans::kantorovich(h, p);
  emit(common, s.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate operator means: evaluation, inequality campaigns, searches"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Override the campaign seed");
    sub->add_option("--tol", common.tol, "Fixed-point stopping tolerance in the Thompson metric");
    sub->add_option("--max-iters", common.max_iters, "Iteration cap for the mean solvers");
    sub->add_option("--threads", common.threads, "Worker threads for campaign cells")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output", common.output, "Write the result here instead of stdout");
  };

  std::string spec_file, matrices_file;
  auto* mean = app.add_subcommand("mean", "Evaluate a multivariate mean");
  mean->add_option("--spec", spec_file, "Mean specification (JSON)")->required();
  mean->add_option("--matrices", matrices_file, "Input matrices (JSON)")->required();
  add_common(mean);

  std::string campaign_file;
  auto* verify = app.add_subcommand("verify", "Run a verification campaign");
  verify->add_option("campaign", campaign_file, "Campaign configuration (JSON)")->required();
  add_common(verify);

  std::string tau_file, mode;
  double r = 0.0;
  opmeans::SearchConfig search;
  auto* srch = app.add_subcommand("search", "Search for optimality counterexamples");
  srch->add_option("--tau", tau_file, "Representing function (JSON)")->required();
  srch->add_option("--mode", mode, "prop_6_1 or prop_6_2")->required();
  srch->add_option("-r,--r", r, "Exponent")->required();
  srch->add_option("--xy-points", search.xy_points, "Grid points per axis for x and y");
  srch->add_option("--k-points", search.k_points, "Grid points for the scale k");
  srch->add_option("--diag-points", search.diag_points, "Grid points for the diagonal family");
  add_common(srch);

  double h = 0.0, p = 0.0;
  auto* kant = app.add_subcommand("kantorovich", "Evaluate the generalized Kantorovich constant");
  kant->add_option("ratio", h, "Ratio h > 1")->required();
  kant->add_option("exponent", p, "Exponent p")->required();
  add_common(kant);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*mean) return cmd_mean(common, spec_file, matrices_file);
    if (*verify) return cmd_verify(common, campaign_file);
    if (*srch) return cmd_search(common, tau_file, mode, r, search);
    if (*kant) return cmd_kantorovich(common, h, p);
  } catch (const opmeans::NoConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const opmeans::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == opmeans::ErrorCode::NoConvergence ? kExitNoConvergence : kExitInput;
  }
  return kExitInput;
}
