#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opmeans/json_io.hpp"

namespace opmeans {

/// A randomized verification campaign over inequality ids × dims × r × α.
///
/// Supported ids: 3.5, 3.9–3.14, 4.1, 4.2, 4.4–4.9, 5.3, L5.1, 5.4, 5.5, 5.8–5.10, LM.
/// Ids that take no α collapse the α axis to a single cell. In JSON, "r_values" is either a
/// list shared by all ids or an object mapping ids to their own lists.
struct CampaignConfig {
  std::vector<std::string> inequality_ids;
  std::vector<int> dimensions;
  std::vector<double> r_values;
  /// Per-id r lists; an id listed here ignores r_values.
  std::map<std::string, std::vector<double>> r_by_id;
  std::vector<double> alpha_values{1.0};
  int trials = 1;
  std::uint64_t seed = 0;
  std::string output_path;
  SpectrumBounds spectrum{0.1, 10.0};          // forward families
  SpectrumBounds reverse_spectrum{1.0, 4.0};   // Kantorovich families
  double mu = 0.25;                            // lower bound on C² for L5.1
  int min_arity = 2;
  int max_arity = 5;
  /// Previously reported lines to re-evaluate from their embedded witnesses.
  std::vector<Json> replay;

  void validate() const;
  const std::vector<double>& r_for(const std::string& id) const;
};

CampaignConfig campaign_from_json(const Json& j);
Json to_json(const CampaignConfig& c);

/// Parameters identifying one check instance; enough to replay it from stored matrices.
struct CellParams {
  std::string id;
  int dim = 0;
  double r = 1.0;
  std::optional<double> alpha;
  SpectrumBounds bounds{1.0, 4.0};
  double mu = 0.25;
};

struct IdStats {
  int checks = 0;
  int failed = 0;
  int errors = 0;
  double worst_margin = 0.0;
};

struct CampaignSummary {
  int checks = 0;
  int held = 0;
  int failed = 0;
  int input_errors = 0;
  int no_convergence = 0;
  std::map<std::string, IdStats> by_id;
};

Json to_json(const CampaignSummary& s);

/// 0 all hold, 1 input errors, 2 solver non-convergence, 3 inequality failures.
int campaign_exit_code(const CampaignSummary& s);

/// Whether an id belongs to the campaign vocabulary and whether it takes α.
bool known_check_id(const std::string& id);
bool check_takes_alpha(const std::string& id);

/// Evaluates one check on the given inputs. For L5.1 inputs are {A, C}; for 4.6–4.9 {A, B}.
CheckReport run_check(const CellParams& cell, const Weights& w, const Ensemble& inputs,
                      const SolverConfig& cfg = {});

/// Re-evaluates a stored report line from its embedded matrices.
CheckReport replay_line(const Json& line, const SolverConfig& cfg = {});

/// Streams JSON lines (reports, then one summary line) to out in deterministic cell order.
/// Cells run on up to `threads` workers; output bytes do not depend on the thread count.
CampaignSummary run_campaign(const CampaignConfig& config, const SolverConfig& cfg, int threads,
                             std::ostream& out);

/// Per-trial seed derived from the campaign seed and the cell and trial indices.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t cell, int trial);

}  // namespace opmeans
