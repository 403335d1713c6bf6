#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "teamrules/discretion.hpp"
#include "teamrules/objective.hpp"
#include "teamrules/rules.hpp"

namespace teamrules {

/// TEAMRULES is the full method. The others reuse the same search with a
/// different per-row cost:
///   HYRS_ADAPTED      p(a) = 1, alpha charged on every covered row
///   BRS_LIKE          plain error, uncovered rows take the default class
///   FULL_COVERAGE_TR  TeamRules cost, uncovered rows take the default class
enum class Mode { TeamRules, HyrsAdapted, BrsLike, FullCoverageTr };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);

/// True for the modes that always recommend (BRS_LIKE, FULL_COVERAGE_TR).
bool full_coverage(Mode mode);

struct SearchConfig {
  std::size_t iterations = 500;
  double alpha = 0.0;
  double temperature_base = 0.01;
  double min_support = 0.05;
  std::size_t max_rule_length = 1;
  std::size_t max_candidates = 10000;
  double top_fraction = 0.05;
  double gate_threshold = 0.5;
  std::uint64_t seed = 0;
  Mode mode = Mode::TeamRules;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  MiningOptions mining() const { return {min_support, max_rule_length, max_candidates}; }
};

nlohmann::json to_json(const SearchConfig& cfg);
/// Missing keys keep their defaults; unknown keys and invalid values throw
/// ConfigError.
SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig base = {});

struct FitResult {
  RuleSet rule_set;
  LossBreakdown best_training_loss;
  std::vector<double> loss_trace;  // best-so-far after each iteration
  std::size_t accepted_moves = 0;
  std::size_t iterations_run = 0;
  Mode mode = Mode::TeamRules;
  Label default_class = 1;
};

nlohmann::json to_json(const FitResult& r, const BinarizedDataset& data);

/// Simulated annealing over rule sets for the mode in cfg.
///
/// Starts from the empty set. Each iteration samples a row with
/// probability proportional to its current loss, proposes one add or cut
/// move targeted at that row, and reverts the move with probability
/// 1 - exp((L_prev - L_new) / C0^(t/T)). The best set seen is returned.
/// Stops early once every row has zero loss.
FitResult fit(const TeamContext& ctx, const CandidatePool& pool, const SearchConfig& cfg);

/// fit() for the baseline modes; throws ConfigError for TEAMRULES.
FitResult fit_baseline(const TeamContext& ctx, const CandidatePool& pool, const SearchConfig& cfg);

/// Majority label, ties to 1.
Label majority_class(const std::vector<Label>& labels);

/// Chooses a rule of the given polarity to cover `row`: eligible
/// candidates cover the row and are not already in rs; they are ranked by
/// the change in team loss they cause and one of the best ceil(q k) is
/// drawn uniformly. Returns the pool index, or nothing if none is eligible.
std::optional<std::size_t> select_rule_to_add(const CandidatePool& pool, Polarity polarity, std::size_t row,
                                              const TeamContext& ctx, const RuleSet& rs, double q, Rng& rng);

/// Deployment-time policy of a fitted rule set.
struct Advisor {
  RuleSet rules;
  Mode mode = Mode::TeamRules;
  Label default_class = 1;
  double gate_threshold = 0.5;

  /// Label to recommend, or nothing. TEAMRULES withholds on uncovered rows
  /// and where accept_probability < gate_threshold. HYRS_ADAPTED
  /// recommends on every covered row. The full-coverage modes recommend
  /// on every row, using the default class where uncovered.
  std::optional<Label> advise(Decision decision, double accept_probability) const;
  std::optional<Label> advise(const BinarizedDataset& data, std::size_t row, double accept_probability) const;
};

Advisor make_advisor(const FitResult& fit, double gate_threshold);

/// advise() for one row, evaluating the discretion model on the raw row.
std::optional<Label> advise(const Advisor& advisor, const DiscretionModel& disc, const BinarizedDataset& data,
                            std::size_t row);

}  // namespace teamrules
