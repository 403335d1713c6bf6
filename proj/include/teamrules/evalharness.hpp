#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "teamrules/config.hpp"
#include "teamrules/discretion.hpp"
#include "teamrules/learner.hpp"

namespace teamrules {

/// Result of pairing an advisor with the simulated human on test rows.
struct TeamOutcome {
  std::vector<std::optional<Label>> recommendation;
  std::vector<Label> accepted;
  std::vector<Label> final_decision;
  double tdl = 0.0;
  double cl = 0.0;
  double ttl = 0.0;
  std::size_t contradiction_count = 0;
  std::size_t recommendation_count = 0;
};

/// Shows each row's advice to the human. A contradicting recommendation
/// is taken when the human's true accept label is 1; agreeing ones change
/// nothing. TDL is the final-decision error rate, CL = alpha times the
/// charged contradictions over N (every shown contradiction, or only the
/// accepted ones with cl_on_acceptance), TTL = TDL + CL.
TeamOutcome simulate_team(const Advisor& advisor, const DiscretionModel& disc, const BinarizedDataset& test,
                          const HumanProfile& human, double alpha, bool cl_on_acceptance = false);

/// Same, with the advice per row already decided.
TeamOutcome simulate_team(const std::vector<std::optional<Label>>& advice, const std::vector<Label>& labels,
                          const HumanProfile& human, double alpha, bool cl_on_acceptance = false);

struct ExperimentRecord {
  std::string dataset;
  std::string adb_mode;
  std::string mode;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string discretion_kind;
  std::size_t discretion_train_size = 0;
  double discretion_accuracy = 0.0;
  double tdl = 0.0;
  double cl = 0.0;
  double ttl = 0.0;
  std::size_t contradictions = 0;
  std::size_t recommendations = 0;
  double wall_time_ms = 0.0;
};

/// Everything about one (dataset, ADB, seed) that does not depend on the
/// mode, alpha or discretion model: data, split, human and candidates.
struct Scenario {
  std::string dataset_id;
  AdbMode adb_mode = AdbMode::Neutral;
  std::uint64_t seed = 0;
  std::shared_ptr<const RawDataset> train_raw;
  std::shared_ptr<const RawDataset> test_raw;
  std::shared_ptr<const BinarizedDataset> train;
  std::shared_ptr<const BinarizedDataset> test;
  BehaviorSpec behavior;
  HumanProfile train_human;
  HumanProfile test_human;
  CandidatePool pool;
  std::vector<std::string> warnings;
};

/// Generates or loads the data, splits it, simulates the human (fitting
/// the logistic surrogate on 20% of the training rows for non-Checkers
/// data), binarizes on the training rows and mines candidates.
Scenario prepare_scenario(const ExperimentConfig& cfg, AdbMode adb, std::uint64_t seed);

/// One scenario per ADB mode for a seed; data and candidates are shared.
std::vector<Scenario> prepare_scenarios(const ExperimentConfig& cfg, const std::vector<AdbMode>& adbs,
                                        std::uint64_t seed);

struct Cell {
  Mode mode = Mode::TeamRules;
  double alpha = 0.0;
  DiscretionKind discretion = DiscretionKind::Oracle;
  std::size_t subset_size = 0;  // learned discretion only
};

struct CellResult {
  ExperimentRecord record;
  FitResult fit;
  TeamOutcome outcome;
  LossBreakdown training_loss;  // TeamRules objective of R* on the training rows
};

/// Fits one configuration on a scenario and simulates it on the test rows.
CellResult run_cell(const ExperimentConfig& cfg, const Scenario& scenario, const Cell& cell);

/// Record for the unadvised human on the scenario's test rows.
ExperimentRecord human_record(const Scenario& scenario, double alpha);

struct SweepResult {
  std::vector<ExperimentRecord> records;
  std::vector<std::string> failures;
};

/// Runs fn(0..n-1) on up to `jobs` threads (0 = hardware concurrency).
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// ADB modes x seeds x alphas x modes with the configured discretion
/// kind, plus one unadvised-human record per (ADB, seed, alpha) when
/// enabled. Failed cells are listed and skipped.
SweepResult sweep_alpha(const ExperimentConfig& cfg, const std::vector<double>& alphas,
                        const std::vector<std::uint64_t>& seeds, std::size_t jobs = 1);

/// TEAMRULES with discretion learned on each subset size, plus the oracle
/// (and coin) reference rows, over ADB modes x seeds x the config alphas.
SweepResult sweep_discretion(const ExperimentConfig& cfg, const std::vector<std::size_t>& subset_sizes,
                             const std::vector<std::uint64_t>& seeds, std::size_t jobs = 1);

/// One-sided paired t-test p-value for mean(a) < mean(b). With zero
/// variance in the differences: 0 if the mean difference is negative,
/// 0.5 if zero, 1 if positive.
double paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side has no variance.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Writes records as CSV (doubles with %.17g) and `sidecar` as JSON next
/// to it (same stem, .json). Throws Error when a row breaks TTL = TDL + CL
/// or the path is unwritable.
void emit_results(const std::vector<ExperimentRecord>& records, const std::string& csv_path,
                  const nlohmann::json& sidecar);

std::vector<ExperimentRecord> read_results(const std::string& csv_path);

/// Table of mean TTL per mode for each (dataset, ADB) at alpha = 0, with
/// markers for TR vs HYRS_ADAPTED (* p<0.05, ** p<0.005) and TR vs BRS_LIKE
/// (◇, ◇◇) from paired one-sided t-tests over seeds. Empty when no
/// alpha = 0 rows exist.
std::string table1_summary(const std::vector<ExperimentRecord>& records);

/// Mean TTL, contradictions and recommendations per (dataset, ADB, mode,
/// discretion, alpha).
std::string sweep_summary(const std::vector<ExperimentRecord>& records);

}  // namespace teamrules
