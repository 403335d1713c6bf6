#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "teamrules/discretion.hpp"
#include "teamrules/humansim.hpp"
#include "teamrules/learner.hpp"

namespace teamrules {

struct DatasetConfig {
  std::string name = "checkers";  // checkers | gaussian | csv
  std::string id;                 // label used in result rows; defaults to name
  std::size_t n_train = 4000;
  std::size_t n_test = 800;
  std::string path;
  std::string label_column = "label";
  double train_fraction = 0.8;
  int bins = 0;                             // 0 picks 9 for synthetic data, 4 for csv
  std::string candidate_source = "fpgrowth";  // fpgrowth | forest
  std::size_t forest_trees = 50;
};

struct HumanConfig {
  std::vector<AdbMode> adb_modes = {AdbMode::Neutral};
  // Empty means the dataset's built-in behavior.
  std::vector<AccuracyRegion> accuracy_regions;
  std::optional<Condition> neutral_region;
  double surrogate_holdout = 0.2;
  std::vector<ConfidenceBand> bands = high_confidence_coin_bands();
};

struct DiscretionConfig {
  DiscretionKind kind = DiscretionKind::Oracle;
  ClassifierKind classifier = ClassifierKind::BoostedStumps;
  std::vector<std::size_t> subset_sizes;  // non-empty enables the degradation sweep
  bool include_oracle = true;
  bool include_coin = false;
};

struct SweepConfig {
  std::vector<double> alphas = {0.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<Mode> modes = {Mode::TeamRules, Mode::HyrsAdapted, Mode::BrsLike};
  bool include_human = true;
};

struct EvaluationConfig {
  bool cl_on_acceptance = false;
  bool record_wall_time = false;
};

struct OutputConfig {
  std::string dir = "results";
  std::string prefix;  // defaults to the experiment name
};

struct ExperimentConfig {
  std::string name = "experiment";
  DatasetConfig dataset;
  HumanConfig human;
  DiscretionConfig discretion;
  SearchConfig search;
  SweepConfig sweep;
  EvaluationConfig evaluation;
  OutputConfig output;

  /// Throws ConfigError with the dotted path of the first bad field.
  void validate() const;
  std::string dataset_id() const { return dataset.id.empty() ? dataset.name : dataset.id; }
  int bins() const { return dataset.bins > 0 ? dataset.bins : (dataset.name == "csv" ? 4 : 9); }
};

/// Parses a config object. Missing fields take their defaults; the search
/// rule length defaults to 1 for checkers and 3 otherwise. Unknown keys
/// are rejected. Relative csv paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = "");

/// Reads and parses a JSON config file.
ExperimentConfig load_config(const std::string& path);

/// Fully resolved config, every default spelled out.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Path of a shipped preset, searched in $TEAMRULES_PRESET_DIR, ./presets
/// and the install location. Throws ConfigError when absent.
std::string preset_path(const std::string& name);

}  // namespace teamrules
