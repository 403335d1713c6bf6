#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "teamrules/classifiers.hpp"
#include "teamrules/common.hpp"
#include "teamrules/dataspace.hpp"

namespace teamrules {

enum class CompareOp { GE, GT, LT, LE, EQ };

/// Declarative boolean condition over a raw feature row.
///
/// Leaves compare a named feature against a constant or another feature,
/// or test whether a logistic scorer's confidence 2|p - 0.5| falls in
/// (lo, hi] (lo == 0 is inclusive), or compare the sum of a list of
/// features (all features when the list is empty) against a constant.
/// Inner nodes combine with all/any/not.
struct Condition {
  enum class Kind { Compare, All, Any, Not, LogitBand, Sum };

  Kind kind = Kind::All;
  std::string feature;
  CompareOp op = CompareOp::GE;
  std::optional<double> value;
  std::optional<std::string> other_feature;
  std::vector<Condition> children;
  LogitScorer scorer;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::string> sum_features;

  static Condition compare(std::string feature, CompareOp op, double value);
  static Condition compare_features(std::string feature, CompareOp op, std::string other);
  static Condition all(std::vector<Condition> children);
  static Condition any(std::vector<Condition> children);
  static Condition negate(Condition child);
  static Condition logit_band(LogitScorer scorer, double lo, double hi);
  static Condition feature_sum(std::vector<std::string> features, CompareOp op, double value);
  static Condition always() { return all({}); }
};

/// Condition bound to a feature layout.
using RowPredicate = std::function<bool(std::span<const double>)>;

/// Resolves feature names once; throws ConfigError on unknown names.
RowPredicate compile(const Condition& condition, const std::vector<std::string>& feature_names);

nlohmann::json to_json(const Condition& condition);
Condition condition_from_json(const nlohmann::json& j);

enum class AdbMode { Rational, Neutral, Irrational };

std::string to_string(AdbMode mode);
AdbMode adb_mode_from_string(const std::string& s);

/// A region of the instance space with a fixed human accuracy.
///
/// When follow_model is set, the human in this region reproduces that
/// model's thresholded decision instead of a Bernoulli(accuracy) draw; the
/// accuracy value is then informational only.
struct AccuracyRegion {
  Condition region;
  double accuracy = 1.0;
  std::optional<LogitScorer> follow_model;
};

struct BehaviorSpec {
  std::vector<AccuracyRegion> accuracy_regions;
  AdbMode adb_mode = AdbMode::Rational;
  std::optional<Condition> neutral_region;

  /// Throws ConfigError when malformed (empty regions, bad accuracy,
  /// NEUTRAL without neutral_region).
  void validate() const;
};

nlohmann::json to_json(const BehaviorSpec& spec);
BehaviorSpec behavior_from_json(const nlohmann::json& j);

struct HumanProfile {
  std::vector<Label> decisions;
  std::vector<Label> accepts;
  std::optional<std::vector<double>> confidence;
  std::uint64_t seed = 0;

  std::size_t size() const { return decisions.size(); }
  HumanProfile subset(std::span<const std::size_t> indices) const;
};

/// Index of the unique region matching each row. Throws DataError naming
/// the row when a row matches no region or more than one.
std::vector<std::size_t> assign_regions(const RawDataset& raw, const BehaviorSpec& spec);

/// h = y with probability = region accuracy, else 1 - y. One uniform draw
/// per row in row order, so the result depends only on (raw, spec, seed).
std::vector<Label> simulate_decisions(const RawDataset& raw, const BehaviorSpec& spec, std::uint64_t seed);

/// Deterministic accept behavior: RATIONAL accepts exactly in the
/// lowest-accuracy region(s), IRRATIONAL is its complement, NEUTRAL accepts
/// where neutral_region holds.
std::vector<Label> simulate_adb(const RawDataset& raw, const BehaviorSpec& spec);

/// The accept rule of simulate_adb as a function of a single row.
RowPredicate accept_function(const BehaviorSpec& spec, const std::vector<std::string>& feature_names);

/// Region accuracy per row.
std::vector<double> record_confidence(const BehaviorSpec& spec, const RawDataset& raw);

/// Decisions, accepts and confidence in one profile.
HumanProfile simulate_human(const RawDataset& raw, const BehaviorSpec& spec, std::uint64_t seed);

/// Accuracy band on the surrogate confidence s = 2|p(y|x) - 0.5|, covering
/// s in (lo, hi] (lo == 0 inclusive). No accuracy means the human follows
/// the surrogate's own thresholded decision there.
struct ConfidenceBand {
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> accuracy;
};

struct SurrogateHuman {
  LogitScorer scorer;
  std::vector<std::size_t> fit_rows;        // excluded subset used to fit the scorer
  std::vector<std::size_t> remaining_rows;  // rows the decisions refer to
  std::vector<Label> decisions;             // aligned with remaining_rows
  std::vector<AccuracyRegion> regions;      // partition of [0, 1] in s
  std::vector<std::string> warnings;
};

/// Fits a linear-logistic p(y|x) on a seeded holdout_fraction of `raw`,
/// then simulates decisions on the remaining rows band by band. Gaps in
/// the band list are filled with follow-the-model bands.
SurrogateHuman fit_surrogate_human(const RawDataset& raw, double holdout_fraction,
                                   const std::vector<ConfidenceBand>& bands, std::uint64_t seed);

/// Bands with human accuracy 0.5 where s > 0.5 and 1.0 elsewhere.
std::vector<ConfidenceBand> high_confidence_coin_bands();

/// Built-in Checkers behavior: 80% accuracy where x1 > x2, 100% elsewhere;
/// NEUTRAL accepts where x1 >= 1.
BehaviorSpec checkers_behavior(AdbMode mode);

}  // namespace teamrules
