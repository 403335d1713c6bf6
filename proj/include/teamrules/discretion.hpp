#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "teamrules/classifiers.hpp"
#include "teamrules/humansim.hpp"

namespace teamrules {

enum class DiscretionKind { Oracle, Learned, Coin };

std::string to_string(DiscretionKind kind);

enum class ClassifierKind { BoostedStumps, LinearLogistic };

ClassifierKind classifier_from_string(const std::string& s);

/// Estimate of p(a|x), the probability that the human accepts a
/// contradicting recommendation on a row.
class DiscretionModel {
 public:
  DiscretionModel(DiscretionKind kind, std::shared_ptr<const ProbabilityModel> predictor,
                  std::size_t training_size, double holdout_accuracy);

  /// Probability in [0, 1]; throws DataError on arity mismatch.
  double predict(std::span<const double> row) const;
  std::vector<double> predict_all(const RawDataset& raw) const;

  DiscretionKind kind() const { return kind_; }
  std::size_t training_size() const { return training_size_; }
  double holdout_accuracy() const { return holdout_accuracy_; }
  std::size_t arity() const { return predictor_->arity(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }
  void set_holdout_accuracy(double v) { holdout_accuracy_ = v; }

 private:
  DiscretionKind kind_;
  std::shared_ptr<const ProbabilityModel> predictor_;
  std::size_t training_size_;
  double holdout_accuracy_;
  std::vector<std::string> warnings_;
};

/// Perfect knowledge of the accept behavior: 1 where the behavior accepts
/// and 0 elsewhere, on any row. Throws Error if the profile's recorded
/// accepts disagree with the behavior on `in_sample`.
DiscretionModel oracle(const HumanProfile& profile, const BehaviorSpec& spec, const RawDataset& in_sample);

/// Accept probability that ignores the row: a seeded hash of the row bits
/// decides 0 or 1 with equal odds. Accuracy against any behavior is ~50%.
DiscretionModel coin_discretion(std::size_t arity, std::uint64_t seed);

/// Fits the classifier on a seeded random subset of subset_size (x, a)
/// pairs and measures accuracy at 0.5 on the remaining rows (in-sample
/// accuracy when nothing remains). A single-class subset yields a constant
/// model at the Laplace-smoothed class prior, with a warning.
DiscretionModel fit_discretion(const RawDataset& features, std::span<const Label> accepts,
                               std::size_t subset_size, std::uint64_t seed,
                               ClassifierKind classifier = ClassifierKind::BoostedStumps);

/// Fraction of rows where predict >= 0.5 matches the accept label.
double discretion_accuracy(const DiscretionModel& model, const RawDataset& raw, std::span<const Label> accepts);

}  // namespace teamrules
