#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "json.hpp"

#include "teamrules/dataspace.hpp"
#include "teamrules/rules.hpp"

namespace teamrules {

enum class Decision { One, Zero, Abstain };

/// ONE if any R+ rule covers the row, else ZERO if any R- rule does, else
/// ABSTAIN.
Decision team_decision(const RuleSet& rs, const BinarizedDataset& data, std::size_t row);
Decision team_decision(const SetCoverage& coverage, std::size_t row);

/// Training data augmented with the human's decisions and the accept
/// weights p(a_i).
struct TeamContext {
  std::shared_ptr<const BinarizedDataset> dataset;
  std::vector<Label> labels;
  std::vector<Label> human;
  std::vector<double> accept_weights;
  double alpha = 0.0;

  std::size_t rows() const { return labels.size(); }

  /// Throws ConfigError/DataError on length mismatch or out-of-range values.
  void validate() const;
};

/// Builds a context whose labels come from the dataset.
TeamContext make_context(std::shared_ptr<const BinarizedDataset> dataset, std::vector<Label> human,
                         std::vector<double> accept_weights, double alpha);

struct LossBreakdown {
  double decision_loss = 0.0;
  double reconciliation_loss = 0.0;
  double total = 0.0;
};

nlohmann::json to_json(const LossBreakdown& b);

/// Team loss via the decision process: abstained rows take the human's
/// decision, every row's error is weighted by p(a_i), and every covered row
/// whose recommendation differs from h_i costs alpha. Sums over rows.
LossBreakdown loss(const TeamContext& ctx, const RuleSet& rs);
LossBreakdown loss(const TeamContext& ctx, const SetCoverage& coverage);

/// The same quantity from the coverage-indicator expressions
///   l = sum p [(1-y)C+ + y(1-C+)C- + (1-C+)(1-C-)(y(1-h) + h(1-y))]
///   w = alpha sum [(1-h)C+ + h(1-C+)C-]
LossBreakdown closed_form_loss(const TeamContext& ctx, const RuleSet& rs);

/// Contribution of one row; these sum to loss().total.
double per_instance_loss(const TeamContext& ctx, const RuleSet& rs, std::size_t row);

/// Number of covered rows whose recommendation differs from h.
std::size_t contradictions(const TeamContext& ctx, const SetCoverage& coverage);

}  // namespace teamrules
