#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "teamrules/common.hpp"
#include "teamrules/dataspace.hpp"

namespace teamrules {

/// A fitted binary probability model over raw feature rows.
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;
  virtual double predict(std::span<const double> row) const = 0;
  virtual std::size_t arity() const = 0;
  virtual std::string name() const = 0;
};

/// p(y=1|x) = sigmoid(w.x + b).
struct LogitScorer {
  std::vector<double> weights;
  double bias = 0.0;

  double score(std::span<const double> row) const;
  double probability(std::span<const double> row) const;
};

class LinearLogistic final : public ProbabilityModel {
 public:
  struct Options {
    double l2 = 1e-4;  // ridge on the weights, scaled by row count
    int max_iterations = 50;
    double tolerance = 1e-8;
  };

  /// Newton-Raphson (IRLS) fit. Non-convergence keeps the best iterate and
  /// sets converged() to false.
  static LinearLogistic fit(const RawDataset& data, std::span<const std::size_t> rows,
                            std::span<const Label> targets, const Options& options);
  static LinearLogistic fit(const RawDataset& data, std::span<const std::size_t> rows,
                            std::span<const Label> targets) {
    return fit(data, rows, targets, Options{});
  }

  double predict(std::span<const double> row) const override { return scorer_.probability(row); }
  std::size_t arity() const override { return scorer_.weights.size(); }
  std::string name() const override { return "linear_logistic"; }

  const LogitScorer& scorer() const { return scorer_; }
  bool converged() const { return converged_; }

 private:
  LogitScorer scorer_;
  bool converged_ = true;
};

/// Gradient-boosted depth-1 trees under logistic loss.
class BoostedStumps final : public ProbabilityModel {
 public:
  struct Options {
    int rounds = 100;
    double learning_rate = 0.1;
    int max_thresholds = 64;  // candidate split points per feature
    double lambda = 1.0;      // L2 on leaf values
  };

  struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    double left = 0.0;   // added when x < threshold
    double right = 0.0;  // added when x >= threshold
  };

  static BoostedStumps fit(const RawDataset& data, std::span<const std::size_t> rows,
                           std::span<const Label> targets, const Options& options);
  static BoostedStumps fit(const RawDataset& data, std::span<const std::size_t> rows,
                           std::span<const Label> targets) {
    return fit(data, rows, targets, Options{});
  }

  double predict(std::span<const double> row) const override;
  std::size_t arity() const override { return arity_; }
  std::string name() const override { return "boosted_stumps"; }

  const std::vector<Stump>& stumps() const { return stumps_; }

 private:
  std::size_t arity_ = 0;
  double base_score_ = 0.0;
  std::vector<Stump> stumps_;
};

/// Always returns the same probability.
class ConstantModel final : public ProbabilityModel {
 public:
  ConstantModel(double p, std::size_t arity) : p_(p), arity_(arity) {}
  double predict(std::span<const double>) const override { return p_; }
  std::size_t arity() const override { return arity_; }
  std::string name() const override { return "constant"; }

 private:
  double p_;
  std::size_t arity_;
};

double sigmoid(double z);

}  // namespace teamrules
