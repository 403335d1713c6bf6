#include "teamrules/discretion.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

namespace teamrules {

std::string to_string(DiscretionKind kind) {
  switch (kind) {
    case DiscretionKind::Oracle: return "oracle";
    case DiscretionKind::Learned: return "learned";
    case DiscretionKind::Coin: return "coin";
  }
  return "?";
}

ClassifierKind classifier_from_string(const std::string& s) {
  if (s == "boosted_stumps" || s == "stumps") return ClassifierKind::BoostedStumps;
  if (s == "linear_logistic" || s == "logistic") return ClassifierKind::LinearLogistic;
  throw ConfigError("unknown discretion classifier '" + s + "'");
}

DiscretionModel::DiscretionModel(DiscretionKind kind, std::shared_ptr<const ProbabilityModel> predictor,
                                 std::size_t training_size, double holdout_accuracy)
    : kind_(kind),
      predictor_(std::move(predictor)),
      training_size_(training_size),
      holdout_accuracy_(holdout_accuracy) {}

double DiscretionModel::predict(std::span<const double> row) const {
  if (row.size() != predictor_->arity()) {
    throw DataError("discretion model expects " + std::to_string(predictor_->arity()) + " features, got " +
                    std::to_string(row.size()));
  }
  return std::clamp(predictor_->predict(row), 0.0, 1.0);
}

std::vector<double> DiscretionModel::predict_all(const RawDataset& raw) const {
  std::vector<double> out(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) out[i] = predict(raw.row(i));
  return out;
}

namespace {

class AcceptRuleModel final : public ProbabilityModel {
 public:
  AcceptRuleModel(RowPredicate rule, std::size_t arity) : rule_(std::move(rule)), arity_(arity) {}
  double predict(std::span<const double> row) const override { return rule_(row) ? 1.0 : 0.0; }
  std::size_t arity() const override { return arity_; }
  std::string name() const override { return "oracle"; }

 private:
  RowPredicate rule_;
  std::size_t arity_;
};

class CoinModel final : public ProbabilityModel {
 public:
  CoinModel(std::size_t arity, std::uint64_t seed) : arity_(arity), seed_(seed) {}
  double predict(std::span<const double> row) const override {
    std::uint64_t h = seed_;
    for (double v : row) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h = mix_seed(h ^ bits, 0x5eed);
    }
    return (h >> 63) ? 1.0 : 0.0;
  }
  std::size_t arity() const override { return arity_; }
  std::string name() const override { return "coin"; }

 private:
  std::size_t arity_;
  std::uint64_t seed_;
};

}  // namespace

DiscretionModel oracle(const HumanProfile& profile, const BehaviorSpec& spec, const RawDataset& in_sample) {
  auto rule = accept_function(spec, in_sample.feature_names);
  if (profile.accepts.size() != in_sample.rows()) throw DataError("profile length does not match the dataset");
  for (std::size_t i = 0; i < in_sample.rows(); ++i) {
    if ((rule(in_sample.row(i)) ? 1 : 0) != profile.accepts[i]) {
      throw Error("profile accepts disagree with the behavior at row " + std::to_string(i));
    }
  }
  return DiscretionModel(DiscretionKind::Oracle, std::make_shared<AcceptRuleModel>(std::move(rule), in_sample.cols()),
                         in_sample.rows(), 1.0);
}

DiscretionModel coin_discretion(std::size_t arity, std::uint64_t seed) {
  return DiscretionModel(DiscretionKind::Coin, std::make_shared<CoinModel>(arity, seed), 0, 0.5);
}

double discretion_accuracy(const DiscretionModel& model, const RawDataset& raw, std::span<const Label> accepts) {
  if (raw.rows() == 0) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    hits += static_cast<std::size_t>((model.predict(raw.row(i)) >= 0.5 ? 1 : 0) == accepts[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(raw.rows());
}

DiscretionModel fit_discretion(const RawDataset& features, std::span<const Label> accepts,
                               std::size_t subset_size, std::uint64_t seed, ClassifierKind classifier) {
  const std::size_t n = features.rows();
  if (accepts.size() != n) throw DataError("accept vector length does not match the dataset");
  if (subset_size < 1 || subset_size > n) {
    throw ConfigError("discretion subset_size must be in [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(subset_size));
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(subset_size), order.end());
  std::sort(train.begin(), train.end());
  std::sort(rest.begin(), rest.end());

  std::vector<Label> targets;
  for (auto i : train) targets.push_back(accepts[i]);
  const auto positives = static_cast<std::size_t>(std::count(targets.begin(), targets.end(), Label{1}));

  std::shared_ptr<const ProbabilityModel> predictor;
  std::string warning;
  if (positives == 0 || positives == targets.size()) {
    const double prior = (static_cast<double>(positives) + 1.0) / (static_cast<double>(targets.size()) + 2.0);
    predictor = std::make_shared<ConstantModel>(prior, features.cols());
    warning = "discretion training subset has a single class; using a constant predictor";
  } else if (classifier == ClassifierKind::BoostedStumps) {
    predictor = std::make_shared<BoostedStumps>(BoostedStumps::fit(features, train, targets));
  } else {
    predictor = std::make_shared<LinearLogistic>(LinearLogistic::fit(features, train, targets));
  }

  DiscretionModel model(DiscretionKind::Learned, std::move(predictor), subset_size, 0.0);
  if (!warning.empty()) model.add_warning(warning);
  const auto& eval_rows = rest.empty() ? train : rest;
  std::vector<Label> eval_targets;
  for (auto i : eval_rows) eval_targets.push_back(accepts[i]);
  model.set_holdout_accuracy(discretion_accuracy(model, features.subset(eval_rows), eval_targets));
  return model;
}

}  // namespace teamrules
