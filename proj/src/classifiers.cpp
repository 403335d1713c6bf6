#include "teamrules/classifiers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace teamrules {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LogitScorer::score(std::span<const double> row) const {
  double z = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * row[j];
  return z;
}

double LogitScorer::probability(std::span<const double> row) const { return sigmoid(score(row)); }

namespace {

// Penalized negative log-likelihood.
double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd z = x * beta;
  double nll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // log(1 + e^z) - y z, computed stably
    const double zi = z[i];
    nll += (zi > 0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi))) - y[i] * zi;
  }
  const Eigen::Index d = beta.size() - 1;
  return nll + 0.5 * ridge * beta.head(d).squaredNorm();
}

}  // namespace

LinearLogistic LinearLogistic::fit(const RawDataset& data, std::span<const std::size_t> rows,
                                   std::span<const Label> targets, const Options& options) {
  if (rows.size() != targets.size()) throw DataError("row/target length mismatch");
  if (rows.empty()) throw DataError("cannot fit a logistic model on zero rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(data.cols());
  Eigen::MatrixXd x(n, d + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto r = data.row(rows[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = r[static_cast<std::size_t>(j)];
    x(i, d) = 1.0;
    y[i] = targets[static_cast<std::size_t>(i)];
  }
  const double ridge = options.l2 * static_cast<double>(n);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
  double current = logistic_objective(x, y, beta, ridge);
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd p = (x * beta).unaryExpr([](double z) { return sigmoid(z); });
    const Eigen::VectorXd w = p.array() * (1.0 - p.array());
    Eigen::VectorXd grad = x.transpose() * (p - y);
    grad.head(d) += ridge * beta.head(d);
    Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;
    hess.diagonal().head(d).array() += ridge;
    hess.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    if (!step.allFinite()) break;

    // Step halving keeps the objective monotone.
    double scale = 1.0;
    Eigen::VectorXd candidate = beta - step;
    double value = logistic_objective(x, y, candidate, ridge);
    while (value > current && scale > 1e-6) {
      scale *= 0.5;
      candidate = beta - scale * step;
      value = logistic_objective(x, y, candidate, ridge);
    }
    if (value > current) break;
    beta = candidate;
    const double change = current - value;
    current = value;
    if ((scale * step).lpNorm<Eigen::Infinity>() < options.tolerance || change < options.tolerance) {
      converged = true;
      break;
    }
  }

  LinearLogistic model;
  model.scorer_.weights.assign(beta.data(), beta.data() + d);
  model.scorer_.bias = beta[d];
  model.converged_ = converged;
  return model;
}

BoostedStumps BoostedStumps::fit(const RawDataset& data, std::span<const std::size_t> rows,
                                 std::span<const Label> targets, const Options& options) {
  if (rows.size() != targets.size()) throw DataError("row/target length mismatch");
  if (rows.empty()) throw DataError("cannot fit boosted stumps on zero rows");
  const std::size_t n = rows.size();
  const std::size_t d = data.cols();

  BoostedStumps model;
  model.arity_ = d;
  const double positives = static_cast<double>(std::count(targets.begin(), targets.end(), Label{1}));
  const double prior = std::clamp(positives / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
  model.base_score_ = std::log(prior / (1.0 - prior));

  // Per feature: row order by value and candidate cut positions. A cut at
  // position k sends sorted rows [0, k) left (x < threshold).
  struct FeatureCuts {
    std::vector<std::size_t> order;
    std::vector<std::size_t> positions;
    std::vector<double> thresholds;
  };
  std::vector<FeatureCuts> cuts(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& fc = cuts[f];
    fc.order.resize(n);
    std::iota(fc.order.begin(), fc.order.end(), std::size_t{0});
    auto value = [&](std::size_t k) { return data.at(rows[k], f); };
    std::stable_sort(fc.order.begin(), fc.order.end(),
                     [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    std::vector<std::size_t> boundaries;
    for (std::size_t k = 1; k < n; ++k) {
      if (value(fc.order[k]) > value(fc.order[k - 1])) boundaries.push_back(k);
    }
    const auto limit = static_cast<std::size_t>(std::max(options.max_thresholds, 1));
    std::vector<std::size_t> chosen;
    if (boundaries.size() <= limit) {
      chosen = boundaries;
    } else {
      for (std::size_t s = 0; s < limit; ++s) {
        const std::size_t idx = (s * 2 + 1) * boundaries.size() / (2 * limit);
        if (chosen.empty() || boundaries[idx] != chosen.back()) chosen.push_back(boundaries[idx]);
      }
    }
    for (auto k : chosen) {
      fc.positions.push_back(k);
      fc.thresholds.push_back(0.5 * (value(fc.order[k - 1]) + value(fc.order[k])));
    }
  }

  std::vector<double> score(n, model.base_score_);
  std::vector<double> grad(n), hess(n);
  for (int round = 0; round < options.rounds; ++round) {
    double g_total = 0.0, h_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      grad[i] = p - targets[i];
      hess[i] = std::max(p * (1.0 - p), 1e-12);
      g_total += grad[i];
      h_total += hess[i];
    }
    const double parent = g_total * g_total / (h_total + options.lambda);

    double best_gain = 0.0;
    Stump best;
    bool found = false;
    for (std::size_t f = 0; f < d; ++f) {
      const auto& fc = cuts[f];
      double gl = 0.0, hl = 0.0;
      std::size_t k = 0;
      for (std::size_t c = 0; c < fc.positions.size(); ++c) {
        for (; k < fc.positions[c]; ++k) {
          gl += grad[fc.order[k]];
          hl += hess[fc.order[k]];
        }
        const double gr = g_total - gl;
        const double hr = h_total - hl;
        const double gain = gl * gl / (hl + options.lambda) + gr * gr / (hr + options.lambda) - parent;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best.feature = f;
          best.threshold = fc.thresholds[c];
          best.left = -options.learning_rate * gl / (hl + options.lambda);
          best.right = -options.learning_rate * gr / (hr + options.lambda);
          found = true;
        }
      }
    }
    if (!found) break;
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += data.at(rows[i], best.feature) < best.threshold ? best.left : best.right;
    }
    model.stumps_.push_back(best);
  }
  return model;
}

double BoostedStumps::predict(std::span<const double> row) const {
  double z = base_score_;
  for (const auto& s : stumps_) z += row[s.feature] < s.threshold ? s.left : s.right;
  return sigmoid(z);
}

}  // namespace teamrules
