#include "teamrules/objective.hpp"

#include <string>

namespace teamrules {

using nlohmann::json;

Decision team_decision(const SetCoverage& coverage, std::size_t row) {
  if (coverage.positive.test(row)) return Decision::One;
  if (coverage.negative.test(row)) return Decision::Zero;
  return Decision::Abstain;
}

Decision team_decision(const RuleSet& rs, const BinarizedDataset& data, std::size_t row) {
  for (const auto& r : rs.positive) {
    if (covers(r, data, row)) return Decision::One;
  }
  for (const auto& r : rs.negative) {
    if (covers(r, data, row)) return Decision::Zero;
  }
  return Decision::Abstain;
}

void TeamContext::validate() const {
  if (!dataset) throw ConfigError("team context has no dataset");
  const std::size_t n = dataset->rows();
  if (labels.size() != n || human.size() != n || accept_weights.size() != n) {
    throw DataError("team context vectors must all have length " + std::to_string(n));
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] > 1 || human[i] > 1) throw DataError("labels and decisions must be 0/1 (row " + std::to_string(i) + ")");
    if (!(accept_weights[i] >= 0.0 && accept_weights[i] <= 1.0)) {
      throw DataError("accept weight out of [0, 1] at row " + std::to_string(i));
    }
  }
}

TeamContext make_context(std::shared_ptr<const BinarizedDataset> dataset, std::vector<Label> human,
                         std::vector<double> accept_weights, double alpha) {
  TeamContext ctx;
  ctx.labels = dataset->labels;
  ctx.dataset = std::move(dataset);
  ctx.human = std::move(human);
  ctx.accept_weights = std::move(accept_weights);
  ctx.alpha = alpha;
  ctx.validate();
  return ctx;
}

json to_json(const LossBreakdown& b) {
  return json{{"decision_loss", b.decision_loss}, {"reconciliation_loss", b.reconciliation_loss}, {"total", b.total}};
}

LossBreakdown loss(const TeamContext& ctx, const SetCoverage& coverage) {
  double ell = 0.0;
  std::size_t contra = 0;
  for (std::size_t i = 0; i < ctx.rows(); ++i) {
    const Decision d = team_decision(coverage, i);
    const Label h = ctx.human[i];
    const Label yhat = d == Decision::One ? 1 : d == Decision::Zero ? 0 : h;
    if (yhat != ctx.labels[i]) ell += ctx.accept_weights[i];
    if (d != Decision::Abstain && yhat != h) ++contra;
  }
  LossBreakdown out;
  out.decision_loss = ell;
  out.reconciliation_loss = ctx.alpha * static_cast<double>(contra);
  out.total = out.decision_loss + out.reconciliation_loss;
  return out;
}

LossBreakdown loss(const TeamContext& ctx, const RuleSet& rs) { return loss(ctx, set_coverage(rs, *ctx.dataset)); }

LossBreakdown closed_form_loss(const TeamContext& ctx, const RuleSet& rs) {
  const auto cov = set_coverage(rs, *ctx.dataset);
  double ell = 0.0;
  double contra = 0.0;
  for (std::size_t i = 0; i < ctx.rows(); ++i) {
    const double cp = cov.positive.test(i) ? 1.0 : 0.0;
    const double cn = cov.negative.test(i) ? 1.0 : 0.0;
    const double y = ctx.labels[i];
    const double h = ctx.human[i];
    const double wrong = (1 - y) * cp + y * (1 - cp) * cn + (1 - cp) * (1 - cn) * (y * (1 - h) + h * (1 - y));
    ell += ctx.accept_weights[i] * wrong;
    contra += (1 - h) * cp + h * (1 - cp) * cn;
  }
  LossBreakdown out;
  out.decision_loss = ell;
  out.reconciliation_loss = ctx.alpha * contra;
  out.total = out.decision_loss + out.reconciliation_loss;
  return out;
}

double per_instance_loss(const TeamContext& ctx, const RuleSet& rs, std::size_t row) {
  if (row >= ctx.rows()) throw Error("row " + std::to_string(row) + " out of range");
  const Decision d = team_decision(rs, *ctx.dataset, row);
  const Label h = ctx.human[row];
  const Label yhat = d == Decision::One ? 1 : d == Decision::Zero ? 0 : h;
  double phi = yhat != ctx.labels[row] ? ctx.accept_weights[row] : 0.0;
  if (d != Decision::Abstain && yhat != h) phi += ctx.alpha;
  return phi;
}

std::size_t contradictions(const TeamContext& ctx, const SetCoverage& coverage) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < ctx.rows(); ++i) {
    const Decision d = team_decision(coverage, i);
    if (d == Decision::Abstain) continue;
    n += static_cast<std::size_t>((d == Decision::One ? 1 : 0) != ctx.human[i]);
  }
  return n;
}

}  // namespace teamrules
