#include "doctest.h"
#include "helpers.hpp"
#include "teamrules/objective.hpp"

using namespace teamrules;

namespace {

std::shared_ptr<BinarizedDataset> single_flag(std::vector<double> flag, std::vector<Label> labels) {
  auto raw = std::make_shared<RawDataset>();
  raw->feature_names = {"f"};
  raw->values = std::move(flag);
  raw->labels = std::move(labels);
  auto data = std::make_shared<BinarizedDataset>(binarize(*raw, 1));
  data->source = raw;
  return data;
}

RuleSet random_rules(Rng& rng, std::size_t cols) {
  RuleSet rs;
  for (auto* side : {&rs.positive, &rs.negative}) {
    const auto k = rng.below(4);
    for (std::size_t r = 0; r < k; ++r) {
      std::vector<std::uint32_t> items = {static_cast<std::uint32_t>(rng.below(cols))};
      if (rng.coin()) items.push_back(static_cast<std::uint32_t>(rng.below(cols)));
      side->push_back(Rule::make(items));
    }
  }
  return rs;
}

TeamContext random_context(Rng& rng, std::size_t n, std::size_t features) {
  auto data = testing::random_binary(n, features, rng);
  std::vector<double> p(n);
  for (auto& v : p) v = rng.coin() ? rng.uniform() : static_cast<double>(rng.coin());
  return make_context(data, testing::random_labels(n, rng), p, rng.uniform());
}

}  // namespace

TEST_CASE("three-row hand example") {
  auto data = single_flag({1, 1, 0}, {1, 0, 1});
  const auto ctx = make_context(data, {0, 0, 0}, {0.8, 0.5, 0.9}, 0.1);
  RuleSet rs;
  rs.positive = {Rule::make({0})};
  REQUIRE(data->at(0, 0));
  REQUIRE_FALSE(data->at(2, 0));
  const auto l = loss(ctx, rs);
  CHECK(l.decision_loss == doctest::Approx(1.4));
  CHECK(l.reconciliation_loss == doctest::Approx(0.2));
  CHECK(l.total == doctest::Approx(1.6));
  CHECK(per_instance_loss(ctx, rs, 0) == doctest::Approx(0.1));
  CHECK(per_instance_loss(ctx, rs, 1) == doctest::Approx(0.6));
  CHECK(per_instance_loss(ctx, rs, 2) == doctest::Approx(0.9));
}

TEST_CASE("team decision precedence") {
  auto data = single_flag({1, 0}, {1, 0});
  RuleSet both;
  both.positive = {Rule::make({0})};
  both.negative = {Rule::make({0})};
  CHECK(team_decision(both, *data, 0) == Decision::One);
  CHECK(team_decision(both, *data, 1) == Decision::Abstain);
  RuleSet neg;
  neg.negative = {Rule::make({1})};
  CHECK(team_decision(neg, *data, 1) == Decision::Zero);
  CHECK(team_decision(RuleSet{}, *data, 0) == Decision::Abstain);
}

TEST_CASE("closed form equals the decision process exactly") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(19);
    const auto ctx = random_context(rng, n, 1 + rng.below(4));
    const auto rs = random_rules(rng, ctx.dataset->cols());
    // Straight-line decision process.
    double ell = 0, contra = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bool pos = false, neg = false;
      for (const auto& r : rs.positive) pos |= covers(r, *ctx.dataset, i);
      for (const auto& r : rs.negative) neg |= covers(r, *ctx.dataset, i);
      const int h = ctx.human[i];
      const int yhat = pos ? 1 : neg ? 0 : h;
      if (yhat != ctx.labels[i]) ell += ctx.accept_weights[i];
      if ((pos || neg) && yhat != h) contra += 1;
    }
    const auto a = loss(ctx, rs);
    const auto b = closed_form_loss(ctx, rs);
    REQUIRE(a.decision_loss == ell);
    REQUIRE(b.decision_loss == ell);
    REQUIRE(a.reconciliation_loss == ctx.alpha * contra);
    REQUIRE(b.reconciliation_loss == ctx.alpha * contra);
    REQUIRE(a.total == a.decision_loss + a.reconciliation_loss);
    REQUIRE(b.total == a.total);
  }
}

TEST_CASE("per-instance losses sum to the total") {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ctx = random_context(rng, 2 + rng.below(40), 3);
    const auto rs = random_rules(rng, ctx.dataset->cols());
    double sum = 0;
    for (std::size_t i = 0; i < ctx.rows(); ++i) sum += per_instance_loss(ctx, rs, i);
    CHECK(sum == doctest::Approx(loss(ctx, rs).total).epsilon(1e-12));
  }
}

TEST_CASE("empty set, alpha and contradiction properties") {
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    auto ctx = random_context(rng, 2 + rng.below(30), 3);
    const auto empty = loss(ctx, RuleSet{});
    double human = 0;
    for (std::size_t i = 0; i < ctx.rows(); ++i) human += ctx.labels[i] != ctx.human[i] ? ctx.accept_weights[i] : 0.0;
    CHECK(empty.reconciliation_loss == 0.0);
    CHECK(empty.decision_loss == doctest::Approx(human));

    const auto rs = random_rules(rng, ctx.dataset->cols());
    const auto cov = set_coverage(rs, *ctx.dataset);
    const auto c = contradictions(ctx, cov);
    ctx.alpha = 0.0;
    CHECK(loss(ctx, rs).total == loss(ctx, rs).decision_loss);
    const double low = loss(ctx, rs).total;
    ctx.alpha = 0.5;
    const double high = loss(ctx, rs).total;
    if (c > 0) CHECK(high > low);
    // Contradictions do not depend on accept weights.
    for (auto& w : ctx.accept_weights) w = rng.uniform();
    CHECK(contradictions(ctx, cov) == c);
  }
}

TEST_CASE("context validation") {
  auto data = single_flag({1, 0}, {1, 0});
  CHECK_THROWS_AS(make_context(data, {0}, {1, 1}, 0.0), DataError);
  CHECK_THROWS_AS(make_context(data, {0, 1}, {1, 1.5}, 0.0), DataError);
  CHECK_THROWS_AS(make_context(data, {0, 1}, {1, 1}, 1.5), ConfigError);
  CHECK_THROWS_AS(make_context(data, {0, 2}, {1, 1}, 0.0), DataError);
}
