#include <cmath>

#include "doctest.h"
#include "teamrules/discretion.hpp"

using namespace teamrules;

namespace {

// Accept iff 2*x1 - x2 > 0.5 on a uniform square.
std::pair<RawDataset, std::vector<Label>> separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  RawDataset raw;
  raw.feature_names = {"x1", "x2"};
  std::vector<Label> a;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.uniform(), x2 = rng.uniform();
    raw.values.push_back(x1);
    raw.values.push_back(x2);
    raw.labels.push_back(0);
    a.push_back(2 * x1 - x2 > 0.5 ? 1 : 0);
  }
  return {raw, a};
}

}  // namespace

TEST_CASE("oracle reproduces the accept vector and the behavior out of sample") {
  const auto raw = gen_checkers(500, 1);
  const auto spec = checkers_behavior(AdbMode::Neutral);
  const auto profile = simulate_human(raw, spec, 2);
  const auto model = oracle(profile, spec, raw);
  CHECK(model.kind() == DiscretionKind::Oracle);
  CHECK(model.holdout_accuracy() == 1.0);
  const auto p = model.predict_all(raw);
  for (std::size_t i = 0; i < raw.rows(); ++i) CHECK(p[i] == static_cast<double>(profile.accepts[i]));
  const auto unseen = gen_checkers(300, 99);
  const auto truth = simulate_adb(unseen, spec);
  const auto q = model.predict_all(unseen);
  for (std::size_t i = 0; i < unseen.rows(); ++i) CHECK(q[i] == static_cast<double>(truth[i]));
}

TEST_CASE("learned model on separable accepts") {
  auto [raw, a] = separable(600, 3);
  const auto full = fit_discretion(raw, a, raw.rows(), 1);
  CHECK(full.holdout_accuracy() >= 0.95);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < raw.rows(); ++i) agree += (full.predict(raw.row(i)) >= 0.5) == (a[i] == 1);
  CHECK(static_cast<double>(agree) / 600.0 >= 0.95);

  const auto half = fit_discretion(raw, a, 300, 1);
  CHECK(half.training_size() == 300);
  CHECK(half.holdout_accuracy() >= 0.9);
  const auto again = fit_discretion(raw, a, 300, 1);
  CHECK(again.holdout_accuracy() == half.holdout_accuracy());
  for (std::size_t i = 0; i < 50; ++i) CHECK(again.predict(raw.row(i)) == half.predict(raw.row(i)));

  const auto logistic = fit_discretion(raw, a, 600, 1, ClassifierKind::LinearLogistic);
  CHECK(logistic.holdout_accuracy() >= 0.95);
}

TEST_CASE("single-row subset falls back to a constant predictor") {
  auto [raw, a] = separable(400, 5);
  double prior = 0;
  for (auto v : a) prior += v;
  prior /= 400.0;
  const auto m = fit_discretion(raw, a, 1, 7);
  CHECK_FALSE(m.warnings().empty());
  const double p0 = m.predict(raw.row(0));
  for (std::size_t i = 1; i < raw.rows(); ++i) CHECK(m.predict(raw.row(i)) == p0);
  const double acc = m.holdout_accuracy();
  CHECK((std::abs(acc - prior) < 0.01 || std::abs(acc - (1 - prior)) < 0.01));
  CHECK_THROWS_AS(fit_discretion(raw, a, 0, 1), ConfigError);
  CHECK_THROWS_AS(fit_discretion(raw, a, 401, 1), ConfigError);
}

TEST_CASE("holdout accuracy rises with subset size on checkers neutral accepts") {
  const std::size_t sizes[] = {32, 128, 512, 2048};
  double mean[4] = {0, 0, 0, 0};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto raw = gen_checkers(4000, 100 + seed);
    const auto a = simulate_adb(raw, checkers_behavior(AdbMode::Neutral));
    for (int k = 0; k < 4; ++k) mean[k] += fit_discretion(raw, a, sizes[k], seed).holdout_accuracy() / 5.0;
  }
  for (int k = 1; k < 4; ++k) CHECK(mean[k] >= mean[k - 1]);
  CHECK(mean[3] > 0.97);
}

TEST_CASE("predictions stay in [0, 1] and arity is enforced") {
  auto [raw, a] = separable(200, 8);
  const auto learned = fit_discretion(raw, a, 100, 2);
  const auto coin = coin_discretion(2, 4);
  Rng rng(1);
  std::size_t coin_ones = 0;
  for (int k = 0; k < 2000; ++k) {
    const double row[] = {rng.normal() * 10, rng.normal() * 10};
    const double p = learned.predict(row);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    const double c = coin.predict(row);
    CHECK((c == 0.0 || c == 1.0));
    CHECK(coin.predict(row) == c);
    coin_ones += c == 1.0;
  }
  CHECK(std::abs(static_cast<double>(coin_ones) / 2000.0 - 0.5) < 0.05);
  const double wide[] = {1, 2, 3};
  CHECK_THROWS_AS(learned.predict(wide), DataError);
}
