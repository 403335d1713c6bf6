#include <cmath>

#include "doctest.h"
#include "teamrules/humansim.hpp"

using namespace teamrules;

namespace {

RawDataset two_points(double a1, double a2, double b1, double b2) {
  RawDataset raw;
  raw.feature_names = {"x1", "x2"};
  raw.values = {a1, a2, b1, b2};
  raw.labels = {checkers_label(a1, a2), checkers_label(b1, b2)};
  return raw;
}

}  // namespace

TEST_CASE("checkers decision accuracy per region") {
  const auto raw = gen_checkers(4000, 21);
  const auto spec = checkers_behavior(AdbMode::Rational);
  const auto h = simulate_decisions(raw, spec, 5);
  std::size_t low = 0, low_agree = 0, high_agree = 0;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const bool agree = h[i] == raw.labels[i];
    if (raw.at(i, 0) > raw.at(i, 1)) {
      ++low;
      low_agree += agree;
    } else {
      high_agree += agree;
    }
  }
  CHECK(std::abs(static_cast<double>(low_agree) / static_cast<double>(low) - 0.8) < 0.02);
  CHECK(high_agree == raw.rows() - low);
  CHECK(simulate_decisions(raw, spec, 5) == h);
}

TEST_CASE("coin region agreement converges to one half") {
  RawDataset raw = gen_checkers(20000, 2);
  BehaviorSpec spec;
  spec.accuracy_regions.push_back({Condition::always(), 0.5, std::nullopt});
  const auto h = simulate_decisions(raw, spec, 8);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < raw.rows(); ++i) agree += h[i] == raw.labels[i];
  // 99% binomial interval at n = 20000 is about +-0.0091.
  CHECK(std::abs(static_cast<double>(agree) / 20000.0 - 0.5) < 0.0091);
}

TEST_CASE("uncovered row is an error") {
  BehaviorSpec spec;
  spec.accuracy_regions.push_back({Condition::compare("x1", CompareOp::GE, 1.0), 1.0, std::nullopt});
  CHECK_THROWS_AS(simulate_decisions(two_points(0.5, 0.5, 1.5, 1.5), spec, 1), Error);
}

TEST_CASE("adb modes on checkers") {
  const auto raw = two_points(1.5, 0.5, 0.5, 1.5);  // first row has x1 > x2
  CHECK(simulate_adb(raw, checkers_behavior(AdbMode::Rational)) == std::vector<Label>{1, 0});
  CHECK(simulate_adb(raw, checkers_behavior(AdbMode::Irrational)) == std::vector<Label>{0, 1});
  CHECK(simulate_adb(raw, checkers_behavior(AdbMode::Neutral)) == std::vector<Label>{1, 0});
  CHECK(simulate_adb(two_points(1.0, 1.9, 0.99, 0.1), checkers_behavior(AdbMode::Neutral)) ==
        std::vector<Label>{1, 0});

  const auto big = gen_checkers(1000, 4);
  const auto r = simulate_adb(big, checkers_behavior(AdbMode::Rational));
  const auto ir = simulate_adb(big, checkers_behavior(AdbMode::Irrational));
  for (std::size_t i = 0; i < big.rows(); ++i) CHECK(r[i] != ir[i]);
  CHECK(simulate_adb(big, checkers_behavior(AdbMode::Rational)) == r);
}

TEST_CASE("neutral mode needs a region") {
  BehaviorSpec spec = checkers_behavior(AdbMode::Neutral);
  spec.neutral_region.reset();
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("confidence equals region accuracy") {
  const auto raw = two_points(1.5, 0.5, 0.5, 1.5);
  const auto c = record_confidence(checkers_behavior(AdbMode::Rational), raw);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == doctest::Approx(0.8));
  CHECK(c[1] == doctest::Approx(1.0));
  const auto profile = simulate_human(raw, checkers_behavior(AdbMode::Rational), 3);
  CHECK(profile.size() == 2);
  CHECK(profile.accepts == std::vector<Label>{1, 0});
  REQUIRE(profile.confidence);
  CHECK(profile.confidence->size() == 2);
}

TEST_CASE("condition trees evaluate and round-trip through json") {
  const std::vector<std::string> names = {"a", "b", "c"};
  const auto cond = condition_from_json(nlohmann::json::parse(R"({"any": [
      {"all": [{"feature": "a", "op": ">=", "value": 1}, {"feature": "b", "op": "<", "value": 0}]},
      {"not": {"feature": "c", "op": "=", "value": 2}},
      {"sum": ["a", "b"], "op": ">", "value": 10}]})"));
  const auto f = compile(cond, names);
  const double r1[] = {1, -1, 2}, r2[] = {0, -1, 2}, r3[] = {0, 3, 5}, r4[] = {6, 5, 2};
  CHECK(f(r1));
  CHECK_FALSE(f(r2));
  CHECK(f(r3));
  CHECK(f(r4));
  const auto again = compile(condition_from_json(to_json(cond)), names);
  for (const auto* r : {r1, r2, r3, r4}) CHECK(again(std::span<const double>(r, 3)) == f(std::span<const double>(r, 3)));
  CHECK_THROWS(compile(Condition::compare("z", CompareOp::GE, 0.0), names));
  CHECK_THROWS_AS(condition_from_json(nlohmann::json::parse(R"({"feature": "a"})")), ConfigError);
}

TEST_CASE("surrogate bands: confident rows get the coin under the default bands") {
  const auto raw = gen_gaussian(3000, 12);
  const auto s = fit_surrogate_human(raw, 0.2, high_confidence_coin_bands(), 4);
  CHECK(s.fit_rows.size() == 600);
  CHECK(s.remaining_rows.size() == 2400);
  CHECK(s.decisions.size() == 2400);
  BehaviorSpec spec;
  spec.accuracy_regions = s.regions;
  const auto regions = assign_regions(raw, spec);
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const double conf = 2.0 * std::abs(s.scorer.probability(raw.row(i)) - 0.5);
    const double acc = s.regions[regions[i]].accuracy;
    if (conf > 0.5) {
      CHECK(acc == 0.5);
    } else {
      CHECK(acc == 1.0);
    }
  }
  // Rows in the exact band copy the label.
  for (std::size_t k = 0; k < s.remaining_rows.size(); ++k) {
    const auto i = s.remaining_rows[k];
    if (s.regions[regions[i]].accuracy == 1.0) CHECK(s.decisions[k] == raw.labels[i]);
  }
}

TEST_CASE("surrogate bands: gaps follow the model's own decision") {
  const auto raw = gen_gaussian(3000, 13);
  const std::vector<ConfidenceBand> adult = {{0.0, 0.4, 1.0}, {0.5, 0.8, 0.5}};
  const auto s = fit_surrogate_human(raw, 0.2, adult, 6);
  CHECK_FALSE(s.warnings.empty());
  BehaviorSpec spec;
  spec.accuracy_regions = s.regions;
  const auto regions = assign_regions(raw, spec);
  std::size_t exact = 0;
  for (std::size_t k = 0; k < s.remaining_rows.size(); ++k) {
    const auto i = s.remaining_rows[k];
    const double p = s.scorer.probability(raw.row(i));
    const double conf = 2.0 * std::abs(p - 0.5);
    if (conf < 0.4) {
      CHECK(s.decisions[k] == raw.labels[i]);
      ++exact;
    } else if (conf > 0.8 || (conf > 0.4 && conf < 0.5)) {
      CHECK(s.regions[regions[i]].follow_model.has_value());
      CHECK(s.decisions[k] == (p >= 0.5 ? 1 : 0));
    }
  }
  CHECK(exact > 0);
  CHECK_THROWS_AS(fit_surrogate_human(raw, 1.0, adult, 1), ConfigError);
}
