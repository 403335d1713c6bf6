#include "teamrules/humansim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace teamrules {

using nlohmann::json;

Condition Condition::compare(std::string feature, CompareOp op, double value) {
  Condition c;
  c.kind = Kind::Compare;
  c.feature = std::move(feature);
  c.op = op;
  c.value = value;
  return c;
}

Condition Condition::compare_features(std::string feature, CompareOp op, std::string other) {
  Condition c;
  c.kind = Kind::Compare;
  c.feature = std::move(feature);
  c.op = op;
  c.other_feature = std::move(other);
  return c;
}

Condition Condition::all(std::vector<Condition> children) {
  Condition c;
  c.kind = Kind::All;
  c.children = std::move(children);
  return c;
}

Condition Condition::any(std::vector<Condition> children) {
  Condition c;
  c.kind = Kind::Any;
  c.children = std::move(children);
  return c;
}

Condition Condition::negate(Condition child) {
  Condition c;
  c.kind = Kind::Not;
  c.children.push_back(std::move(child));
  return c;
}

Condition Condition::logit_band(LogitScorer scorer, double lo, double hi) {
  Condition c;
  c.kind = Kind::LogitBand;
  c.scorer = std::move(scorer);
  c.lo = lo;
  c.hi = hi;
  return c;
}

Condition Condition::feature_sum(std::vector<std::string> features, CompareOp op, double value) {
  Condition c;
  c.kind = Kind::Sum;
  c.sum_features = std::move(features);
  c.op = op;
  c.value = value;
  return c;
}

namespace {

bool apply_op(CompareOp op, double a, double b) {
  switch (op) {
    case CompareOp::GE: return a >= b;
    case CompareOp::GT: return a > b;
    case CompareOp::LT: return a < b;
    case CompareOp::LE: return a <= b;
    case CompareOp::EQ: return a == b;
  }
  return false;
}

const char* op_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::GE: return ">=";
    case CompareOp::GT: return ">";
    case CompareOp::LT: return "<";
    case CompareOp::LE: return "<=";
    case CompareOp::EQ: return "=";
  }
  return "?";
}

CompareOp op_from_symbol(const std::string& s) {
  if (s == ">=" || s == "≥") return CompareOp::GE;
  if (s == ">") return CompareOp::GT;
  if (s == "<") return CompareOp::LT;
  if (s == "<=" || s == "≤") return CompareOp::LE;
  if (s == "=" || s == "==") return CompareOp::EQ;
  throw ConfigError("unknown comparison operator '" + s + "'");
}

std::size_t resolve(const std::vector<std::string>& names, const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("condition references unknown feature '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

bool in_band(double s, double lo, double hi) { return (s > lo || (lo <= 0.0 && s >= 0.0)) && s <= hi; }

}  // namespace

RowPredicate compile(const Condition& condition, const std::vector<std::string>& feature_names) {
  switch (condition.kind) {
    case Condition::Kind::Compare: {
      const std::size_t f = resolve(feature_names, condition.feature);
      const CompareOp op = condition.op;
      if (condition.other_feature) {
        const std::size_t g = resolve(feature_names, *condition.other_feature);
        return [=](std::span<const double> r) { return apply_op(op, r[f], r[g]); };
      }
      if (!condition.value) throw ConfigError("comparison on '" + condition.feature + "' has no value");
      const double v = *condition.value;
      return [=](std::span<const double> r) { return apply_op(op, r[f], v); };
    }
    case Condition::Kind::All:
    case Condition::Kind::Any: {
      std::vector<RowPredicate> parts;
      for (const auto& c : condition.children) parts.push_back(compile(c, feature_names));
      if (condition.kind == Condition::Kind::All) {
        return [parts = std::move(parts)](std::span<const double> r) {
          return std::all_of(parts.begin(), parts.end(), [&](const RowPredicate& p) { return p(r); });
        };
      }
      return [parts = std::move(parts)](std::span<const double> r) {
        return std::any_of(parts.begin(), parts.end(), [&](const RowPredicate& p) { return p(r); });
      };
    }
    case Condition::Kind::Not: {
      if (condition.children.size() != 1) throw ConfigError("'not' takes exactly one condition");
      auto inner = compile(condition.children.front(), feature_names);
      return [inner = std::move(inner)](std::span<const double> r) { return !inner(r); };
    }
    case Condition::Kind::LogitBand: {
      if (condition.scorer.weights.size() != feature_names.size()) {
        throw ConfigError("logit_band weight count does not match the feature count");
      }
      return [scorer = condition.scorer, lo = condition.lo, hi = condition.hi](std::span<const double> r) {
        const double s = 2.0 * std::abs(scorer.probability(r) - 0.5);
        return in_band(s, lo, hi);
      };
    }
    case Condition::Kind::Sum: {
      std::vector<std::size_t> idx;
      for (const auto& name : condition.sum_features) idx.push_back(resolve(feature_names, name));
      if (idx.empty()) {
        idx.resize(feature_names.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
      }
      const CompareOp op = condition.op;
      const double v = condition.value.value_or(0.0);
      return [idx = std::move(idx), op, v](std::span<const double> r) {
        double total = 0.0;
        for (auto f : idx) total += r[f];
        return apply_op(op, total, v);
      };
    }
  }
  throw ConfigError("unknown condition kind");
}

json to_json(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::Compare: {
      json j = {{"feature", c.feature}, {"op", op_symbol(c.op)}};
      if (c.other_feature) {
        j["other_feature"] = *c.other_feature;
      } else {
        j["value"] = c.value.value_or(0.0);
      }
      return j;
    }
    case Condition::Kind::All:
    case Condition::Kind::Any: {
      json arr = json::array();
      for (const auto& child : c.children) arr.push_back(to_json(child));
      return json{{c.kind == Condition::Kind::All ? "all" : "any", arr}};
    }
    case Condition::Kind::Not:
      return json{{"not", to_json(c.children.at(0))}};
    case Condition::Kind::LogitBand:
      return json{{"logit_band",
                   {{"weights", c.scorer.weights}, {"bias", c.scorer.bias}, {"lo", c.lo}, {"hi", c.hi}}}};
    case Condition::Kind::Sum:
      return json{{"sum", c.sum_features}, {"op", op_symbol(c.op)}, {"value", c.value.value_or(0.0)}};
  }
  return json();
}

Condition condition_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("condition must be an object");
  if (j.contains("all") || j.contains("any")) {
    const bool all = j.contains("all");
    const json& arr = all ? j.at("all") : j.at("any");
    if (!arr.is_array()) throw ConfigError(std::string("'") + (all ? "all" : "any") + "' must be an array");
    std::vector<Condition> children;
    for (const auto& child : arr) children.push_back(condition_from_json(child));
    return all ? Condition::all(std::move(children)) : Condition::any(std::move(children));
  }
  if (j.contains("not")) return Condition::negate(condition_from_json(j.at("not")));
  if (j.contains("logit_band")) {
    const json& b = j.at("logit_band");
    LogitScorer scorer;
    scorer.weights = b.at("weights").get<std::vector<double>>();
    scorer.bias = b.at("bias").get<double>();
    return Condition::logit_band(std::move(scorer), b.at("lo").get<double>(), b.at("hi").get<double>());
  }
  if (j.contains("sum")) {
    if (!j.contains("op") || !j.contains("value")) throw ConfigError("'sum' condition needs op and value");
    return Condition::feature_sum(j.at("sum").get<std::vector<std::string>>(), op_from_symbol(j.at("op").get<std::string>()),
                                  j.at("value").get<double>());
  }
  if (!j.contains("feature") || !j.contains("op")) {
    throw ConfigError("condition needs {feature, op, value|other_feature} or all/any/not/logit_band/sum");
  }
  const auto op = op_from_symbol(j.at("op").get<std::string>());
  if (j.contains("other_feature")) {
    return Condition::compare_features(j.at("feature").get<std::string>(), op,
                                       j.at("other_feature").get<std::string>());
  }
  if (!j.contains("value")) throw ConfigError("comparison needs 'value' or 'other_feature'");
  return Condition::compare(j.at("feature").get<std::string>(), op, j.at("value").get<double>());
}

std::string to_string(AdbMode mode) {
  switch (mode) {
    case AdbMode::Rational: return "RATIONAL";
    case AdbMode::Neutral: return "NEUTRAL";
    case AdbMode::Irrational: return "IRRATIONAL";
  }
  return "?";
}

AdbMode adb_mode_from_string(const std::string& s) {
  if (s == "RATIONAL") return AdbMode::Rational;
  if (s == "NEUTRAL") return AdbMode::Neutral;
  if (s == "IRRATIONAL") return AdbMode::Irrational;
  throw ConfigError("unknown adb_mode '" + s + "' (expected RATIONAL, NEUTRAL or IRRATIONAL)");
}

void BehaviorSpec::validate() const {
  if (accuracy_regions.empty()) throw ConfigError("behavior needs at least one accuracy region");
  for (const auto& r : accuracy_regions) {
    if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0)) throw ConfigError("region accuracy must be in [0, 1]");
  }
  if (adb_mode == AdbMode::Neutral && !neutral_region) {
    throw ConfigError("NEUTRAL adb_mode requires neutral_region");
  }
}

json to_json(const BehaviorSpec& spec) {
  json regions = json::array();
  for (const auto& r : spec.accuracy_regions) {
    json e = {{"when", to_json(r.region)}, {"accuracy", r.accuracy}};
    if (r.follow_model) {
      e["follow_model"] = {{"weights", r.follow_model->weights}, {"bias", r.follow_model->bias}};
    }
    regions.push_back(std::move(e));
  }
  json j = {{"accuracy_regions", regions}, {"adb_mode", to_string(spec.adb_mode)}};
  if (spec.neutral_region) j["neutral_region"] = to_json(*spec.neutral_region);
  return j;
}

BehaviorSpec behavior_from_json(const json& j) {
  BehaviorSpec spec;
  for (const auto& e : j.at("accuracy_regions")) {
    AccuracyRegion r;
    r.region = condition_from_json(e.at("when"));
    r.accuracy = e.at("accuracy").get<double>();
    if (e.contains("follow_model")) {
      LogitScorer s;
      s.weights = e.at("follow_model").at("weights").get<std::vector<double>>();
      s.bias = e.at("follow_model").at("bias").get<double>();
      r.follow_model = std::move(s);
    }
    spec.accuracy_regions.push_back(std::move(r));
  }
  if (j.contains("adb_mode")) spec.adb_mode = adb_mode_from_string(j.at("adb_mode").get<std::string>());
  if (j.contains("neutral_region")) spec.neutral_region = condition_from_json(j.at("neutral_region"));
  spec.validate();
  return spec;
}

HumanProfile HumanProfile::subset(std::span<const std::size_t> indices) const {
  HumanProfile out;
  out.seed = seed;
  for (auto i : indices) {
    out.decisions.push_back(decisions[i]);
    out.accepts.push_back(accepts[i]);
  }
  if (confidence) {
    std::vector<double> c;
    for (auto i : indices) c.push_back((*confidence)[i]);
    out.confidence = std::move(c);
  }
  return out;
}

std::vector<std::size_t> assign_regions(const RawDataset& raw, const BehaviorSpec& spec) {
  spec.validate();
  std::vector<RowPredicate> regions;
  for (const auto& r : spec.accuracy_regions) regions.push_back(compile(r.region, raw.feature_names));
  std::vector<std::size_t> out(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    auto row = raw.row(i);
    std::size_t found = regions.size();
    for (std::size_t k = 0; k < regions.size(); ++k) {
      if (!regions[k](row)) continue;
      if (found != regions.size()) {
        throw DataError("row " + std::to_string(i) + " matches accuracy regions " + std::to_string(found) +
                        " and " + std::to_string(k) + "; regions must partition the data");
      }
      found = k;
    }
    if (found == regions.size()) throw DataError("row " + std::to_string(i) + " matches no accuracy region");
    out[i] = found;
  }
  return out;
}

std::vector<Label> simulate_decisions(const RawDataset& raw, const BehaviorSpec& spec, std::uint64_t seed) {
  const auto region_of = assign_regions(raw, spec);
  Rng rng(seed);
  std::vector<Label> h(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const double u = rng.uniform();
    const auto& region = spec.accuracy_regions[region_of[i]];
    if (region.follow_model) {
      h[i] = region.follow_model->probability(raw.row(i)) >= 0.5 ? 1 : 0;
    } else {
      h[i] = u < region.accuracy ? raw.labels[i] : static_cast<Label>(1 - raw.labels[i]);
    }
  }
  return h;
}

namespace {

// Regions that RATIONAL accepts in: minimum accuracy among the regions
// with Bernoulli behavior (follow-the-model regions are excluded unless
// nothing else exists).
std::vector<bool> lowest_accuracy_regions(const BehaviorSpec& spec) {
  double lowest = std::numeric_limits<double>::infinity();
  bool any_bernoulli = false;
  for (const auto& r : spec.accuracy_regions) any_bernoulli |= !r.follow_model;
  for (const auto& r : spec.accuracy_regions) {
    if (any_bernoulli && r.follow_model) continue;
    lowest = std::min(lowest, r.accuracy);
  }
  std::vector<bool> out;
  for (const auto& r : spec.accuracy_regions) {
    out.push_back(!(any_bernoulli && r.follow_model) && r.accuracy == lowest);
  }
  return out;
}

}  // namespace

RowPredicate accept_function(const BehaviorSpec& spec, const std::vector<std::string>& feature_names) {
  spec.validate();
  if (spec.adb_mode == AdbMode::Neutral) return compile(*spec.neutral_region, feature_names);
  std::vector<RowPredicate> low;
  const auto is_low = lowest_accuracy_regions(spec);
  for (std::size_t k = 0; k < spec.accuracy_regions.size(); ++k) {
    if (is_low[k]) low.push_back(compile(spec.accuracy_regions[k].region, feature_names));
  }
  const bool rational = spec.adb_mode == AdbMode::Rational;
  return [low = std::move(low), rational](std::span<const double> r) {
    const bool in_low = std::any_of(low.begin(), low.end(), [&](const RowPredicate& p) { return p(r); });
    return rational ? in_low : !in_low;
  };
}

std::vector<Label> simulate_adb(const RawDataset& raw, const BehaviorSpec& spec) {
  const auto accepts = accept_function(spec, raw.feature_names);
  std::vector<Label> a(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) a[i] = accepts(raw.row(i)) ? 1 : 0;
  return a;
}

std::vector<double> record_confidence(const BehaviorSpec& spec, const RawDataset& raw) {
  const auto region_of = assign_regions(raw, spec);
  std::vector<double> c(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) c[i] = spec.accuracy_regions[region_of[i]].accuracy;
  return c;
}

HumanProfile simulate_human(const RawDataset& raw, const BehaviorSpec& spec, std::uint64_t seed) {
  HumanProfile p;
  p.seed = seed;
  p.decisions = simulate_decisions(raw, spec, seed);
  p.accepts = simulate_adb(raw, spec);
  p.confidence = record_confidence(spec, raw);
  return p;
}

std::vector<ConfidenceBand> high_confidence_coin_bands() {
  return {{0.0, 0.5, 1.0}, {0.5, 1.0, 0.5}};
}

SurrogateHuman fit_surrogate_human(const RawDataset& raw, double holdout_fraction,
                                   const std::vector<ConfidenceBand>& bands, std::uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("surrogate holdout_fraction must be in (0, 1)");
  }
  if (raw.rows() < 2) throw DataError("surrogate human needs at least 2 rows");

  SurrogateHuman out;
  const auto parts = split(raw.rows(), SplitSpec{holdout_fraction, seed});
  out.fit_rows = parts.train;
  out.remaining_rows = parts.test;

  std::vector<Label> fit_targets;
  for (auto i : out.fit_rows) fit_targets.push_back(raw.labels[i]);
  const auto model = LinearLogistic::fit(raw, out.fit_rows, fit_targets);
  if (!model.converged()) out.warnings.push_back("surrogate logistic fit did not converge; using best iterate");
  out.scorer = model.scorer();

  // Sort the bands and fill any gap in [0, 1] with follow-the-model bands.
  auto sorted = bands;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  std::vector<ConfidenceBand> full;
  double cursor = 0.0;
  for (const auto& b : sorted) {
    if (!(b.lo >= 0.0 && b.hi <= 1.0 && b.lo < b.hi)) throw ConfigError("confidence bands must satisfy 0 <= lo < hi <= 1");
    if (b.lo < cursor) throw ConfigError("confidence bands overlap");
    if (b.lo > cursor) {
      full.push_back({cursor, b.lo, std::nullopt});
      out.warnings.push_back("confidence gap (" + std::to_string(cursor) + ", " + std::to_string(b.lo) +
                             "] follows the surrogate's own decision");
    }
    full.push_back(b);
    cursor = b.hi;
  }
  if (cursor < 1.0) {
    full.push_back({cursor, 1.0, std::nullopt});
    out.warnings.push_back("confidence gap (" + std::to_string(cursor) + ", 1] follows the surrogate's own decision");
  }

  for (const auto& b : full) {
    AccuracyRegion region;
    region.region = Condition::logit_band(out.scorer, b.lo, b.hi);
    if (b.accuracy) {
      region.accuracy = *b.accuracy;
    } else {
      // Informational accuracy of the followed model, measured on the fitting rows.
      std::size_t hits = 0, total = 0;
      for (auto i : out.fit_rows) {
        const double p = out.scorer.probability(raw.row(i));
        if (!in_band(2.0 * std::abs(p - 0.5), b.lo, b.hi)) continue;
        ++total;
        hits += static_cast<std::size_t>((p >= 0.5 ? 1 : 0) == raw.labels[i]);
      }
      region.accuracy = total ? static_cast<double>(hits) / static_cast<double>(total) : 1.0;
      region.follow_model = out.scorer;
    }
    out.regions.push_back(std::move(region));
  }

  BehaviorSpec spec;
  spec.accuracy_regions = out.regions;
  const RawDataset remaining = raw.subset(out.remaining_rows);
  out.decisions = simulate_decisions(remaining, spec, mix_seed(seed, 1));
  return out;
}

BehaviorSpec checkers_behavior(AdbMode mode) {
  BehaviorSpec spec;
  spec.accuracy_regions.push_back({Condition::compare_features("x1", CompareOp::GT, "x2"), 0.8, std::nullopt});
  spec.accuracy_regions.push_back({Condition::compare_features("x1", CompareOp::LE, "x2"), 1.0, std::nullopt});
  spec.adb_mode = mode;
  spec.neutral_region = Condition::compare("x1", CompareOp::GE, 1.0);
  return spec;
}

}  // namespace teamrules
