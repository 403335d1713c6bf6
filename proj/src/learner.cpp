#include "teamrules/learner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace teamrules {

using nlohmann::json;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::TeamRules: return "TEAMRULES";
    case Mode::HyrsAdapted: return "HYRS_ADAPTED";
    case Mode::BrsLike: return "BRS_LIKE";
    case Mode::FullCoverageTr: return "FULL_COVERAGE_TR";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  std::string u;
  for (char c : s) u += (c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "TEAMRULES" || u == "TR") return Mode::TeamRules;
  if (u == "HYRS_ADAPTED" || u == "HYRS") return Mode::HyrsAdapted;
  if (u == "BRS_LIKE" || u == "BRS") return Mode::BrsLike;
  if (u == "FULL_COVERAGE_TR" || u == "FC_TR") return Mode::FullCoverageTr;
  throw ConfigError("unknown mode '" + s + "'");
}

bool full_coverage(Mode mode) { return mode == Mode::BrsLike || mode == Mode::FullCoverageTr; }

void SearchConfig::validate() const {
  if (iterations < 1) throw ConfigError("search.iterations must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("search.alpha must be in [0, 1]");
  if (!(temperature_base > 0.0 && temperature_base <= 1.0)) throw ConfigError("search.temperature_base must be in (0, 1]");
  if (!(min_support > 0.0 && min_support < 1.0)) throw ConfigError("search.min_support must be in (0, 1)");
  if (max_rule_length < 1) throw ConfigError("search.max_rule_length must be >= 1");
  if (max_candidates < 1) throw ConfigError("search.max_candidates must be >= 1");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw ConfigError("search.top_fraction must be in (0, 1]");
  if (!(gate_threshold >= 0.0 && gate_threshold <= 1.0)) throw ConfigError("search.gate_threshold must be in [0, 1]");
}

json to_json(const SearchConfig& cfg) {
  return json{{"iterations", cfg.iterations},
              {"alpha", cfg.alpha},
              {"temperature_base", cfg.temperature_base},
              {"min_support", cfg.min_support},
              {"max_rule_length", cfg.max_rule_length},
              {"max_candidates", cfg.max_candidates},
              {"top_fraction", cfg.top_fraction},
              {"gate_threshold", cfg.gate_threshold},
              {"seed", cfg.seed},
              {"mode", to_string(cfg.mode)}};
}

SearchConfig search_config_from_json(const json& j, SearchConfig cfg) {
  if (!j.is_object()) throw ConfigError("search must be an object");
  auto read = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const json::exception&) {
      throw ConfigError(std::string("search.") + key + " has the wrong type");
    }
  };
  read("iterations", cfg.iterations);
  read("alpha", cfg.alpha);
  read("temperature_base", cfg.temperature_base);
  read("min_support", cfg.min_support);
  read("max_rule_length", cfg.max_rule_length);
  read("max_candidates", cfg.max_candidates);
  read("top_fraction", cfg.top_fraction);
  read("gate_threshold", cfg.gate_threshold);
  read("seed", cfg.seed);
  if (j.contains("mode")) cfg.mode = mode_from_string(j.at("mode").get<std::string>());
  for (const auto& [key, _] : j.items()) {
    static const std::array<const char*, 10> known = {"iterations", "alpha", "temperature_base", "min_support",
                                                      "max_rule_length", "max_candidates", "top_fraction",
                                                      "gate_threshold", "seed", "mode"};
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw ConfigError("search." + key + " is not a known field");
    }
  }
  cfg.validate();
  return cfg;
}

json to_json(const FitResult& r, const BinarizedDataset& data) {
  return json{{"mode", to_string(r.mode)},
              {"default_class", r.default_class},
              {"rules", to_json(r.rule_set, data)},
              {"rules_text", to_text(r.rule_set, data)},
              {"best_training_loss", to_json(r.best_training_loss)},
              {"loss_trace", r.loss_trace},
              {"accepted_moves", r.accepted_moves},
              {"iterations_run", r.iterations_run}};
}

Label majority_class(const std::vector<Label>& labels) {
  const auto ones = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label{1}));
  return 2 * ones >= labels.size() ? 1 : 0;
}

namespace {

constexpr int kOne = 0;
constexpr int kZero = 1;
constexpr int kAbstain = 2;

// Per-row cost of each team state under a mode: weighted decision error
// plus a 0/1 reconciliation indicator charged at `penalty`.
struct CostTable {
  std::vector<std::array<double, 3>> error;
  std::vector<std::array<std::uint8_t, 3>> contra;
  double penalty = 0.0;

  double phi(std::size_t i, int s) const { return error[i][s] + (contra[i][s] ? penalty : 0.0); }
};

CostTable make_costs(const TeamContext& ctx, Mode mode, Label default_class) {
  const std::size_t n = ctx.rows();
  CostTable t;
  t.error.resize(n);
  t.contra.resize(n);
  t.penalty = mode == Mode::BrsLike ? 0.0 : ctx.alpha;
  for (std::size_t i = 0; i < n; ++i) {
    const Label y = ctx.labels[i];
    const Label h = ctx.human[i];
    const double p = mode == Mode::HyrsAdapted || mode == Mode::BrsLike ? 1.0 : ctx.accept_weights[i];
    auto& e = t.error[i];
    auto& c = t.contra[i];
    e[kOne] = y != 1 ? p : 0.0;
    e[kZero] = y != 0 ? p : 0.0;
    switch (mode) {
      case Mode::TeamRules:
        e[kAbstain] = y != h ? p : 0.0;
        c = {static_cast<std::uint8_t>(h != 1), static_cast<std::uint8_t>(h != 0), 0};
        break;
      case Mode::HyrsAdapted:
        e[kAbstain] = y != h ? 1.0 : 0.0;
        c = {1, 1, 0};
        break;
      case Mode::BrsLike:
        e[kAbstain] = y != default_class ? 1.0 : 0.0;
        c = {0, 0, 0};
        break;
      case Mode::FullCoverageTr: {
        c = {static_cast<std::uint8_t>(h != 1), static_cast<std::uint8_t>(h != 0), 0};
        const int d = default_class == 1 ? kOne : kZero;
        e[kAbstain] = e[d];
        c[kAbstain] = c[d];
        break;
      }
    }
  }
  return t;
}

struct Move {
  enum class Kind { None, Add, Cut } kind = Kind::None;
  Polarity polarity = Polarity::Positive;
  std::size_t index = 0;  // pool index
};

class Engine {
 public:
  Engine(const TeamContext& ctx, const CandidatePool& pool, CostTable costs)
      : ctx_(ctx), pool_(pool), costs_(std::move(costs)), counter_(ctx.rows()) {
    in_pos_.assign(pool.positive.size(), 0);
    in_neg_.assign(pool.negative.size(), 0);
  }

  int state(std::size_t i) const {
    if (counter_.positive(i)) return kOne;
    if (counter_.negative(i)) return kZero;
    return kAbstain;
  }

  LossBreakdown breakdown() const {
    double ell = 0.0;
    std::size_t contra = 0;
    for (std::size_t i = 0; i < ctx_.rows(); ++i) {
      const int s = state(i);
      ell += costs_.error[i][s];
      contra += costs_.contra[i][s];
    }
    LossBreakdown b;
    b.decision_loss = ell;
    b.reconciliation_loss = costs_.penalty * static_cast<double>(contra);
    b.total = b.decision_loss + b.reconciliation_loss;
    return b;
  }

  bool member(Polarity p, std::size_t idx) const {
    return (p == Polarity::Positive ? in_pos_ : in_neg_)[idx] != 0;
  }

  void apply(const Move& m) {
    if (m.kind == Move::Kind::None) return;
    auto& flags = m.polarity == Polarity::Positive ? in_pos_ : in_neg_;
    auto& list = m.polarity == Polarity::Positive ? pos_ : neg_;
    const Bitset& cov = pool_.coverage(m.polarity)[m.index];
    if (m.kind == Move::Kind::Add) {
      flags[m.index] = 1;
      list.push_back(m.index);
      counter_.add(m.polarity, cov);
    } else {
      flags[m.index] = 0;
      list.erase(std::find(list.begin(), list.end(), m.index));
      counter_.remove(m.polarity, cov);
    }
  }

  void undo(const Move& m, std::size_t cut_position) {
    if (m.kind == Move::Kind::None) return;
    auto& flags = m.polarity == Polarity::Positive ? in_pos_ : in_neg_;
    auto& list = m.polarity == Polarity::Positive ? pos_ : neg_;
    const Bitset& cov = pool_.coverage(m.polarity)[m.index];
    if (m.kind == Move::Kind::Add) {
      flags[m.index] = 0;
      list.pop_back();
      counter_.remove(m.polarity, cov);
    } else {
      flags[m.index] = 1;
      list.insert(list.begin() + static_cast<std::ptrdiff_t>(cut_position), m.index);
      counter_.add(m.polarity, cov);
    }
  }

  std::size_t position(const Move& m) const {
    const auto& list = m.polarity == Polarity::Positive ? pos_ : neg_;
    return static_cast<std::size_t>(std::find(list.begin(), list.end(), m.index) - list.begin());
  }

  std::optional<std::size_t> choose_add(Polarity p, std::size_t row, double q, Rng& rng) const {
    const auto& cov = pool_.coverage(p);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t c = 0; c < cov.size(); ++c) {
      if (member(p, c) || !cov[c].test(row)) continue;
      double delta = 0.0;
      cov[c].for_each([&](std::size_t i) {
        const int old = state(i);
        const int now = p == Polarity::Positive ? kOne : (old == kOne ? kOne : kZero);
        if (now != old) delta += costs_.phi(i, now) - costs_.phi(i, old);
      });
      scored.emplace_back(delta, c);
    }
    if (scored.empty()) return std::nullopt;
    std::sort(scored.begin(), scored.end());
    const double k = static_cast<double>(scored.size());
    const auto top = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(q * k - 1e-9)), 1, scored.size());
    return scored[rng.below(top)].second;
  }

  std::optional<std::size_t> choose_cut(Polarity p, std::size_t row, Rng& rng) const {
    const auto& list = p == Polarity::Positive ? pos_ : neg_;
    std::vector<std::size_t> covering;
    for (auto idx : list) {
      if (pool_.coverage(p)[idx].test(row)) covering.push_back(idx);
    }
    if (covering.empty()) return std::nullopt;
    return covering[rng.below(covering.size())];
  }

  RuleSet snapshot() const {
    RuleSet rs;
    for (auto idx : pos_) rs.positive.push_back(pool_.positive[idx]);
    for (auto idx : neg_) rs.negative.push_back(pool_.negative[idx]);
    return rs;
  }

  const CostTable& costs() const { return costs_; }

  void load(const RuleSet& rs) {
    auto find = [&](Polarity p, const Rule& r) -> std::optional<std::size_t> {
      const auto& rules = pool_.rules(p);
      for (std::size_t c = 0; c < rules.size(); ++c) {
        if (rules[c] == r) return c;
      }
      return std::nullopt;
    };
    for (Polarity p : {Polarity::Positive, Polarity::Negative}) {
      for (const auto& r : p == Polarity::Positive ? rs.positive : rs.negative) {
        const auto c = find(p, r);
        if (!c) throw Error("rule set contains a rule that is not in the candidate pool");
        if (!member(p, *c)) apply({Move::Kind::Add, p, *c});
      }
    }
  }

 private:
  const TeamContext& ctx_;
  const CandidatePool& pool_;
  CostTable costs_;
  CoverageCounter counter_;
  std::vector<char> in_pos_;
  std::vector<char> in_neg_;
  std::vector<std::size_t> pos_;
  std::vector<std::size_t> neg_;
};

FitResult anneal(const TeamContext& ctx, const CandidatePool& pool, const SearchConfig& cfg) {
  cfg.validate();
  ctx.validate();
  if (pool.empty()) throw ConfigError("candidate pool is empty");
  if (ctx.dataset->rows() != ctx.rows()) throw DataError("context and dataset row counts differ");
  for (const auto& cov : pool.positive_coverage) {
    if (cov.size() != ctx.rows()) throw DataError("candidate coverage does not match the training rows");
  }
  for (const auto& cov : pool.negative_coverage) {
    if (cov.size() != ctx.rows()) throw DataError("candidate coverage does not match the training rows");
  }

  FitResult out;
  out.mode = cfg.mode;
  out.default_class = majority_class(ctx.labels);

  Engine engine(ctx, pool, make_costs(ctx, cfg.mode, out.default_class));
  Rng rng(cfg.seed);
  const std::size_t n = ctx.rows();

  LossBreakdown current = engine.breakdown();
  LossBreakdown best = current;
  RuleSet best_set;
  std::vector<double> phi(n);

  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] = engine.costs().phi(i, engine.state(i));
      total += phi[i];
    }
    if (!(total > 0.0)) break;
    ++out.iterations_run;

    const double target = rng.uniform() * total;
    std::size_t eps = n;
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (phi[i] <= 0.0) continue;
      cum += phi[i];
      eps = i;
      if (cum > target) break;
    }

    Move move;
    const int s = engine.state(eps);
    const Label y = ctx.labels[eps];
    std::optional<std::size_t> pick;
    if (s != kAbstain) {
      if (y == 0) {
        pick = engine.choose_cut(Polarity::Positive, eps, rng);
        if (pick) move = {Move::Kind::Cut, Polarity::Positive, *pick};
      } else if (rng.coin()) {
        pick = engine.choose_add(Polarity::Positive, eps, cfg.top_fraction, rng);
        if (pick) move = {Move::Kind::Add, Polarity::Positive, *pick};
      } else {
        pick = engine.choose_cut(Polarity::Negative, eps, rng);
        if (pick) move = {Move::Kind::Cut, Polarity::Negative, *pick};
      }
    } else {
      const Polarity p = y == 1 ? Polarity::Positive : Polarity::Negative;
      pick = engine.choose_add(p, eps, cfg.top_fraction, rng);
      if (pick) move = {Move::Kind::Add, p, *pick};
    }

    if (move.kind != Move::Kind::None) {
      const std::size_t cut_position = move.kind == Move::Kind::Cut ? engine.position(move) : 0;
      engine.apply(move);
      const LossBreakdown proposed = engine.breakdown();
      bool keep = true;
      if (proposed.total > current.total) {
        const double temperature = std::pow(cfg.temperature_base, static_cast<double>(t) / static_cast<double>(cfg.iterations));
        keep = rng.uniform() < std::exp((current.total - proposed.total) / temperature);
      }
      if (keep) {
        current = proposed;
        ++out.accepted_moves;
        if (current.total < best.total) {
          best = current;
          best_set = engine.snapshot();
        }
      } else {
        engine.undo(move, cut_position);
      }
    }
    out.loss_trace.push_back(best.total);
  }

  out.rule_set = std::move(best_set);
  out.best_training_loss = best;
  return out;
}

}  // namespace

FitResult fit(const TeamContext& ctx, const CandidatePool& pool, const SearchConfig& cfg) { return anneal(ctx, pool, cfg); }

FitResult fit_baseline(const TeamContext& ctx, const CandidatePool& pool, const SearchConfig& cfg) {
  if (cfg.mode == Mode::TeamRules) throw ConfigError("fit_baseline needs a baseline mode");
  return anneal(ctx, pool, cfg);
}

std::optional<std::size_t> select_rule_to_add(const CandidatePool& pool, Polarity polarity, std::size_t row,
                                              const TeamContext& ctx, const RuleSet& rs, double q, Rng& rng) {
  ctx.validate();
  if (row >= ctx.rows()) throw Error("row " + std::to_string(row) + " out of range");
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("top_fraction must be in (0, 1]");
  Engine engine(ctx, pool, make_costs(ctx, Mode::TeamRules, majority_class(ctx.labels)));
  engine.load(rs);
  return engine.choose_add(polarity, row, q, rng);
}

std::optional<Label> Advisor::advise(Decision decision, double accept_probability) const {
  if (decision == Decision::Abstain) {
    if (full_coverage(mode)) return default_class;
    return std::nullopt;
  }
  const Label label = decision == Decision::One ? 1 : 0;
  if (mode == Mode::TeamRules && accept_probability < gate_threshold) return std::nullopt;
  return label;
}

std::optional<Label> Advisor::advise(const BinarizedDataset& data, std::size_t row, double accept_probability) const {
  return advise(team_decision(rules, data, row), accept_probability);
}

Advisor make_advisor(const FitResult& fit, double gate_threshold) {
  return Advisor{fit.rule_set, fit.mode, fit.default_class, gate_threshold};
}

std::optional<Label> advise(const Advisor& advisor, const DiscretionModel& disc, const BinarizedDataset& data,
                            std::size_t row) {
  const Decision d = team_decision(advisor.rules, data, row);
  if (d == Decision::Abstain || advisor.mode != Mode::TeamRules) return advisor.advise(d, 1.0);
  return advisor.advise(d, disc.predict(data.source->row(row)));
}

}  // namespace teamrules
