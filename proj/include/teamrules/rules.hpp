#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "teamrules/common.hpp"
#include "teamrules/dataspace.hpp"

namespace teamrules {

enum class Polarity { Positive, Negative };

/// Conjunction of predicate columns of a BinarizedDataset.
struct Rule {
  std::vector<std::uint32_t> items;  // sorted, unique, non-empty
  std::size_t support_pos = 0;
  std::size_t support_neg = 0;

  /// Throws Error when items is empty; sorts and dedups.
  static Rule make(std::vector<std::uint32_t> items, std::size_t support_pos = 0, std::size_t support_neg = 0);

  friend bool operator==(const Rule& a, const Rule& b) { return a.items == b.items; }
};

/// R+ recommends 1, R- recommends 0; R+ wins where both cover.
struct RuleSet {
  std::vector<Rule> positive;
  std::vector<Rule> negative;

  bool empty() const { return positive.empty() && negative.empty(); }
  std::size_t size() const { return positive.size() + negative.size(); }
};

/// True iff every item column holds at `row`. Throws Error for item
/// indices outside the dataset.
bool covers(const Rule& rule, const BinarizedDataset& data, std::size_t row);

/// Rows covered by a rule.
Bitset rule_coverage(const Rule& rule, const BinarizedDataset& data);

struct SetCoverage {
  Bitset positive;
  Bitset negative;
};

/// Union of member coverage per polarity.
SetCoverage set_coverage(const RuleSet& rules, const BinarizedDataset& data);

/// Per-row counts of covering rules, updated in place as rules are added
/// to or cut from a rule set.
class CoverageCounter {
 public:
  explicit CoverageCounter(std::size_t rows) : pos_(rows, 0), neg_(rows, 0) {}

  void add(Polarity p, const Bitset& coverage);
  void remove(Polarity p, const Bitset& coverage);

  bool positive(std::size_t row) const { return pos_[row] > 0; }
  bool negative(std::size_t row) const { return neg_[row] > 0; }
  std::uint32_t count(Polarity p, std::size_t row) const { return p == Polarity::Positive ? pos_[row] : neg_[row]; }
  std::size_t rows() const { return pos_.size(); }
  SetCoverage bitsets() const;

 private:
  std::vector<std::uint32_t> pos_;
  std::vector<std::uint32_t> neg_;
};

struct Itemset {
  std::vector<std::uint32_t> items;  // sorted
  std::size_t support = 0;
};

/// FP-Growth frequent itemsets of length 1..max_length with support >=
/// min_count. Output sorted by (length, items).
std::vector<Itemset> fpgrowth(const std::vector<std::vector<std::uint32_t>>& transactions, std::size_t min_count,
                              std::size_t max_length);

/// Candidate rules and their row coverage.
struct CandidatePool {
  std::vector<Rule> positive;
  std::vector<Rule> negative;
  std::vector<Bitset> positive_coverage;
  std::vector<Bitset> negative_coverage;
  std::vector<std::string> warnings;

  const std::vector<Rule>& rules(Polarity p) const { return p == Polarity::Positive ? positive : negative; }
  const std::vector<Bitset>& coverage(Polarity p) const {
    return p == Polarity::Positive ? positive_coverage : negative_coverage;
  }
  bool empty() const { return positive.empty() && negative.empty(); }
};

struct MiningOptions {
  double min_support_fraction = 0.05;
  std::size_t max_length = 1;
  std::size_t max_candidates = 10000;
};

/// Γ+ from FP-Growth on the label-1 rows, Γ- on the label-0 rows; support
/// is relative to the polarity's row count. Pools above max_candidates
/// keep the best by within-polarity precision, then support, then items.
/// Throws Error when nothing is frequent.
CandidatePool mine_candidates(const BinarizedDataset& data, const MiningOptions& options);

/// Alternative pool from root-to-node paths (depth <= max_length) of a
/// bagged forest of trees over the predicate columns. Node majority picks
/// the polarity; the same support floor and truncation apply.
CandidatePool forest_candidates(const BinarizedDataset& data, const MiningOptions& options, std::uint64_t seed,
                                std::size_t trees = 50);

/// "x1 >= 1 AND x2 < 0.5"
std::string describe(const Rule& rule, const BinarizedDataset& data);

/// One rule per line: "+ IF pred AND pred" / "- IF ...".
std::string to_text(const RuleSet& rules, const BinarizedDataset& data);
nlohmann::json to_json(const RuleSet& rules, const BinarizedDataset& data);
RuleSet rule_set_from_json(const nlohmann::json& j);

}  // namespace teamrules
