#include "teamrules/rules.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace teamrules {

using nlohmann::json;

Rule Rule::make(std::vector<std::uint32_t> items, std::size_t support_pos, std::size_t support_neg) {
  if (items.empty()) throw Error("a rule needs at least one condition");
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  Rule r;
  r.items = std::move(items);
  r.support_pos = support_pos;
  r.support_neg = support_neg;
  return r;
}

bool covers(const Rule& rule, const BinarizedDataset& data, std::size_t row) {
  if (row >= data.rows()) throw Error("row " + std::to_string(row) + " out of range");
  for (auto item : rule.items) {
    if (item >= data.cols()) throw Error("rule item " + std::to_string(item) + " out of range");
    if (!data.at(row, item)) return false;
  }
  return !rule.items.empty();
}

Bitset rule_coverage(const Rule& rule, const BinarizedDataset& data) {
  if (rule.items.empty()) throw Error("a rule needs at least one condition");
  for (auto item : rule.items) {
    if (item >= data.cols()) throw Error("rule item " + std::to_string(item) + " out of range");
  }
  Bitset out = data.columns[rule.items.front()];
  for (std::size_t k = 1; k < rule.items.size(); ++k) out &= data.columns[rule.items[k]];
  return out;
}

SetCoverage set_coverage(const RuleSet& rules, const BinarizedDataset& data) {
  SetCoverage out{Bitset(data.rows()), Bitset(data.rows())};
  for (const auto& r : rules.positive) out.positive |= rule_coverage(r, data);
  for (const auto& r : rules.negative) out.negative |= rule_coverage(r, data);
  return out;
}

void CoverageCounter::add(Polarity p, const Bitset& coverage) {
  auto& counts = p == Polarity::Positive ? pos_ : neg_;
  coverage.for_each([&](std::size_t i) { ++counts[i]; });
}

void CoverageCounter::remove(Polarity p, const Bitset& coverage) {
  auto& counts = p == Polarity::Positive ? pos_ : neg_;
  coverage.for_each([&](std::size_t i) {
    if (counts[i] == 0) throw Error("coverage count underflow at row " + std::to_string(i));
    --counts[i];
  });
}

SetCoverage CoverageCounter::bitsets() const {
  SetCoverage out{Bitset(rows()), Bitset(rows())};
  for (std::size_t i = 0; i < rows(); ++i) {
    if (pos_[i]) out.positive.set(i);
    if (neg_[i]) out.negative.set(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FP-Growth

namespace {

using WeightedPath = std::pair<std::vector<std::uint32_t>, std::size_t>;

struct FpTree {
  struct Node {
    std::uint32_t rank;
    std::size_t count;
    std::int32_t parent;
    std::vector<std::int32_t> children;
  };
  std::vector<Node> nodes;                       // nodes[0] is the root
  std::vector<std::uint32_t> order;              // rank -> item
  std::vector<std::size_t> support;              // rank -> support
  std::vector<std::vector<std::int32_t>> links;  // rank -> nodes
};

FpTree build_tree(const std::vector<WeightedPath>& paths, std::size_t min_count, std::size_t universe) {
  std::vector<std::size_t> freq(universe, 0);
  for (const auto& [items, w] : paths) {
    for (auto it : items) freq[it] += w;
  }
  FpTree tree;
  for (std::uint32_t it = 0; it < universe; ++it) {
    if (freq[it] >= min_count && freq[it] > 0) tree.order.push_back(it);
  }
  std::stable_sort(tree.order.begin(), tree.order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return freq[a] > freq[b]; });
  constexpr auto kAbsent = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> rank(universe, kAbsent);
  for (std::uint32_t r = 0; r < tree.order.size(); ++r) rank[tree.order[r]] = r;
  tree.support.assign(tree.order.size(), 0);
  tree.links.assign(tree.order.size(), {});
  tree.nodes.push_back({kAbsent, 0, -1, {}});

  std::vector<std::uint32_t> ranked;
  for (const auto& [items, w] : paths) {
    ranked.clear();
    for (auto it : items) {
      if (rank[it] != kAbsent) ranked.push_back(rank[it]);
    }
    std::sort(ranked.begin(), ranked.end());
    std::int32_t cur = 0;
    for (auto r : ranked) {
      std::int32_t next = -1;
      for (auto c : tree.nodes[static_cast<std::size_t>(cur)].children) {
        if (tree.nodes[static_cast<std::size_t>(c)].rank == r) {
          next = c;
          break;
        }
      }
      if (next < 0) {
        next = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({r, 0, cur, {}});
        tree.nodes[static_cast<std::size_t>(cur)].children.push_back(next);
        tree.links[r].push_back(next);
      }
      tree.nodes[static_cast<std::size_t>(next)].count += w;
      tree.support[r] += w;
      cur = next;
    }
  }
  return tree;
}

using ItemsetVisitor = std::function<void(const std::vector<std::uint32_t>&, std::size_t)>;

// Per-item transaction bitsets. The last mining level counts extensions
// against these instead of walking the conditional base, which on dense
// data (long transactions) is the dominant cost.
struct Vertical {
  std::vector<Bitset> items;
  std::vector<Bitset> stack;  // coverage of suffix[0..k]
};

// Visits frequent itemsets containing `suffix`. Items arrive in mining
// order (not sorted); at the last level all extensions of one suffix are
// visited consecutively.
void mine_tree(const FpTree& tree, std::vector<std::uint32_t>& suffix, std::size_t min_count, std::size_t max_length,
               Vertical& vertical, const ItemsetVisitor& visit) {
  for (std::size_t r = tree.order.size(); r-- > 0;) {
    const std::uint32_t item = tree.order[r];
    suffix.push_back(item);
    visit(suffix, tree.support[r]);
    if (suffix.size() < max_length && r > 0) {
      const std::size_t depth = suffix.size() - 1;
      Bitset& cov = vertical.stack[depth];
      cov = vertical.items[item];
      if (depth > 0) cov &= vertical.stack[depth - 1];
      if (suffix.size() + 1 == max_length) {
        // Any frequent extension ranks before `item` in this tree, so the
        // candidates are exactly order[0..r).
        const auto& wc = cov.words();
        for (std::size_t q = 0; q < r; ++q) {
          const auto& wi = vertical.items[tree.order[q]].words();
          std::size_t n = 0;
          for (std::size_t k = 0; k < wc.size(); ++k) n += static_cast<std::size_t>(std::popcount(wc[k] & wi[k]));
          if (n >= min_count && n > 0) {
            suffix.push_back(tree.order[q]);
            visit(suffix, n);
            suffix.pop_back();
          }
        }
      } else {
        std::vector<WeightedPath> base;
        std::vector<std::uint32_t> prefix;
        for (auto node_index : tree.links[r]) {
          const auto& node = tree.nodes[static_cast<std::size_t>(node_index)];
          prefix.clear();
          for (auto p = node.parent; p > 0; p = tree.nodes[static_cast<std::size_t>(p)].parent) {
            prefix.push_back(tree.order[tree.nodes[static_cast<std::size_t>(p)].rank]);
          }
          if (!prefix.empty()) base.emplace_back(prefix, node.count);
        }
        if (!base.empty()) {
          const FpTree conditional = build_tree(base, min_count, vertical.items.size());
          mine_tree(conditional, suffix, min_count, max_length, vertical, visit);
        }
      }
    }
    suffix.pop_back();
  }
}

void fpgrowth_visit(const std::vector<std::vector<std::uint32_t>>& transactions, std::size_t min_count,
                    std::size_t max_length, const ItemsetVisitor& visit) {
  if (max_length == 0 || transactions.empty()) return;
  std::size_t universe = 0;
  std::vector<WeightedPath> paths;
  paths.reserve(transactions.size());
  for (const auto& t : transactions) {
    for (auto it : t) universe = std::max<std::size_t>(universe, it + 1);
    paths.emplace_back(t, 1);
  }
  Vertical vertical;
  vertical.items.assign(universe, Bitset(transactions.size()));
  for (std::size_t i = 0; i < transactions.size(); ++i) {
    for (auto it : transactions[i]) vertical.items[it].set(i);
  }
  vertical.stack.assign(max_length, Bitset(transactions.size()));
  const FpTree tree = build_tree(paths, min_count, universe);
  std::vector<std::uint32_t> suffix;
  mine_tree(tree, suffix, min_count, max_length, vertical, visit);
}

}  // namespace

std::vector<Itemset> fpgrowth(const std::vector<std::vector<std::uint32_t>>& transactions, std::size_t min_count,
                              std::size_t max_length) {
  std::vector<Itemset> out;
  fpgrowth_visit(transactions, min_count, max_length, [&](const std::vector<std::uint32_t>& items, std::size_t support) {
    Itemset s{items, support};
    std::sort(s.items.begin(), s.items.end());
    out.push_back(std::move(s));
  });
  std::sort(out.begin(), out.end(), [](const Itemset& a, const Itemset& b) {
    if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
    return a.items < b.items;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Candidate pools

namespace {

Bitset label_bits(const BinarizedDataset& data, Label value) {
  Bitset out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (data.labels[i] == value) out.set(i);
  }
  return out;
}

std::size_t support_floor(double fraction, std::size_t rows) {
  const double raw = fraction * static_cast<double>(rows);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

struct Ranked {
  std::vector<std::uint32_t> items;  // sorted
  std::size_t support_pos;
  std::size_t support_neg;
  std::size_t own;
  double precision;
};

// Strict "a ranks before b": precision desc, own support desc, items asc.
bool ranks_before(const Ranked& a, const Ranked& b) {
  if (a.precision != b.precision) return a.precision > b.precision;
  if (a.own != b.own) return a.own > b.own;
  return a.items < b.items;
}

// Keeps the best `capacity` itemsets of one polarity seen so far, plus a
// count of everything offered.
class TopK {
 public:
  TopK(Polarity p, std::size_t capacity) : polarity_(p), capacity_(capacity) {}

  void offer(std::vector<std::uint32_t> items, std::size_t pos, std::size_t neg) {
    const std::size_t own = polarity_ == Polarity::Positive ? pos : neg;
    Ranked r{std::move(items), pos, neg, own, static_cast<double>(own) / static_cast<double>(pos + neg)};
    ++seen_;
    if (heap_.size() < capacity_) {
      heap_.push_back(std::move(r));
      std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    } else if (ranks_before(r, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
      heap_.back() = std::move(r);
      std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    }
  }

  // Same as offer(sorted copy of items), but skips the copy when the
  // itemset cannot enter a full heap.
  void offer_unsorted(const std::vector<std::uint32_t>& items, std::size_t pos, std::size_t neg) {
    if (heap_.size() >= capacity_) {
      const Ranked& worst = heap_.front();
      const std::size_t own = polarity_ == Polarity::Positive ? pos : neg;
      const double precision = static_cast<double>(own) / static_cast<double>(pos + neg);
      if (precision < worst.precision || (precision == worst.precision && own < worst.own)) {
        ++seen_;
        return;
      }
    }
    auto sorted = items;
    std::sort(sorted.begin(), sorted.end());
    offer(std::move(sorted), pos, neg);
  }

  std::size_t seen() const { return seen_; }

  std::vector<Ranked> take() {
    std::sort(heap_.begin(), heap_.end(), ranks_before);
    return std::move(heap_);
  }

 private:
  Polarity polarity_;
  std::size_t capacity_;
  std::size_t seen_ = 0;
  std::vector<Ranked> heap_;  // max-heap on "ranks worse", front is the worst kept
};

void emit(const BinarizedDataset& data, TopK& top, Polarity p, const MiningOptions& options, CandidatePool& pool) {
  if (top.seen() > options.max_candidates) {
    pool.warnings.push_back(std::string(p == Polarity::Positive ? "positive" : "negative") + " candidates truncated from " +
                            std::to_string(top.seen()) + " to " + std::to_string(options.max_candidates));
  }
  auto& rules = p == Polarity::Positive ? pool.positive : pool.negative;
  auto& coverage = p == Polarity::Positive ? pool.positive_coverage : pool.negative_coverage;
  for (auto& r : top.take()) {
    Rule rule = Rule::make(std::move(r.items), r.support_pos, r.support_neg);
    coverage.push_back(rule_coverage(rule, data));
    rules.push_back(std::move(rule));
  }
}

// Builds one polarity of a pool from explicit item lists, applying the
// support floor and the precision-ranked truncation.
void finalize(const BinarizedDataset& data, const std::vector<std::vector<std::uint32_t>>& itemsets, Polarity p,
              const MiningOptions& options, CandidatePool& pool) {
  const Bitset pos = label_bits(data, 1);
  const Bitset neg = label_bits(data, 0);
  const std::size_t own_rows = p == Polarity::Positive ? pos.count() : neg.count();
  const std::size_t floor = support_floor(options.min_support_fraction, own_rows);
  TopK top(p, options.max_candidates);
  for (const auto& items : itemsets) {
    if (items.empty() || items.size() > options.max_length) continue;
    const Rule rule = Rule::make(items);
    const Bitset cov = rule_coverage(rule, data);
    const std::size_t sp = (cov & pos).count();
    const std::size_t sn = (cov & neg).count();
    if ((p == Polarity::Positive ? sp : sn) < floor) continue;
    top.offer(rule.items, sp, sn);
  }
  emit(data, top, p, options, pool);
}

std::size_t and_count(const Bitset& a, const Bitset& b, const Bitset& c) {
  std::size_t n = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  const auto& wc = c.words();
  for (std::size_t k = 0; k < wa.size(); ++k) n += static_cast<std::size_t>(std::popcount(wa[k] & wb[k] & wc[k]));
  return n;
}

void check_options(const MiningOptions& options) {
  if (!(options.min_support_fraction > 0.0 && options.min_support_fraction < 1.0)) {
    throw ConfigError("min_support_fraction must be in (0, 1)");
  }
  if (options.max_length < 1) throw ConfigError("max_rule_length must be >= 1");
  if (options.max_candidates < 1) throw ConfigError("max_candidates must be >= 1");
}

}  // namespace

CandidatePool mine_candidates(const BinarizedDataset& data, const MiningOptions& options) {
  check_options(options);
  CandidatePool pool;
  const Bitset pos = label_bits(data, 1);
  const Bitset neg = label_bits(data, 0);
  for (Polarity p : {Polarity::Positive, Polarity::Negative}) {
    const Label target = p == Polarity::Positive ? 1 : 0;
    std::vector<std::vector<std::uint32_t>> transactions;
    std::vector<std::size_t> row_slot(data.rows(), SIZE_MAX);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (data.labels[i] == target) {
        row_slot[i] = transactions.size();
        transactions.emplace_back();
      }
    }
    for (std::size_t j = 0; j < data.cols(); ++j) {
      data.columns[j].for_each([&](std::size_t i) {
        if (row_slot[i] != SIZE_MAX) transactions[row_slot[i]].push_back(static_cast<std::uint32_t>(j));
      });
    }
    TopK top(p, options.max_candidates);
    if (!transactions.empty()) {
      const std::size_t floor = support_floor(options.min_support_fraction, transactions.size());
      // Coverage of the itemset minus its last item; consecutive visits
      // usually share it.
      std::vector<std::uint32_t> cached_prefix;
      Bitset prefix_cov;
      bool cache_valid = false;
      fpgrowth_visit(transactions, floor, options.max_length,
                     [&](const std::vector<std::uint32_t>& items, std::size_t support) {
                       const std::uint32_t last = items.back();
                       const std::size_t k = items.size() - 1;
                       if (!cache_valid || cached_prefix.size() != k ||
                           !std::equal(cached_prefix.begin(), cached_prefix.end(), items.begin())) {
                         cached_prefix.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k));
                         prefix_cov = Bitset(data.rows());
                         for (auto& w : prefix_cov.words()) w = ~std::uint64_t{0};
                         for (auto it : cached_prefix) prefix_cov &= data.columns[it];
                         cache_valid = true;
                       }
                       const Bitset& other = p == Polarity::Positive ? neg : pos;
                       const std::size_t other_support = and_count(prefix_cov, data.columns[last], other);
                       if (p == Polarity::Positive) {
                         top.offer_unsorted(items, support, other_support);
                       } else {
                         top.offer_unsorted(items, other_support, support);
                       }
                     });
    }
    emit(data, top, p, options, pool);
  }
  if (pool.empty()) {
    throw Error("no candidate rules reach min_support_fraction " + std::to_string(options.min_support_fraction) +
                "; lower the support threshold");
  }
  return pool;
}

namespace {

struct TreeBuilder {
  const BinarizedDataset& data;
  std::size_t max_depth;
  Rng& rng;
  std::set<std::vector<std::uint32_t>>& paths;

  void grow(const std::vector<std::size_t>& rows, std::vector<std::uint32_t>& path) {
    if (!path.empty()) {
      auto sorted = path;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      paths.insert(std::move(sorted));
    }
    if (path.size() >= max_depth || rows.size() < 2) return;
    std::size_t pos = 0;
    for (auto i : rows) pos += data.labels[i];
    if (pos == 0 || pos == rows.size()) return;

    auto gini = [](double p, double n) {
      const double t = p + n;
      return t > 0 ? t * (1.0 - (p / t) * (p / t) - (n / t) * (n / t)) : 0.0;
    };
    const double parent = gini(static_cast<double>(pos), static_cast<double>(rows.size() - pos));
    const std::size_t m = data.cols();
    const auto tries = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(m))));
    double best_gain = 1e-12;
    std::size_t best_col = m;
    for (std::size_t t = 0; t < tries; ++t) {
      const std::size_t j = rng.below(m);
      double tp = 0, tn = 0, fp = 0, fn = 0;
      for (auto i : rows) {
        const bool v = data.at(i, j);
        const bool y = data.labels[i] != 0;
        (v ? (y ? tp : tn) : (y ? fp : fn)) += 1.0;
      }
      const double gain = parent - gini(tp, tn) - gini(fp, fn);
      if (gain > best_gain) {
        best_gain = gain;
        best_col = j;
      }
    }
    if (best_col == m) return;
    std::vector<std::size_t> yes, no;
    for (auto i : rows) (data.at(i, best_col) ? yes : no).push_back(i);
    path.push_back(static_cast<std::uint32_t>(best_col));
    grow(yes, path);
    path.back() = static_cast<std::uint32_t>(data.complement[best_col]);
    grow(no, path);
    path.pop_back();
  }
};

}  // namespace

CandidatePool forest_candidates(const BinarizedDataset& data, const MiningOptions& options, std::uint64_t seed,
                                std::size_t trees) {
  check_options(options);
  if (data.rows() == 0 || data.cols() == 0) throw Error("cannot grow a forest on an empty dataset");
  Rng rng(seed);
  std::set<std::vector<std::uint32_t>> paths;
  for (std::size_t t = 0; t < trees; ++t) {
    std::vector<std::size_t> sample(data.rows());
    for (auto& s : sample) s = rng.below(data.rows());
    std::vector<std::uint32_t> path;
    TreeBuilder{data, options.max_length, rng, paths}.grow(sample, path);
  }
  std::vector<std::vector<std::uint32_t>> pos_sets, neg_sets;
  const Bitset pos = label_bits(data, 1);
  for (const auto& p : paths) {
    const Bitset cov = rule_coverage(Rule::make(p), data);
    const std::size_t covered = cov.count();
    if (covered == 0) continue;
    const std::size_t hits = (cov & pos).count();
    (2 * hits >= covered ? pos_sets : neg_sets).push_back(p);
  }
  CandidatePool pool;
  finalize(data, pos_sets, Polarity::Positive, options, pool);
  finalize(data, neg_sets, Polarity::Negative, options, pool);
  if (pool.empty()) throw Error("forest produced no candidate rules above the support floor; lower the support threshold");
  return pool;
}

// ---------------------------------------------------------------------------
// Serialization

std::string describe(const Rule& rule, const BinarizedDataset& data) {
  std::string out;
  for (std::size_t k = 0; k < rule.items.size(); ++k) {
    if (k) out += " AND ";
    out += data.predicates.at(rule.items[k]).describe(data.feature_names());
  }
  return out;
}

std::string to_text(const RuleSet& rules, const BinarizedDataset& data) {
  std::ostringstream os;
  for (const auto& r : rules.positive) os << "+ IF " << describe(r, data) << '\n';
  for (const auto& r : rules.negative) os << "- IF " << describe(r, data) << '\n';
  return os.str();
}

json to_json(const RuleSet& rules, const BinarizedDataset& data) {
  auto encode = [&](const std::vector<Rule>& list) {
    json arr = json::array();
    for (const auto& r : list) {
      json conditions = json::array();
      for (auto item : r.items) conditions.push_back(data.predicates.at(item).describe(data.feature_names()));
      arr.push_back({{"items", r.items},
                     {"conditions", conditions},
                     {"support_pos", r.support_pos},
                     {"support_neg", r.support_neg}});
    }
    return arr;
  };
  return json{{"positive", encode(rules.positive)}, {"negative", encode(rules.negative)}};
}

RuleSet rule_set_from_json(const json& j) {
  auto decode = [](const json& arr) {
    std::vector<Rule> out;
    for (const auto& e : arr) {
      out.push_back(Rule::make(e.at("items").get<std::vector<std::uint32_t>>(), e.value("support_pos", std::size_t{0}),
                               e.value("support_neg", std::size_t{0})));
    }
    return out;
  };
  RuleSet rs;
  rs.positive = decode(j.at("positive"));
  rs.negative = decode(j.at("negative"));
  return rs;
}

}  // namespace teamrules
