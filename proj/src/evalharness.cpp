#include "teamrules/evalharness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace teamrules {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Team simulation

TeamOutcome simulate_team(const std::vector<std::optional<Label>>& advice, const std::vector<Label>& labels,
                          const HumanProfile& human, double alpha, bool cl_on_acceptance) {
  const std::size_t n = labels.size();
  if (advice.size() != n || human.decisions.size() != n || human.accepts.size() != n) {
    throw DataError("advice, labels and human profile lengths differ");
  }
  TeamOutcome out;
  out.recommendation = advice;
  out.accepted.assign(n, 0);
  out.final_decision.assign(n, 0);
  std::size_t errors = 0;
  std::size_t charged = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Label h = human.decisions[i];
    Label yhat = h;
    if (advice[i]) {
      ++out.recommendation_count;
      if (*advice[i] != h) {
        const bool accept = human.accepts[i] != 0;
        out.accepted[i] = accept ? 1 : 0;
        if (accept) yhat = *advice[i];
        ++out.contradiction_count;
        if (!cl_on_acceptance || accept) ++charged;
      } else {
        out.accepted[i] = 1;
      }
    }
    out.final_decision[i] = yhat;
    errors += static_cast<std::size_t>(yhat != labels[i]);
  }
  if (cl_on_acceptance) out.contradiction_count = charged;
  const double N = static_cast<double>(n);
  out.tdl = n ? static_cast<double>(errors) / N : 0.0;
  out.cl = n ? alpha * static_cast<double>(charged) / N : 0.0;
  out.ttl = out.tdl + out.cl;
  return out;
}

TeamOutcome simulate_team(const Advisor& advisor, const DiscretionModel& disc, const BinarizedDataset& test,
                          const HumanProfile& human, double alpha, bool cl_on_acceptance) {
  std::vector<std::optional<Label>> advice(test.rows());
  for (std::size_t i = 0; i < test.rows(); ++i) advice[i] = advise(advisor, disc, test, i);
  return simulate_team(advice, test.labels, human, alpha, cl_on_acceptance);
}

// ---------------------------------------------------------------------------
// Scenarios and cells

namespace {

// Stream ids for seeds derived from the scenario seed.
enum Stream : std::uint64_t {
  kData = 1,
  kSplit,
  kSurrogate,
  kTrainHuman,
  kTestHuman,
  kForest,
  kLearned,
  kCoin,
  kSearch,
};

}  // namespace

std::vector<Scenario> prepare_scenarios(const ExperimentConfig& cfg, const std::vector<AdbMode>& adbs,
                                       std::uint64_t seed) {
  Scenario base;
  base.dataset_id = cfg.dataset_id();
  base.seed = seed;

  RawDataset all;
  double fraction = cfg.dataset.train_fraction;
  if (cfg.dataset.name == "checkers" || cfg.dataset.name == "gaussian") {
    const std::size_t n = cfg.dataset.n_train + cfg.dataset.n_test;
    all = cfg.dataset.name == "checkers" ? gen_checkers(n, mix_seed(seed, kData)) : gen_gaussian(n, mix_seed(seed, kData));
    fraction = static_cast<double>(cfg.dataset.n_train) / static_cast<double>(n);
  } else {
    all = load_csv(cfg.dataset.path, cfg.dataset.label_column);
  }
  const auto parts = split(all.rows(), SplitSpec{fraction, mix_seed(seed, kSplit)});
  RawDataset train_all = all.subset(parts.train);
  auto test_raw = std::make_shared<RawDataset>(all.subset(parts.test));

  std::vector<AccuracyRegion> regions;
  std::shared_ptr<RawDataset> train_raw;
  if (!cfg.human.accuracy_regions.empty()) {
    regions = cfg.human.accuracy_regions;
    train_raw = std::make_shared<RawDataset>(std::move(train_all));
  } else {
    auto surrogate =
        fit_surrogate_human(train_all, cfg.human.surrogate_holdout, cfg.human.bands, mix_seed(seed, kSurrogate));
    regions = surrogate.regions;
    train_raw = std::make_shared<RawDataset>(train_all.subset(surrogate.remaining_rows));
    for (auto& w : surrogate.warnings) base.warnings.push_back(std::move(w));
  }

  auto train = std::make_shared<BinarizedDataset>(binarize(*train_raw, cfg.bins()));
  train->source = train_raw;
  auto test = std::make_shared<BinarizedDataset>(apply_predicates(*train, *test_raw));
  for (const auto& w : train->warnings) base.warnings.push_back(w);

  // Candidates depend only on the training rows, so every ADB shares them.
  const auto mining = cfg.search.mining();
  base.pool = cfg.dataset.candidate_source == "forest"
                  ? forest_candidates(*train, mining, mix_seed(seed, kForest), cfg.dataset.forest_trees)
                  : mine_candidates(*train, mining);
  for (const auto& w : base.pool.warnings) base.warnings.push_back(w);
  base.train_raw = train_raw;
  base.test_raw = test_raw;
  base.train = train;
  base.test = test;

  std::vector<Scenario> out;
  for (auto adb : adbs) {
    Scenario sc = base;
    BehaviorSpec spec;
    spec.accuracy_regions = regions;
    spec.adb_mode = adb;
    spec.neutral_region = cfg.human.neutral_region;
    spec.validate();
    sc.adb_mode = adb;
    sc.behavior = spec;
    sc.train_human = simulate_human(*train_raw, spec, mix_seed(seed, kTrainHuman));
    sc.test_human = simulate_human(*test_raw, spec, mix_seed(seed, kTestHuman));
    out.push_back(std::move(sc));
  }
  return out;
}

Scenario prepare_scenario(const ExperimentConfig& cfg, AdbMode adb, std::uint64_t seed) {
  return std::move(prepare_scenarios(cfg, {adb}, seed).front());
}

CellResult run_cell(const ExperimentConfig& cfg, const Scenario& sc, const Cell& cell) {
  const auto start = std::chrono::steady_clock::now();
  std::optional<DiscretionModel> disc;
  switch (cell.discretion) {
    case DiscretionKind::Oracle:
      disc = oracle(sc.train_human, sc.behavior, *sc.train_raw);
      break;
    case DiscretionKind::Learned:
      disc = fit_discretion(*sc.train_raw, sc.train_human.accepts, cell.subset_size, mix_seed(sc.seed, kLearned),
                            cfg.discretion.classifier);
      break;
    case DiscretionKind::Coin:
      disc = coin_discretion(sc.train_raw->cols(), mix_seed(sc.seed, kCoin));
      break;
  }

  TeamContext ctx = make_context(sc.train, sc.train_human.decisions, disc->predict_all(*sc.train_raw), cell.alpha);
  SearchConfig search = cfg.search;
  search.alpha = cell.alpha;
  search.mode = cell.mode;
  search.seed = mix_seed(sc.seed, kSearch);

  CellResult out;
  out.fit = cell.mode == Mode::TeamRules ? fit(ctx, sc.pool, search) : fit_baseline(ctx, sc.pool, search);
  out.training_loss = loss(ctx, out.fit.rule_set);
  const Advisor advisor = make_advisor(out.fit, search.gate_threshold);
  out.outcome = simulate_team(advisor, *disc, *sc.test, sc.test_human, cell.alpha, cfg.evaluation.cl_on_acceptance);

  auto& r = out.record;
  r.dataset = sc.dataset_id;
  r.adb_mode = to_string(sc.adb_mode);
  r.mode = to_string(cell.mode);
  r.alpha = cell.alpha;
  r.seed = sc.seed;
  r.discretion_kind = to_string(cell.discretion);
  r.discretion_train_size = disc->training_size();
  r.discretion_accuracy = discretion_accuracy(*disc, *sc.test_raw, sc.test_human.accepts);
  r.tdl = out.outcome.tdl;
  r.cl = out.outcome.cl;
  r.ttl = out.outcome.ttl;
  r.contradictions = out.outcome.contradiction_count;
  r.recommendations = out.outcome.recommendation_count;
  if (cfg.evaluation.record_wall_time) {
    r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

ExperimentRecord human_record(const Scenario& sc, double alpha) {
  const std::vector<std::optional<Label>> none(sc.test->rows());
  const auto outcome = simulate_team(none, sc.test->labels, sc.test_human, alpha);
  ExperimentRecord r;
  r.dataset = sc.dataset_id;
  r.adb_mode = to_string(sc.adb_mode);
  r.mode = "HUMAN";
  r.alpha = alpha;
  r.seed = sc.seed;
  r.discretion_kind = "none";
  r.tdl = outcome.tdl;
  r.cl = outcome.cl;
  r.ttl = outcome.ttl;
  return r;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

namespace {

struct Task {
  std::size_t scenario;
  std::optional<Cell> cell;  // empty: unadvised human record
  double alpha;
};

std::string describe_task(const ExperimentConfig& cfg, AdbMode adb, std::uint64_t seed, const Task& t) {
  std::ostringstream os;
  os << cfg.dataset_id() << '/' << to_string(adb) << "/seed=" << seed << "/alpha=" << t.alpha;
  if (t.cell) {
    os << '/' << to_string(t.cell->mode) << '/' << to_string(t.cell->discretion);
    if (t.cell->discretion == DiscretionKind::Learned) os << '(' << t.cell->subset_size << ')';
  } else {
    os << "/HUMAN";
  }
  return os.str();
}

SweepResult run_tasks(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds,
                      const std::function<std::vector<Task>(std::size_t scenario)>& make_tasks, std::size_t jobs) {
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  std::vector<std::pair<AdbMode, std::uint64_t>> keys;
  for (auto adb : cfg.human.adb_modes) {
    for (auto seed : seeds) keys.emplace_back(adb, seed);
  }
  std::vector<std::optional<Scenario>> scenarios(keys.size());
  std::vector<std::string> scenario_errors(keys.size());
  const auto& adbs = cfg.human.adb_modes;
  parallel_for(seeds.size(), jobs, [&](std::size_t s) {
    try {
      auto prepared = prepare_scenarios(cfg, adbs, seeds[s]);
      for (std::size_t a = 0; a < adbs.size(); ++a) scenarios[a * seeds.size() + s] = std::move(prepared[a]);
    } catch (const std::exception& e) {
      for (std::size_t a = 0; a < adbs.size(); ++a) scenario_errors[a * seeds.size() + s] = e.what();
    }
  });

  std::vector<Task> tasks;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    for (auto& t : make_tasks(k)) tasks.push_back(t);
  }
  std::vector<std::optional<ExperimentRecord>> records(tasks.size());
  std::vector<std::string> errors(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const auto& sc = scenarios[t.scenario];
    if (!sc) {
      errors[i] = scenario_errors[t.scenario];
      return;
    }
    try {
      records[i] = t.cell ? run_cell(cfg, *sc, *t.cell).record : human_record(*sc, t.alpha);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  SweepResult out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (records[i]) {
      out.records.push_back(*records[i]);
    } else {
      const auto& key = keys[tasks[i].scenario];
      out.failures.push_back(describe_task(cfg, key.first, key.second, tasks[i]) + ": " + errors[i]);
    }
  }
  return out;
}

}  // namespace

SweepResult sweep_alpha(const ExperimentConfig& cfg, const std::vector<double>& alphas,
                        const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
  if (alphas.empty()) throw ConfigError("sweep needs at least one alpha");
  return run_tasks(
      cfg, seeds,
      [&](std::size_t k) {
        std::vector<Task> tasks;
        for (double a : alphas) {
          if (cfg.sweep.include_human) tasks.push_back({k, std::nullopt, a});
          for (auto m : cfg.sweep.modes) {
            Cell c;
            c.mode = m;
            c.alpha = a;
            c.discretion = cfg.discretion.kind;
            if (c.discretion == DiscretionKind::Learned) {
              if (cfg.discretion.subset_sizes.empty()) throw ConfigError("learned discretion needs subset_sizes");
              c.subset_size = cfg.discretion.subset_sizes.front();
            }
            tasks.push_back({k, c, a});
          }
        }
        return tasks;
      },
      jobs);
}

SweepResult sweep_discretion(const ExperimentConfig& cfg, const std::vector<std::size_t>& subset_sizes,
                             const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
  return run_tasks(
      cfg, seeds,
      [&](std::size_t k) {
        std::vector<Task> tasks;
        for (double a : cfg.sweep.alphas) {
          auto add = [&](DiscretionKind kind, std::size_t size) {
            Cell c;
            c.mode = Mode::TeamRules;
            c.alpha = a;
            c.discretion = kind;
            c.subset_size = size;
            tasks.push_back({k, c, a});
          };
          if (cfg.discretion.include_oracle) add(DiscretionKind::Oracle, 0);
          for (auto s : subset_sizes) add(DiscretionKind::Learned, s);
          if (cfg.discretion.include_coin) add(DiscretionKind::Coin, 0);
        }
        return tasks;
      },
      jobs);
}

// ---------------------------------------------------------------------------
// Statistics

double paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("paired t-test needs equal-length samples");
  if (a.size() < 2) throw Error("paired t-test needs at least 2 pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    if (mean < 0.0) return 0.0;
    if (mean > 0.0) return 1.0;
    return 0.5;
  }
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::cdf(dist, t);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("spearman needs equal-length samples");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Result files

namespace {

constexpr const char* kHeader =
    "dataset,adb_mode,mode,alpha,seed,discretion_kind,discretion_train_size,discretion_accuracy,tdl,cl,ttl,"
    "contradictions,recommendations,wall_time_ms";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string sidecar_path(const std::string& csv_path) {
  fs::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

}  // namespace

void emit_results(const std::vector<ExperimentRecord>& records, const std::string& csv_path, const json& sidecar) {
  if (records.empty()) throw Error("no records to emit");
  for (const auto& r : records) {
    if (r.ttl != r.tdl + r.cl) throw Error("record breaks TTL = TDL + CL (" + r.mode + ", seed " + std::to_string(r.seed) + ")");
  }
  const fs::path parent = fs::path(csv_path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error("cannot write '" + csv_path + "'");
  out << kHeader << '\n';
  for (const auto& r : records) {
    out << csv_field(r.dataset) << ',' << csv_field(r.adb_mode) << ',' << csv_field(r.mode) << ',' << fmt(r.alpha) << ','
        << r.seed << ',' << csv_field(r.discretion_kind) << ',' << r.discretion_train_size << ','
        << fmt(r.discretion_accuracy) << ',' << fmt(r.tdl) << ',' << fmt(r.cl) << ',' << fmt(r.ttl) << ','
        << r.contradictions << ',' << r.recommendations << ',' << fmt(r.wall_time_ms) << '\n';
  }
  if (!out) throw Error("failed writing '" + csv_path + "'");
  std::ofstream side(sidecar_path(csv_path), std::ios::binary);
  if (!side) throw Error("cannot write '" + sidecar_path(csv_path) + "'");
  side << sidecar.dump(2) << '\n';
}

std::vector<ExperimentRecord> read_results(const std::string& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error("cannot read '" + csv_path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw DataError("'" + csv_path + "' is not a results CSV");
  std::vector<ExperimentRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != 14) throw DataError("results row " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields");
    try {
      ExperimentRecord r;
      r.dataset = f[0];
      r.adb_mode = f[1];
      r.mode = f[2];
      r.alpha = std::stod(f[3]);
      r.seed = std::stoull(f[4]);
      r.discretion_kind = f[5];
      r.discretion_train_size = std::stoull(f[6]);
      r.discretion_accuracy = std::stod(f[7]);
      r.tdl = std::stod(f[8]);
      r.cl = std::stod(f[9]);
      r.ttl = std::stod(f[10]);
      r.contradictions = std::stoull(f[11]);
      r.recommendations = std::stoull(f[12]);
      r.wall_time_ms = std::stod(f[13]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw DataError("results row " + std::to_string(lineno) + " has an unparseable number");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string cell_text(const std::map<std::uint64_t, double>& by_seed) {
  std::vector<double> v;
  for (const auto& [_, x] : by_seed) v.push_back(x);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", mean_of(v));
  return buf;
}

// Values of `a` and `b` on the seeds both have.
std::pair<std::vector<double>, std::vector<double>> paired(const std::map<std::uint64_t, double>& a,
                                                           const std::map<std::uint64_t, double>& b) {
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto& [seed, x] : a) {
    auto it = b.find(seed);
    if (it == b.end()) continue;
    out.first.push_back(x);
    out.second.push_back(it->second);
  }
  return out;
}

std::string marker(const std::map<std::uint64_t, double>& tr, const std::map<std::uint64_t, double>& other,
                   const char* once, const char* twice) {
  auto [a, b] = paired(tr, other);
  if (a.size() < 2) return "";
  const double p = paired_ttest(a, b);
  if (p < 0.005) return twice;
  if (p < 0.05) return once;
  return "";
}

std::string pad(const std::string& s, std::size_t width) {
  // Display width counts UTF-8 code points.
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  return s + std::string(width > cps ? width - cps : 1, ' ');
}

}  // namespace

std::string table1_summary(const std::vector<ExperimentRecord>& records) {
  using SeedMap = std::map<std::uint64_t, double>;
  struct Row {
    std::string dataset, adb, disc;
    std::map<std::string, SeedMap> modes;
  };
  std::vector<Row> rows;
  std::map<std::pair<std::string, std::string>, SeedMap> human;
  std::vector<std::string> mode_order;
  for (const auto& r : records) {
    if (r.alpha != 0.0) continue;
    if (r.mode == "HUMAN") {
      human[{r.dataset, r.adb_mode}][r.seed] = r.ttl;
      continue;
    }
    std::string disc = r.discretion_kind;
    if (r.discretion_kind == "learned") disc += "(" + std::to_string(r.discretion_train_size) + ")";
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const Row& row) { return row.dataset == r.dataset && row.adb == r.adb_mode && row.disc == disc; });
    if (it == rows.end()) {
      rows.push_back({r.dataset, r.adb_mode, disc, {}});
      it = rows.end() - 1;
    }
    it->modes[r.mode][r.seed] = r.ttl;
    if (std::find(mode_order.begin(), mode_order.end(), r.mode) == mode_order.end()) mode_order.push_back(r.mode);
  }
  if (rows.empty()) return "";

  std::ostringstream os;
  os << pad("dataset", 12) << pad("adb", 12) << pad("discretion", 14) << pad("HUMAN", 9);
  for (const auto& m : mode_order) os << pad(m, 18);
  os << '\n';
  for (const auto& row : rows) {
    os << pad(row.dataset, 12) << pad(row.adb, 12) << pad(row.disc, 14);
    auto h = human.find({row.dataset, row.adb});
    os << pad(h == human.end() ? "-" : cell_text(h->second), 9);
    for (const auto& m : mode_order) {
      auto it = row.modes.find(m);
      if (it == row.modes.end()) {
        os << pad("-", 18);
        continue;
      }
      std::string text = cell_text(it->second);
      if (m == "TEAMRULES") {
        if (auto hy = row.modes.find("HYRS_ADAPTED"); hy != row.modes.end()) text += marker(it->second, hy->second, "*", "**");
        if (auto br = row.modes.find("BRS_LIKE"); br != row.modes.end()) text += marker(it->second, br->second, "◇", "◇◇");
      }
      os << pad(text, 18);
    }
    os << '\n';
  }
  os << "mean test TTL at alpha = 0; TEAMRULES vs HYRS_ADAPTED: * p<0.05, ** p<0.005; vs BRS_LIKE: ◇ p<0.05, ◇◇ p<0.005"
        " (paired one-sided t-test over seeds)\n";
  return os.str();
}

std::string sweep_summary(const std::vector<ExperimentRecord>& records) {
  struct Acc {
    std::vector<double> ttl, tdl, cl, contra, recs;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> groups;
  for (const auto& r : records) {
    std::string disc = r.discretion_kind;
    if (r.discretion_kind == "learned") disc += "(" + std::to_string(r.discretion_train_size) + ")";
    char alpha[32];
    std::snprintf(alpha, sizeof alpha, "%.3g", r.alpha);
    const std::string key = pad(r.dataset, 12) + pad(r.adb_mode, 12) + pad(r.mode, 18) + pad(disc, 14) + pad(alpha, 7);
    if (!groups.count(key)) order.push_back(key);
    auto& g = groups[key];
    g.ttl.push_back(r.ttl);
    g.tdl.push_back(r.tdl);
    g.cl.push_back(r.cl);
    g.contra.push_back(static_cast<double>(r.contradictions));
    g.recs.push_back(static_cast<double>(r.recommendations));
  }
  std::ostringstream os;
  os << pad("dataset", 12) << pad("adb", 12) << pad("mode", 18) << pad("discretion", 14) << pad("alpha", 7)
     << "   ttl     tdl     cl      contra   recs     n\n";
  for (const auto& key : order) {
    const auto& g = groups[key];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%7.4f %7.4f %7.4f %8.1f %8.1f %3zu", mean_of(g.ttl), mean_of(g.tdl), mean_of(g.cl),
                  mean_of(g.contra), mean_of(g.recs), g.ttl.size());
    os << key << buf << '\n';
  }
  return os.str();
}

}  // namespace teamrules
