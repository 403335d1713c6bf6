// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is 0 when the set of failing criteria equals the set given
// with --expect-fail (empty by default), so a known, documented shortfall
// stays visible in the output without breaking the suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "teamrules/config.hpp"
#include "teamrules/evalharness.hpp"

using namespace teamrules;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Every record any criterion produced, for the metrics identity.
std::vector<ExperimentRecord> g_records;

void keep(const std::vector<ExperimentRecord>& rs) { g_records.insert(g_records.end(), rs.begin(), rs.end()); }

std::shared_ptr<BinarizedDataset> random_binary(std::size_t rows, std::size_t features, Rng& rng) {
  auto raw = std::make_shared<RawDataset>();
  for (std::size_t j = 0; j < features; ++j) raw->feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < features; ++j) raw->values.push_back(rng.coin() ? 1.0 : 0.0);
    raw->labels.push_back(rng.coin() ? 1 : 0);
  }
  for (std::size_t j = 0; j < features; ++j) {
    bool varies = false;
    for (std::size_t i = 1; i < rows; ++i) varies |= raw->values[i * features + j] != raw->values[j];
    if (!varies) raw->values[j] = 1.0 - raw->values[j];
  }
  auto data = std::make_shared<BinarizedDataset>(binarize(*raw, 1));
  data->source = raw;
  return data;
}

Outcome closed_form() {
  Rng rng(1001);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(19);
    auto data = random_binary(n, 1 + rng.below(5), rng);
    std::vector<Label> human(n);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      human[i] = rng.coin() ? 1 : 0;
      p[i] = rng.coin() ? rng.uniform() : static_cast<double>(rng.coin());
    }
    const auto ctx = make_context(data, human, p, rng.uniform());
    RuleSet rs;
    for (auto* side : {&rs.positive, &rs.negative}) {
      const auto k = rng.below(4);
      for (std::size_t r = 0; r < k; ++r) {
        std::vector<std::uint32_t> items;
        const auto len = 1 + rng.below(3);
        for (std::size_t m = 0; m < len; ++m) items.push_back(static_cast<std::uint32_t>(rng.below(data->cols())));
        side->push_back(Rule::make(items));
      }
    }
    const auto a = loss(ctx, rs);
    const auto b = closed_form_loss(ctx, rs);
    if (a.decision_loss != b.decision_loss || a.reconciliation_loss != b.reconciliation_loss || a.total != b.total) {
      ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 1000 instances differ"};
}

Outcome fpgrowth_oracle() {
  Rng rng(2002);
  std::size_t bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t universe = 2 + rng.below(11);
    const std::size_t rows = 5 + rng.below(80);
    const double density = 0.2 + 0.6 * rng.uniform();
    std::vector<std::vector<std::uint32_t>> tx(rows);
    std::vector<std::uint32_t> masks(rows, 0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < universe; ++j) {
        if (rng.uniform() < density) {
          tx[i].push_back(j);
          masks[i] |= 1u << j;
        }
      }
    }
    const std::size_t min_count = 1 + rng.below(std::max<std::size_t>(1, rows / 4));
    const std::size_t max_length = 1 + rng.below(universe);
    std::map<std::vector<std::uint32_t>, std::size_t> expected;
    for (std::uint32_t m = 1; m < (1u << universe); ++m) {
      if (static_cast<std::size_t>(__builtin_popcount(m)) > max_length) continue;
      std::size_t count = 0;
      for (auto t : masks) count += (t & m) == m;
      if (count < min_count) continue;
      std::vector<std::uint32_t> items;
      for (std::uint32_t j = 0; j < universe; ++j) {
        if (m & (1u << j)) items.push_back(j);
      }
      expected[items] = count;
    }
    const auto got = fpgrowth(tx, min_count, max_length);
    std::map<std::vector<std::uint32_t>, std::size_t> mined;
    for (const auto& s : got) mined[s.items] = s.support;
    if (mined != expected || mined.size() != got.size()) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " of 50 datasets differ"};
}

ExperimentConfig preset(const std::string& name) { return load_config(preset_path(name)); }

struct Key {
  std::string adb, mode;
  double alpha;
  auto operator<=>(const Key&) const = default;
};

// Mean TTL (or another field) per (adb, mode, alpha).
std::map<Key, std::vector<double>> group(const std::vector<ExperimentRecord>& rs,
                                         const std::function<double(const ExperimentRecord&)>& field) {
  std::map<Key, std::vector<double>> out;
  for (const auto& r : rs) out[{r.adb_mode, r.mode, r.alpha}].push_back(field(r));
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

Outcome table1(std::size_t jobs) {
  const auto cfg = preset("table1-checkers");
  const auto res = sweep_alpha(cfg, {0.0}, cfg.sweep.seeds, jobs);
  keep(res.records);
  if (!res.failures.empty()) return {false, "failed cell: " + res.failures.front()};
  auto ttl = group(res.records, [](const auto& r) { return r.ttl; });
  auto m = [&](const std::string& adb, const std::string& mode) { return mean(ttl[{adb, mode, 0.0}]); };

  std::ostringstream os;
  bool pass = true;
  auto check = [&](bool ok, const std::string& what) {
    os << (ok ? "" : "[x] ") << what << "; ";
    pass &= ok;
  };
  const double rational = m("RATIONAL", "TEAMRULES");
  const double neutral = m("NEUTRAL", "TEAMRULES");
  const double irr = m("IRRATIONAL", "TEAMRULES");
  const double irr_human = m("IRRATIONAL", "HUMAN");
  check(std::abs(rational - 0.063) <= 0.02, "Rational TR " + fmt(rational) + " vs 0.063+-0.02");
  check(std::abs(neutral - 0.084) <= 0.02, "Neutral TR " + fmt(neutral) + " vs 0.084+-0.02");
  check(std::abs(irr - irr_human) <= 0.005, "Irrational TR " + fmt(irr) + " vs human " + fmt(irr_human) + "+-0.005");
  for (const std::string adb : {"NEUTRAL", "IRRATIONAL"}) {
    const double tr = m(adb, "TEAMRULES"), hy = m(adb, "HYRS_ADAPTED"), brs = m(adb, "BRS_LIKE");
    check(tr <= hy && hy <= brs, adb + " order TR " + fmt(tr) + " <= HYRS " + fmt(hy) + " <= BRS " + fmt(brs));
  }
  return {pass, os.str()};
}

Outcome alpha_one(std::size_t jobs) {
  std::ostringstream os;
  bool pass = true;
  for (const std::string name : {"table1-checkers", "table1-gaussian"}) {
    auto cfg = preset(name);
    const std::vector<AdbMode> adbs = {AdbMode::Rational, AdbMode::Neutral, AdbMode::Irrational};
    const auto& seeds = cfg.sweep.seeds;
    // results[a][s]
    std::vector<std::vector<CellResult>> results(adbs.size(), std::vector<CellResult>(seeds.size()));
    std::vector<std::vector<ExperimentRecord>> humans(adbs.size(), std::vector<ExperimentRecord>(seeds.size()));
    std::vector<std::string> errors(seeds.size());
    parallel_for(seeds.size(), jobs, [&](std::size_t s) {
      try {
        const auto scs = prepare_scenarios(cfg, adbs, seeds[s]);
        for (std::size_t a = 0; a < adbs.size(); ++a) {
          results[a][s] = run_cell(cfg, scs[a], Cell{Mode::TeamRules, 1.0, DiscretionKind::Oracle, 0});
          humans[a][s] = human_record(scs[a], 1.0);
        }
      } catch (const std::exception& e) {
        errors[s] = e.what();
      }
    });
    for (const auto& e : errors) {
      if (!e.empty()) return {false, name + ": " + e};
    }
    for (std::size_t a = 0; a < adbs.size(); ++a) {
      std::vector<double> tr, hu;
      double omega = 0;
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        omega = std::max(omega, results[a][s].fit.best_training_loss.reconciliation_loss);
        omega = std::max(omega, results[a][s].training_loss.reconciliation_loss);
        tr.push_back(results[a][s].record.ttl);
        hu.push_back(humans[a][s].ttl);
        g_records.push_back(results[a][s].record);
        g_records.push_back(humans[a][s]);
      }
      const bool ok = omega == 0.0 && mean(tr) <= mean(hu) + 0.01;
      pass &= ok;
      os << (ok ? "" : "[x] ") << cfg.dataset_id() << "/" << to_string(adbs[a]) << " omega " << omega << " TTL "
         << fmt(mean(tr)) << " human " << fmt(mean(hu)) << "; ";
    }
  }
  return {pass, os.str()};
}

Outcome cost_sweep(std::size_t jobs) {
  const auto cfg = preset("fig3-checkers");
  const auto res = sweep_alpha(cfg, cfg.sweep.alphas, cfg.sweep.seeds, jobs);
  keep(res.records);
  if (!res.failures.empty()) return {false, "failed cell: " + res.failures.front()};
  auto contra = group(res.records, [](const auto& r) { return static_cast<double>(r.contradictions); });
  std::vector<double> alphas, means;
  std::ostringstream os;
  os << "TR contradictions";
  for (double a : cfg.sweep.alphas) {
    alphas.push_back(a);
    means.push_back(mean(contra[{"NEUTRAL", "TEAMRULES", a}]));
    os << ' ' << means.back();
  }
  const double rho = spearman(alphas, means);
  std::map<std::uint64_t, std::set<std::size_t>> brs;
  for (const auto& r : res.records) {
    if (r.mode == "BRS_LIKE") brs[r.seed].insert(r.recommendations);
  }
  bool constant = !brs.empty();
  for (const auto& [seed, counts] : brs) constant &= counts.size() == 1;
  os << ", spearman " << fmt(rho) << ", BRS recommendations constant per seed: " << (constant ? "yes" : "no");
  return {rho <= 0.0 && constant, os.str()};
}

Outcome full_coverage_ablation(std::size_t jobs) {
  const auto cfg = preset("fig5-checkers");
  const auto res = sweep_alpha(cfg, cfg.sweep.alphas, cfg.sweep.seeds, jobs);
  keep(res.records);
  if (!res.failures.empty()) return {false, "failed cell: " + res.failures.front()};
  const std::size_t n_test = cfg.dataset.n_test;
  bool full = true;
  for (const auto& r : res.records) {
    if (r.mode == "FULL_COVERAGE_TR") full &= r.recommendations == n_test;
  }
  auto ttl = group(res.records, [](const auto& r) { return r.ttl; });
  const double tr = mean(ttl[{"NEUTRAL", "TEAMRULES", 0.8}]);
  const double fc = mean(ttl[{"NEUTRAL", "FULL_COVERAGE_TR", 0.8}]);
  return {full && tr <= fc, std::string("FC_TR always recommends: ") + (full ? "yes" : "no") + ", alpha 0.8 TR " +
                                fmt(tr) + " vs FC_TR " + fmt(fc)};
}

Outcome discretion_degradation(std::size_t jobs) {
  const auto cfg = preset("fig3-checkers");
  const auto& seeds = cfg.sweep.seeds;
  std::vector<CellResult> oracle(seeds.size()), coin(seeds.size());
  std::vector<std::string> errors(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t s) {
    try {
      const auto sc = prepare_scenario(cfg, AdbMode::Neutral, seeds[s]);
      oracle[s] = run_cell(cfg, sc, Cell{Mode::TeamRules, 0.3, DiscretionKind::Oracle, 0});
      coin[s] = run_cell(cfg, sc, Cell{Mode::TeamRules, 0.3, DiscretionKind::Coin, 0});
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  });
  for (const auto& e : errors) {
    if (!e.empty()) return {false, e};
  }
  std::vector<double> a, b;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    a.push_back(oracle[s].record.ttl);
    b.push_back(coin[s].record.ttl);
    g_records.push_back(oracle[s].record);
    g_records.push_back(coin[s].record);
  }
  const double p = paired_ttest(a, b);
  return {mean(a) <= mean(b) && p < 0.1,
          "oracle " + fmt(mean(a)) + " vs coin " + fmt(mean(b)) + ", one-sided paired p " + fmt(p)};
}

// Cost of the empty rule set under each mode's own objective.
double empty_set_cost(const TeamContext& ctx, Mode mode) {
  std::size_t ones = 0;
  for (auto y : ctx.labels) ones += y;
  const Label d = 2 * ones >= ctx.rows() ? 1 : 0;
  double total = 0;
  for (std::size_t i = 0; i < ctx.rows(); ++i) {
    const Label y = ctx.labels[i], h = ctx.human[i];
    const double p = ctx.accept_weights[i];
    switch (mode) {
      case Mode::TeamRules: total += y != h ? p : 0.0; break;
      case Mode::HyrsAdapted: total += y != h ? 1.0 : 0.0; break;
      case Mode::BrsLike: total += y != d ? 1.0 : 0.0; break;
      case Mode::FullCoverageTr: total += (y != d ? p : 0.0) + (h != d ? ctx.alpha : 0.0); break;
    }
  }
  return total;
}

Outcome annealing() {
  Rng rng(8008);
  std::size_t trace_bad = 0, above_empty = 0, nondeterministic = 0;
  const Mode modes[] = {Mode::TeamRules, Mode::HyrsAdapted, Mode::BrsLike, Mode::FullCoverageTr};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 30 + rng.below(170);
    auto data = random_binary(n, 3 + rng.below(4), rng);
    std::vector<Label> human(n);
    std::vector<double> p(n);
    const double skill = 0.5 + 0.4 * rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      human[i] = rng.uniform() < skill ? data->labels[i] : 1 - data->labels[i];
      p[i] = rng.coin() ? 1.0 : rng.uniform();
    }
    const auto ctx = make_context(data, human, p, rng.uniform());
    SearchConfig sc;
    sc.iterations = 100 + rng.below(400);
    sc.alpha = ctx.alpha;
    sc.seed = rng.below(1u << 30);
    sc.max_rule_length = 1 + rng.below(3);
    sc.mode = modes[trial % 4];
    const auto pool = mine_candidates(*data, sc.mining());
    const auto r1 = fit(ctx, pool, sc);
    const auto r2 = fit(ctx, pool, sc);
    for (std::size_t t = 1; t < r1.loss_trace.size(); ++t) {
      if (r1.loss_trace[t] > r1.loss_trace[t - 1]) {
        ++trace_bad;
        break;
      }
    }
    if (r1.best_training_loss.total > empty_set_cost(ctx, sc.mode)) ++above_empty;
    if (to_json(r1, *data).dump() != to_json(r2, *data).dump()) ++nondeterministic;
  }
  std::ostringstream os;
  os << trace_bad << " non-monotone traces, " << above_empty << " fits above the empty set, " << nondeterministic
     << " non-identical reruns (100 fits)";
  return {trace_bad == 0 && above_empty == 0 && nondeterministic == 0, os.str()};
}

Outcome metrics_identity() {
  std::size_t bad = 0;
  for (const auto& r : g_records) bad += r.ttl != r.tdl + r.cl;
  if (g_records.empty()) return {false, "no records"};
  // Emitted files must read back with the identity intact.
  const std::string path = "acceptance_out/records.csv";
  std::filesystem::create_directories("acceptance_out");
  emit_results(g_records, path, nlohmann::json{{"source", "acceptance"}});
  const auto back = read_results(path);
  std::size_t bad_back = back.size() == g_records.size() ? 0 : 1;
  for (std::size_t i = 0; i < back.size() && i < g_records.size(); ++i) {
    bad_back += back[i].ttl != back[i].tdl + back[i].cl || back[i].ttl != g_records[i].ttl;
  }
  return {bad == 0 && bad_back == 0, std::to_string(g_records.size()) + " records, " + std::to_string(bad) +
                                          " violate TTL = TDL + CL, " + std::to_string(bad_back) +
                                          " differ after a CSV round trip"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::size_t jobs = 0;
  std::vector<int> expect_fail;
  std::vector<int> only;
  app.add_option("--jobs", jobs, "Parallel scenarios (0 = all cores)");
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail; exit 0 only if exactly these fail");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    std::string name;
    double budget_s;  // 0: no time limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "closed-form objective equals the decision process", 5, closed_form},
      {2, "fpgrowth equals exhaustive enumeration", 30, fpgrowth_oracle},
      {3, "table 1 checkers block", 300, [&] { return table1(jobs); }},
      {4, "alpha = 1 shuts advice down", 0, [&] { return alpha_one(jobs); }},
      {5, "contradictions fall with alpha", 0, [&] { return cost_sweep(jobs); }},
      {6, "full-coverage ablation", 0, [&] { return full_coverage_ablation(jobs); }},
      {7, "oracle discretion beats a coin", 0, [&] { return discretion_degradation(jobs); }},
      {8, "annealing invariants", 120, annealing},
      {9, "TTL = TDL + CL on every record", 0, metrics_identity},
  };

  std::set<int> failed;
  std::size_t ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end() && c.id != 9) continue;
    ++ran;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    std::string timing = fmt(secs) + "s";
    if (c.budget_s > 0) {
      const bool in_time = secs < c.budget_s;
      timing += in_time ? "" : " [x] over the " + std::to_string(static_cast<int>(c.budget_s)) + "s budget";
      out.pass &= in_time;
    }
    if (!out.pass) failed.insert(c.id);
    std::printf("%s criterion %d: %s (%s) %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), timing.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
  }

  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  std::set<int> ran_expected;
  for (int id : expected) {
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) ran_expected.insert(id);
  }
  std::printf("%zu of %zu criteria failed", failed.size(), ran);
  if (!ran_expected.empty()) std::printf(" (expected to fail: %zu)", ran_expected.size());
  std::printf("\n");
  return failed == ran_expected ? 0 : 1;
}
