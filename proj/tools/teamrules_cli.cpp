// Command-line front end: gen, fit, sweep, report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "teamrules/config.hpp"
#include "teamrules/evalharness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace teamrules;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kConfig = 2;
constexpr int kRuntime = 3;

struct Common {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 0;
  bool timing = false;
  bool print_config = false;
};

ExperimentConfig resolve(const Common& c) {
  if (c.config.empty() == c.preset.empty()) throw ConfigError("give exactly one of --config or --preset");
  ExperimentConfig cfg = load_config(c.config.empty() ? preset_path(c.preset) : c.config);
  if (c.seed) cfg.sweep.seeds = {*c.seed};
  if (!c.out.empty()) cfg.output.dir = c.out;
  if (c.timing) cfg.evaluation.record_wall_time = true;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

int cmd_gen(const std::string& dataset, std::size_t n, std::uint64_t seed, const std::string& out) {
  if (n == 0) throw ConfigError("--n must be >= 1");
  RawDataset raw;
  if (dataset == "checkers") {
    raw = gen_checkers(n, seed);
  } else if (dataset == "gaussian") {
    raw = gen_gaussian(n, seed);
  } else {
    throw ConfigError("unknown dataset '" + dataset + "' (expected checkers or gaussian)");
  }
  const std::string path = out.empty() ? dataset + "_" + std::to_string(seed) + ".csv" : out;
  if (!fs::path(path).parent_path().empty()) fs::create_directories(fs::path(path).parent_path());
  write_csv(raw, path);
  fs::path meta(path);
  meta.replace_extension(".json");
  write_text(meta, json{{"dataset", dataset}, {"n", n}, {"seed", seed}, {"csv", fs::path(path).filename().string()}}.dump(2) + "\n");
  std::cout << "wrote " << raw.rows() << " rows to " << path << '\n';
  return kOk;
}

int cmd_fit(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  if (c.print_config) std::cout << to_json(cfg).dump(2) << '\n';
  const AdbMode adb = cfg.human.adb_modes.front();
  const std::uint64_t seed = cfg.sweep.seeds.front();
  const Scenario sc = prepare_scenario(cfg, adb, seed);
  for (const auto& w : sc.warnings) std::cerr << "warning: " << w << '\n';

  Cell cell;
  cell.mode = cfg.sweep.modes.front();
  cell.alpha = cfg.sweep.alphas.front();
  cell.discretion = cfg.discretion.kind;
  if (cell.discretion == DiscretionKind::Learned) {
    if (cfg.discretion.subset_sizes.empty()) throw ConfigError("discretion.subset_sizes is required for learned discretion");
    cell.subset_size = cfg.discretion.subset_sizes.front();
  }
  const CellResult result = run_cell(cfg, sc, cell);

  const fs::path dir(cfg.output.dir);
  const std::string stem = cfg.output.prefix;
  const std::string rules = to_text(result.fit.rule_set, *sc.train);
  write_text(dir / (stem + "_rules.txt"), rules);
  json fit_json = to_json(result.fit, *sc.train);
  write_text(dir / (stem + "_fit.json"), fit_json.dump(2) + "\n");
  write_text(dir / (stem + "_config.json"), to_json(cfg).dump(2) + "\n");
  emit_results({result.record}, (dir / (stem + "_record.csv")).string(),
               json{{"config", to_json(cfg)}, {"adb_mode", to_string(adb)}, {"seed", seed}});

  std::cout << "dataset " << sc.dataset_id << ", adb " << to_string(adb) << ", mode " << to_string(cell.mode)
            << ", alpha " << cell.alpha << ", seed " << seed << '\n';
  std::cout << "rules (" << result.fit.rule_set.size() << "):\n" << (rules.empty() ? "(none)\n" : rules);
  std::printf("training loss %.6g (decision %.6g, reconciliation %.6g)\n", result.fit.best_training_loss.total,
              result.fit.best_training_loss.decision_loss, result.fit.best_training_loss.reconciliation_loss);
  std::printf("test TTL %.4f  TDL %.4f  CL %.4f  contradictions %zu  recommendations %zu of %zu\n", result.record.ttl,
              result.record.tdl, result.record.cl, result.record.contradictions, result.record.recommendations,
              sc.test->rows());
  std::cout << "outputs in " << dir.string() << '\n';
  return kOk;
}

int cmd_sweep(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  if (c.print_config) std::cout << to_json(cfg).dump(2) << '\n';
  const bool discretion_sweep = !cfg.discretion.subset_sizes.empty();
  const SweepResult result = discretion_sweep
                                 ? sweep_discretion(cfg, cfg.discretion.subset_sizes, cfg.sweep.seeds, c.jobs)
                                 : sweep_alpha(cfg, cfg.sweep.alphas, cfg.sweep.seeds, c.jobs);
  const fs::path csv = fs::path(cfg.output.dir) / (cfg.output.prefix + ".csv");
  if (!result.records.empty()) {
    emit_results(result.records, csv.string(),
                 json{{"config", to_json(cfg)},
                      {"sweep", discretion_sweep ? "discretion" : "alpha"},
                      {"failures", result.failures},
                      {"columns",
                       "dataset, adb_mode, mode, alpha, seed, discretion_kind, discretion_train_size, "
                       "discretion_accuracy, tdl, cl, ttl, contradictions, recommendations, wall_time_ms"}});
    const std::string table = table1_summary(result.records);
    if (!table.empty()) std::cout << table << '\n';
    std::cout << sweep_summary(result.records);
    std::cout << result.records.size() << " records written to " << csv.string() << '\n';
  }
  for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
  if (!result.failures.empty()) {
    std::cerr << result.failures.size() << " cell(s) failed\n";
    return kRuntime;
  }
  return kOk;
}

int cmd_report(const std::string& path) {
  const auto records = read_results(path);
  if (records.empty()) throw DataError("'" + path + "' has no records");
  const std::string table = table1_summary(records);
  if (!table.empty()) std::cout << table << '\n';
  std::cout << sweep_summary(records);
  return kOk;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config (JSON)");
  cmd->add_option("--preset", c.preset, "Name of a shipped preset in presets/");
  cmd->add_option("--seed", c.seed, "Run only this seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--jobs", c.jobs, "Parallel cells (0 = all cores)");
  cmd->add_flag("--timing", c.timing, "Record wall time per cell (makes outputs non-reproducible)");
  cmd->add_flag("--print-config", c.print_config, "Print the resolved config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule-set advisors for human-AI teams"};
  app.require_subcommand(1);

  std::string gen_dataset;
  std::size_t gen_n = 4800;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
  gen->add_option("dataset", gen_dataset, "checkers or gaussian")->required();
  gen->add_option("--n", gen_n, "Number of rows");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output CSV path");

  Common fit_opts, sweep_opts;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one advisor and evaluate it on the test split");
  add_common(fit_cmd, fit_opts);
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an alpha or discretion sweep");
  add_common(sweep_cmd, sweep_opts);

  std::string report_path;
  auto* report = app.add_subcommand("report", "Summarize an existing results CSV");
  report->add_option("results", report_path, "Results CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_dataset, gen_n, gen_seed, gen_out);
    if (fit_cmd->parsed()) return cmd_fit(fit_opts);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts);
    if (report->parsed()) return cmd_report(report_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
