// Python bindings. Configs and results cross the boundary as JSON text;
// the Python package turns them into dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "teamrules/config.hpp"
#include "teamrules/evalharness.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace teamrules;

namespace {

ExperimentConfig config_from(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, base_dir);
}

json record_json(const ExperimentRecord& r) {
  return {{"dataset", r.dataset},
          {"adb_mode", r.adb_mode},
          {"mode", r.mode},
          {"alpha", r.alpha},
          {"seed", r.seed},
          {"discretion_kind", r.discretion_kind},
          {"discretion_train_size", r.discretion_train_size},
          {"discretion_accuracy", r.discretion_accuracy},
          {"tdl", r.tdl},
          {"cl", r.cl},
          {"ttl", r.ttl},
          {"contradictions", r.contradictions},
          {"recommendations", r.recommendations},
          {"wall_time_ms", r.wall_time_ms}};
}

py::tuple generate(const std::string& dataset, std::size_t n, std::uint64_t seed) {
  RawDataset raw;
  if (dataset == "checkers") {
    raw = gen_checkers(n, seed);
  } else if (dataset == "gaussian") {
    raw = gen_gaussian(n, seed);
  } else {
    throw ConfigError("unknown dataset '" + dataset + "'");
  }
  py::array_t<double> x({raw.rows(), raw.cols()});
  std::copy(raw.values.begin(), raw.values.end(), x.mutable_data());
  py::array_t<std::uint8_t> y(raw.rows());
  std::copy(raw.labels.begin(), raw.labels.end(), y.mutable_data());
  return py::make_tuple(x, y, raw.feature_names);
}

std::string fit_json(const std::string& config, const std::string& base_dir) {
  const ExperimentConfig cfg = config_from(config, base_dir);
  Scenario sc;
  CellResult res;
  {
    py::gil_scoped_release release;
    sc = prepare_scenario(cfg, cfg.human.adb_modes.front(), cfg.sweep.seeds.front());
    Cell cell{cfg.sweep.modes.front(), cfg.sweep.alphas.front(), cfg.discretion.kind, 0};
    if (cell.discretion == DiscretionKind::Learned) {
      if (cfg.discretion.subset_sizes.empty()) throw ConfigError("discretion.subset_sizes is required");
      cell.subset_size = cfg.discretion.subset_sizes.front();
    }
    res = run_cell(cfg, sc, cell);
  }
  json out = to_json(res.fit, *sc.train);
  out["rules_text"] = to_text(res.fit.rule_set, *sc.train);
  out["record"] = record_json(res.record);
  out["training_loss"] = to_json(res.training_loss);
  out["warnings"] = sc.warnings;
  return out.dump();
}

std::string sweep_json(const std::string& config, const std::string& base_dir, std::size_t jobs) {
  const ExperimentConfig cfg = config_from(config, base_dir);
  SweepResult res;
  {
    py::gil_scoped_release release;
    res = cfg.discretion.subset_sizes.empty()
              ? sweep_alpha(cfg, cfg.sweep.alphas, cfg.sweep.seeds, jobs)
              : sweep_discretion(cfg, cfg.discretion.subset_sizes, cfg.sweep.seeds, jobs);
  }
  json records = json::array();
  for (const auto& r : res.records) records.push_back(record_json(r));
  return json{{"records", records}, {"failures", res.failures}}.dump();
}

std::string read_results_json(const std::string& path) {
  json records = json::array();
  for (const auto& r : read_results(path)) records.push_back(record_json(r));
  return records.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rule-set advisors for human-AI teams";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  m.def("resolve_config", [](const std::string& text, const std::string& base_dir) {
    return to_json(config_from(text, base_dir)).dump();
  }, py::arg("config"), py::arg("base_dir") = "");
  m.def("preset_path", &preset_path, py::arg("name"));
  m.def("generate", &generate, py::arg("dataset"), py::arg("n"), py::arg("seed"),
        "(X, y, feature_names) for checkers or gaussian data");
  m.def("fit", &fit_json, py::arg("config"), py::arg("base_dir") = "");
  m.def("sweep", &sweep_json, py::arg("config"), py::arg("base_dir") = "", py::arg("jobs") = 1);
  m.def("read_results", &read_results_json, py::arg("path"));
  m.def("paired_ttest", &paired_ttest, py::arg("a"), py::arg("b"));
  m.def("spearman", &spearman, py::arg("x"), py::arg("y"));
}
