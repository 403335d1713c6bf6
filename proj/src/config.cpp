#include "teamrules/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

namespace teamrules {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads fields of one config section, reporting errors by dotted path and
// rejecting keys that are never read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& field) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      j_.at(key).get_to(field);
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const char* key) const { return j_.at(key); }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where(key) + " is not a known field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
auto rethrow_at(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json regions_to_json(const std::vector<AccuracyRegion>& regions) {
  BehaviorSpec spec;
  spec.accuracy_regions = regions;
  return to_json(spec).at("accuracy_regions");
}

std::vector<AccuracyRegion> regions_from_json(const json& arr) {
  if (arr.is_array() && arr.empty()) return {};
  return behavior_from_json(json{{"accuracy_regions", arr}, {"adb_mode", "RATIONAL"}}).accuracy_regions;
}

json bands_to_json(const std::vector<ConfidenceBand>& bands) {
  json arr = json::array();
  for (const auto& b : bands) {
    json e = {{"lo", b.lo}, {"hi", b.hi}};
    e["accuracy"] = b.accuracy ? json(*b.accuracy) : json("follow_model");
    arr.push_back(std::move(e));
  }
  return arr;
}

std::vector<ConfidenceBand> bands_from_json(const json& arr) {
  if (!arr.is_array()) throw ConfigError("bands must be an array");
  std::vector<ConfidenceBand> out;
  for (const auto& e : arr) {
    ConfidenceBand b;
    b.lo = e.at("lo").get<double>();
    b.hi = e.at("hi").get<double>();
    if (e.contains("accuracy") && e.at("accuracy").is_number()) b.accuracy = e.at("accuracy").get<double>();
    out.push_back(b);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
  ExperimentConfig cfg;
  Section top(j, "");
  top.read("name", cfg.name);

  if (top.has("dataset")) {
    Section s(j.at("dataset"), "dataset");
    s.read("name", cfg.dataset.name);
    s.read("id", cfg.dataset.id);
    s.read("n_train", cfg.dataset.n_train);
    s.read("n_test", cfg.dataset.n_test);
    s.read("path", cfg.dataset.path);
    s.read("label_column", cfg.dataset.label_column);
    s.read("train_fraction", cfg.dataset.train_fraction);
    s.read("bins", cfg.dataset.bins);
    s.read("candidate_source", cfg.dataset.candidate_source);
    s.read("forest_trees", cfg.dataset.forest_trees);
    s.finish();
  }
  if (cfg.dataset.name == "csv" && !cfg.dataset.path.empty() && !base_dir.empty() &&
      fs::path(cfg.dataset.path).is_relative()) {
    cfg.dataset.path = (fs::path(base_dir) / cfg.dataset.path).lexically_normal().string();
  }

  if (top.has("human")) {
    Section s(j.at("human"), "human");
    if (s.has("adb_modes")) {
      cfg.human.adb_modes.clear();
      rethrow_at("human.adb_modes", [&] {
        for (const auto& m : s.at("adb_modes")) cfg.human.adb_modes.push_back(adb_mode_from_string(m.get<std::string>()));
      });
    }
    if (s.has("accuracy_regions")) {
      cfg.human.accuracy_regions = rethrow_at("human.accuracy_regions", [&] { return regions_from_json(s.at("accuracy_regions")); });
    }
    if (s.has("neutral_region")) {
      cfg.human.neutral_region = rethrow_at("human.neutral_region", [&] { return condition_from_json(s.at("neutral_region")); });
    }
    s.read("surrogate_holdout", cfg.human.surrogate_holdout);
    if (s.has("bands")) cfg.human.bands = rethrow_at("human.bands", [&] { return bands_from_json(s.at("bands")); });
    s.finish();
  }

  if (top.has("discretion")) {
    Section s(j.at("discretion"), "discretion");
    if (s.has("kind")) {
      const auto k = s.at("kind").get<std::string>();
      if (k == "oracle") cfg.discretion.kind = DiscretionKind::Oracle;
      else if (k == "learned") cfg.discretion.kind = DiscretionKind::Learned;
      else if (k == "coin") cfg.discretion.kind = DiscretionKind::Coin;
      else throw ConfigError("discretion.kind must be oracle, learned or coin");
    }
    if (s.has("classifier")) {
      cfg.discretion.classifier =
          rethrow_at("discretion.classifier", [&] { return classifier_from_string(s.at("classifier").get<std::string>()); });
    }
    s.read("subset_sizes", cfg.discretion.subset_sizes);
    s.read("include_oracle", cfg.discretion.include_oracle);
    s.read("include_coin", cfg.discretion.include_coin);
    s.finish();
  }

  SearchConfig base;
  base.max_rule_length = cfg.dataset.name == "checkers" ? 1 : 3;
  cfg.search = top.has("search") ? rethrow_at("search", [&] { return search_config_from_json(j.at("search"), base); }) : base;

  if (top.has("sweep")) {
    Section s(j.at("sweep"), "sweep");
    s.read("alphas", cfg.sweep.alphas);
    s.read("seeds", cfg.sweep.seeds);
    if (s.has("modes")) {
      cfg.sweep.modes.clear();
      rethrow_at("sweep.modes", [&] {
        for (const auto& m : s.at("modes")) cfg.sweep.modes.push_back(mode_from_string(m.get<std::string>()));
      });
    }
    s.read("include_human", cfg.sweep.include_human);
    s.finish();
  }

  if (top.has("evaluation")) {
    Section s(j.at("evaluation"), "evaluation");
    s.read("cl_on_acceptance", cfg.evaluation.cl_on_acceptance);
    s.read("record_wall_time", cfg.evaluation.record_wall_time);
    s.finish();
  }

  if (top.has("output")) {
    Section s(j.at("output"), "output");
    s.read("dir", cfg.output.dir);
    s.read("prefix", cfg.output.prefix);
    s.finish();
  }
  top.finish();

  // Dataset-specific defaults, resolved here so the dump shows them.
  if (cfg.dataset.name == "checkers") {
    if (cfg.human.accuracy_regions.empty()) cfg.human.accuracy_regions = checkers_behavior(AdbMode::Rational).accuracy_regions;
    if (!cfg.human.neutral_region) cfg.human.neutral_region = checkers_behavior(AdbMode::Neutral).neutral_region;
  } else if (cfg.dataset.name == "gaussian") {
    if (!cfg.human.neutral_region) cfg.human.neutral_region = Condition::feature_sum({}, CompareOp::LT, 0.0);
  }
  if (cfg.output.prefix.empty()) cfg.output.prefix = cfg.name;

  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  const auto& d = dataset;
  if (d.name != "checkers" && d.name != "gaussian" && d.name != "csv") {
    throw ConfigError("dataset.name must be checkers, gaussian or csv");
  }
  if (d.name == "csv") {
    if (d.path.empty()) throw ConfigError("dataset.path is required for csv datasets");
    if (!(d.train_fraction > 0.0 && d.train_fraction < 1.0)) throw ConfigError("dataset.train_fraction must be in (0, 1)");
  } else {
    if (d.n_train < 2) throw ConfigError("dataset.n_train must be >= 2");
    if (d.n_test < 1) throw ConfigError("dataset.n_test must be >= 1");
  }
  if (d.bins < 0) throw ConfigError("dataset.bins must be >= 1 (0 for the default)");
  if (d.candidate_source != "fpgrowth" && d.candidate_source != "forest") {
    throw ConfigError("dataset.candidate_source must be fpgrowth or forest");
  }
  if (d.forest_trees < 1) throw ConfigError("dataset.forest_trees must be >= 1");

  if (human.adb_modes.empty()) throw ConfigError("human.adb_modes must not be empty");
  for (auto m : human.adb_modes) {
    if (m == AdbMode::Neutral && !human.neutral_region) {
      throw ConfigError("human.neutral_region is required for NEUTRAL on dataset " + d.name);
    }
  }
  if (d.name == "checkers" && human.accuracy_regions.empty()) throw ConfigError("human.accuracy_regions must not be empty");
  if (!(human.surrogate_holdout > 0.0 && human.surrogate_holdout < 1.0)) {
    throw ConfigError("human.surrogate_holdout must be in (0, 1)");
  }
  for (auto s : discretion.subset_sizes) {
    if (s < 1) throw ConfigError("discretion.subset_sizes entries must be >= 1");
  }

  search.validate();
  if (sweep.alphas.empty()) throw ConfigError("sweep.alphas must not be empty");
  for (double a : sweep.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("sweep.alphas entries must be in [0, 1]");
  }
  if (sweep.seeds.empty()) throw ConfigError("sweep.seeds must not be empty");
  if (sweep.modes.empty()) throw ConfigError("sweep.modes must not be empty");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, fs::path(path).parent_path().string());
}

json to_json(const ExperimentConfig& cfg) {
  json adb = json::array();
  for (auto m : cfg.human.adb_modes) adb.push_back(to_string(m));
  json modes = json::array();
  for (auto m : cfg.sweep.modes) modes.push_back(to_string(m));
  const char* kind = cfg.discretion.kind == DiscretionKind::Oracle    ? "oracle"
                     : cfg.discretion.kind == DiscretionKind::Learned ? "learned"
                                                                      : "coin";
  json human = {{"adb_modes", adb},
                {"accuracy_regions", regions_to_json(cfg.human.accuracy_regions)},
                {"surrogate_holdout", cfg.human.surrogate_holdout},
                {"bands", bands_to_json(cfg.human.bands)}};
  if (cfg.human.neutral_region) human["neutral_region"] = to_json(*cfg.human.neutral_region);
  json dataset = {{"name", cfg.dataset.name},
                  {"id", cfg.dataset_id()},
                  {"n_train", cfg.dataset.n_train},
                  {"n_test", cfg.dataset.n_test},
                  {"train_fraction", cfg.dataset.train_fraction},
                  {"bins", cfg.bins()},
                  {"candidate_source", cfg.dataset.candidate_source},
                  {"forest_trees", cfg.dataset.forest_trees}};
  if (cfg.dataset.name == "csv") {
    dataset["path"] = cfg.dataset.path;
    dataset["label_column"] = cfg.dataset.label_column;
  }
  return json{
      {"name", cfg.name},
      {"dataset", dataset},
      {"human", human},
      {"discretion",
       {{"kind", kind},
        {"classifier", cfg.discretion.classifier == ClassifierKind::BoostedStumps ? "boosted_stumps" : "linear_logistic"},
        {"subset_sizes", cfg.discretion.subset_sizes},
        {"include_oracle", cfg.discretion.include_oracle},
        {"include_coin", cfg.discretion.include_coin}}},
      {"search", to_json(cfg.search)},
      {"sweep",
       {{"alphas", cfg.sweep.alphas},
        {"seeds", cfg.sweep.seeds},
        {"modes", modes},
        {"include_human", cfg.sweep.include_human}}},
      {"evaluation",
       {{"cl_on_acceptance", cfg.evaluation.cl_on_acceptance}, {"record_wall_time", cfg.evaluation.record_wall_time}}},
      {"output", {{"dir", cfg.output.dir}, {"prefix", cfg.output.prefix}}}};
}

std::string preset_path(const std::string& name) {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("TEAMRULES_PRESET_DIR")) dirs.emplace_back(env);
  dirs.emplace_back("presets");
#ifdef TEAMRULES_PRESET_DIR
  dirs.emplace_back(TEAMRULES_PRESET_DIR);
#endif
  for (const auto& d : dirs) {
    const fs::path p = d / (name + ".json");
    if (fs::exists(p)) return p.string();
  }
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace teamrules
