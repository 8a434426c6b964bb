#include "nirs/manifest.hpp"

#include <fstream>
#include <set>

#include "nirs/error.hpp"

namespace nirs {

using nlohmann::json;

std::string_view to_string(SearchFamily f) {
  switch (f) {
    case SearchFamily::automatic: return "auto";
    case SearchFamily::linear: return "linear";
    case SearchFamily::tabular: return "tabular";
  }
  return "?";
}

SearchFamily parse_search_family(std::string_view s) {
  if (s == "auto") return SearchFamily::automatic;
  if (s == "linear") return SearchFamily::linear;
  if (s == "tabular") return SearchFamily::tabular;
  throw ConfigError("unknown search space family '" + std::string(s) + "'");
}

bool is_builtin_model(std::string_view id) { return id == "pls" || id == "plsda" || id == "ridge"; }

std::map<std::string, ExternalModelConfig> default_external_models() {
  std::map<std::string, ExternalModelConfig> out;
  ExternalModelConfig tabpfn;
  tabpfn.cv_params = {{"n_estimators", 1}};
  tabpfn.final_params = {{"n_estimators", 16}};
  out["tabpfn"] = tabpfn;
  ExternalModelConfig catboost;
  catboost.cv_params = {{"n_estimators", 200}};
  catboost.final_params = {{"n_estimators", 500}};
  out["catboost"] = catboost;
  return out;
}

void BenchmarkManifest::validate() const {
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (models.empty()) throw ConfigError("manifest lists no models");
  for (const auto& m : models)
    if (!is_builtin_model(m) && !external_models.contains(m))
      throw ConfigError("unknown model id '" + m + "'");
  std::set<std::string> names;
  for (const auto& d : datasets) {
    if (d.name.empty()) throw ConfigError("dataset without a name");
    if (!names.insert(d.name).second) throw ConfigError("duplicate dataset name '" + d.name + "'");
    if (d.database.empty()) throw ConfigError("dataset '" + d.name + "' has no database");
    if (!std::filesystem::exists(d.path))
      throw ConfigError("dataset '" + d.name + "': file not found: " + d.path.string());
  }
}

namespace {

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest field '") + key + "': " + e.what());
  }
}

std::vector<std::size_t> index_list(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw ConfigError(what + " must be an array of indices");
  std::vector<std::size_t> out;
  for (const auto& v : arr) {
    if (!v.is_number_unsigned()) throw ConfigError(what + " must hold non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

SplitSpec parse_split(const json& j, const std::filesystem::path& base, const std::string& ds_name) {
  if (!j.is_object()) throw ConfigError("dataset '" + ds_name + "': split must be an object");
  SplitSpec s;
  const std::string method = get_or<std::string>(j, "method", "");
  s.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (method == "predefined") {
    s.method = SplitMethod::predefined;
    if (j.contains("train")) s.train_indices = index_list(j["train"], ds_name + ".split.train");
    if (j.contains("test")) s.test_indices = index_list(j["test"], ds_name + ".split.test");
    try {
      if (j.contains("train_file"))
        s.train_indices = read_index_file(base / j["train_file"].get<std::string>());
      if (j.contains("test_file"))
        s.test_indices = read_index_file(base / j["test_file"].get<std::string>());
    } catch (const DataError& e) {
      throw ConfigError(std::string("dataset '") + ds_name + "': " + e.what());
    }
    if (s.train_indices.empty() || s.test_indices.empty())
      throw ConfigError("dataset '" + ds_name + "': predefined split needs train and test indices");
  } else if (method == "spxy" || method == "spxy_stratified") {
    s.method = method == "spxy" ? SplitMethod::spxy : SplitMethod::spxy_stratified;
    s.test_fraction = get_or<double>(j, "test_fraction", 0.25);
    if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0))
      throw ConfigError("dataset '" + ds_name + "': test_fraction must lie in (0,1)");
  } else {
    throw ConfigError("dataset '" + ds_name + "': split.method must be predefined, spxy or spxy_stratified");
  }
  return s;
}

std::vector<std::string> string_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(what + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

BenchmarkManifest parse_manifest(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("manifest must be a JSON object");
  BenchmarkManifest m;
  m.raw = doc;
  m.folds = get_or<int>(doc, "folds", 3);
  m.workers = get_or<int>(doc, "workers", 1);
  m.seed = get_or<std::uint64_t>(doc, "seed", 0);
  m.search_space = parse_search_family(get_or<std::string>(doc, "search_space", "auto"));
  if (doc.contains("models")) m.models = string_list(doc["models"], "models");

  m.external_models = default_external_models();
  if (doc.contains("external_models")) {
    const json& ext = doc["external_models"];
    if (!ext.is_object()) throw ConfigError("external_models must be an object");
    for (const auto& [id, cfg] : ext.items()) {
      if (is_builtin_model(id)) throw ConfigError("external model id '" + id + "' shadows a built-in");
      ExternalModelConfig c = m.external_models.contains(id) ? m.external_models[id] : ExternalModelConfig{};
      if (cfg.contains("command")) {
        c.command = string_list(cfg["command"], "external_models." + id + ".command");
        if (!c.command.empty()) {
          std::filesystem::path exe = c.command.front();
          if (exe.is_relative() && exe.has_parent_path()) c.command.front() = (base_dir / exe).string();
        }
      }
      if (cfg.contains("cv_params")) c.cv_params = cfg["cv_params"];
      if (cfg.contains("final_params")) c.final_params = cfg["final_params"];
      c.timeout_s = get_or<double>(cfg, "timeout_s", c.timeout_s);
      c.handshake_timeout_s = get_or<double>(cfg, "handshake_timeout_s", c.handshake_timeout_s);
      m.external_models[id] = c;
    }
  }

  if (!doc.contains("datasets") || !doc["datasets"].is_array())
    throw ConfigError("manifest needs a 'datasets' array");
  for (const auto& d : doc["datasets"]) {
    DatasetEntry e;
    e.name = get_or<std::string>(d, "name", "");
    e.database = get_or<std::string>(d, "database", e.name);
    try {
      e.task = parse_task(get_or<std::string>(d, "task", "regression"));
    } catch (const ConfigError& err) {
      throw ConfigError("dataset '" + e.name + "': " + err.what());
    }
    const std::string path = get_or<std::string>(d, "path", "");
    if (path.empty()) throw ConfigError("dataset '" + e.name + "' has no path");
    e.path = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base_dir / path;
    e.target = get_or<std::string>(d, "target", "y");
    if (!d.contains("split")) throw ConfigError("dataset '" + e.name + "' needs an explicit split");
    e.split = parse_split(d["split"], base_dir, e.name);
    m.datasets.push_back(std::move(e));
  }
  m.validate();
  return m;
}

BenchmarkManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  return parse_manifest(doc, path.parent_path());
}

BenchmarkSummary summarize_datasets(const std::vector<Dataset>& datasets) {
  if (datasets.empty()) throw DataError("no datasets");
  BenchmarkSummary s;
  s.datasets = datasets.size();
  std::set<std::string> dbs;
  std::vector<double> n_reg, p_reg, n_cls, p_cls;
  for (const auto& d : datasets) {
    dbs.insert(d.database);
    auto& ns = d.task == Task::regression ? n_reg : n_cls;
    auto& ps = d.task == Task::regression ? p_reg : p_cls;
    ns.push_back(static_cast<double>(d.n()));
    ps.push_back(static_cast<double>(d.p()));
  }
  s.databases = dbs.size();
  s.regression = {n_reg.size(), median(n_reg), median(p_reg)};
  s.classification = {n_cls.size(), median(n_cls), median(p_cls)};
  return s;
}

BenchmarkSummary summarize_benchmark(const BenchmarkManifest& manifest) {
  std::vector<Dataset> loaded;
  for (const auto& e : manifest.datasets) loaded.push_back(load_dataset(e));
  return summarize_datasets(loaded);
}

}  // namespace nirs
