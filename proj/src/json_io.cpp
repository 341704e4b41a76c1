#include "misim/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "misim/errors.hpp"

namespace misim {

namespace {

using nlohmann::json;

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(j.size()));
  Eigen::Index k = 0;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(what + " must contain numbers");
    out[k++] = v.get<double>();
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::MatrixXd sigma_from_json(const json& j, Eigen::Index p,
                                const std::string& base_dir) {
  if (j.is_string()) {
    if (j.get<std::string>() == "identity") {
      return Eigen::MatrixXd::Identity(p, p);
    }
    throw ConfigError("sigma_a string form must be \"identity\"");
  }
  if (j.is_array()) {
    Eigen::MatrixXd out(p, p);
    if (static_cast<Eigen::Index>(j.size()) != p) {
      throw ConfigError("sigma_a matrix must have p rows");
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      const auto& row = j[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != p) {
        throw ConfigError("sigma_a matrix must be p x p");
      }
      for (Eigen::Index k = 0; k < p; ++k) {
        out(i, k) = row[static_cast<std::size_t>(k)].get<double>();
      }
    }
    return out;
  }
  if (j.is_object()) {
    if (j.contains("csv")) {
      const std::filesystem::path path(j.at("csv").get<std::string>());
      const auto resolved =
          path.is_absolute() ? path : std::filesystem::path(base_dir) / path;
      return load_corr_csv(resolved.string());
    }
    if (j.contains("blocks")) {
      const json& b = j.at("blocks");
      std::vector<int> sizes;
      for (const auto& s : b.at("sizes")) sizes.push_back(s.get<int>());
      return block_exchangeable_corr(sizes, b.at("within").get<double>());
    }
  }
  throw ConfigError("sigma_a must be \"identity\", a matrix, {\"csv\": ...} "
                    "or {\"blocks\": ...}");
}

ScenarioConfig scenario_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("scenario must be an object");
  ScenarioConfig cfg;
  try {
    cfg.name = j.at("name").get<std::string>();
    cfg.n = j.at("n").get<Eigen::Index>();
    cfg.p = j.at("p").get<Eigen::Index>();
    cfg.beta_x = j.value("beta_x", 0.3);
    if (j.contains("beta_a")) cfg.beta_a = vector_from_json(j["beta_a"], "beta_a");
    if (j.contains("target_corr")) {
      cfg.target_corr = vector_from_json(j["target_corr"], "target_corr");
    }
    cfg.sigma_a = j.contains("sigma_a")
                      ? sigma_from_json(j["sigma_a"], cfg.p, base_dir)
                      : Eigen::MatrixXd::Identity(cfg.p, cfg.p);
    cfg.gamma_a = j.contains("gamma_a")
                      ? vector_from_json(j["gamma_a"], "gamma_a")
                      : Eigen::VectorXd::Zero(cfg.p);
    if (j.contains("gamma0")) cfg.gamma0 = j["gamma0"].get<double>();
    cfg.target_miss = j.value("target_miss", 0.2);
    cfg.m = j.value("m", 20);
    cfg.k_reps = j.value("k_reps", 500);
    cfg.master_seed = j.value("master_seed", std::uint64_t{1});
    cfg.calibration_n = j.value("calibration_n", std::int64_t{1'000'000});
    cfg.calibration_seed =
        j.value("calibration_seed", ScenarioConfig{}.calibration_seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad scenario JSON: ") + e.what());
  }
  return cfg;
}

// Recognize a block-exchangeable matrix so presets emit the compact
// {"blocks": ...} form instead of a p x p array.
std::optional<json> detect_block_form(const Eigen::MatrixXd& s) {
  const Eigen::Index p = s.rows();
  std::vector<int> sizes;
  double within = 0.0;
  bool within_set = false;
  Eigen::Index i = 0;
  while (i < p) {
    Eigen::Index j = i + 1;
    while (j < p && s(i, j) != 0.0) ++j;
    sizes.push_back(static_cast<int>(j - i));
    if (j - i > 1) {
      if (!within_set) {
        within = s(i, i + 1);
        within_set = true;
      }
    }
    i = j;
  }
  if (!within_set) return std::nullopt;  // identity handled elsewhere
  // verify the candidate partition entry by entry
  Eigen::Index off = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
  for (int size : sizes) {
    ranges.emplace_back(off, off + size);
    off += size;
  }
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b) {
      bool same_block = false;
      for (const auto& [lo, hi] : ranges) {
        if (a >= lo && a < hi && b >= lo && b < hi) {
          same_block = true;
          break;
        }
      }
      const double expected = a == b ? 1.0 : (same_block ? within : 0.0);
      if (s(a, b) != expected) return std::nullopt;
    }
  }
  json out;
  out["blocks"] = {{"sizes", sizes}, {"within", within}};
  return out;
}

json scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["n"] = cfg.n;
  j["p"] = cfg.p;
  j["beta_x"] = cfg.beta_x;
  if (cfg.target_corr) {
    j["target_corr"] = vector_to_json(*cfg.target_corr);
  } else if (cfg.beta_a) {
    j["beta_a"] = vector_to_json(*cfg.beta_a);
  }
  if (cfg.sigma_a.isIdentity(0.0)) {
    j["sigma_a"] = "identity";
  } else if (const auto blocks = detect_block_form(cfg.sigma_a)) {
    j["sigma_a"] = *blocks;
  } else {
    json rows = json::array();
    for (Eigen::Index i = 0; i < cfg.sigma_a.rows(); ++i) {
      rows.push_back(vector_to_json(cfg.sigma_a.row(i)));
    }
    j["sigma_a"] = rows;
  }
  j["gamma_a"] = vector_to_json(cfg.gamma_a);
  if (cfg.gamma0) j["gamma0"] = *cfg.gamma0;
  j["target_miss"] = cfg.target_miss;
  j["m"] = cfg.m;
  j["k_reps"] = cfg.k_reps;
  j["master_seed"] = cfg.master_seed;
  j["calibration_n"] = cfg.calibration_n;
  j["calibration_seed"] = cfg.calibration_seed;
  return j;
}

StrategySpec strategy_from_json(const json& j) {
  if (j.is_string()) return strategy_spec(strategy_kind_from_label(j));
  if (!j.is_object() || !j.contains("kind")) {
    throw ConfigError("strategy entries must be a label or {\"kind\": ...}");
  }
  StrategySpec spec =
      strategy_spec(strategy_kind_from_label(j.at("kind").get<std::string>()));
  if (j.contains("cutoff")) spec.cutoff = j["cutoff"].get<double>();
  if (j.contains("variance_threshold")) {
    spec.variance_threshold = j["variance_threshold"].get<double>();
  }
  if (j.contains("alpha")) spec.alpha = j["alpha"].get<double>();
  if (j.contains("tau")) spec.tau = j["tau"].get<double>();
  if (j.contains("cv_folds")) spec.cv_folds = j["cv_folds"].get<int>();
  return spec;
}

json strategy_to_json(const StrategySpec& spec) {
  const StrategySpec defaults = strategy_spec(spec.kind);
  if (spec.cutoff == defaults.cutoff &&
      spec.variance_threshold == defaults.variance_threshold &&
      spec.alpha == defaults.alpha && spec.tau == defaults.tau &&
      spec.cv_folds == defaults.cv_folds) {
    return strategy_label(spec.kind);
  }
  json j;
  j["kind"] = strategy_label(spec.kind);
  j["cutoff"] = spec.cutoff;
  j["variance_threshold"] = spec.variance_threshold;
  j["alpha"] = spec.alpha;
  j["tau"] = spec.tau;
  j["cv_folds"] = spec.cv_folds;
  return j;
}

std::vector<StrategySpec> all_strategies() {
  std::vector<StrategySpec> out;
  for (StrategyKind kind :
       {StrategyKind::CCA, StrategyKind::Full, StrategyKind::QuickpredPt2,
        StrategyKind::QuickpredPt4, StrategyKind::PcAux, StrategyKind::Forward,
        StrategyKind::ForwardSw, StrategyKind::ForwardFMI, StrategyKind::Tests,
        StrategyKind::Lasso}) {
    out.push_back(strategy_spec(kind));
  }
  return out;
}

}  // namespace

RunManifest manifest_from_json_text(const std::string& text,
                                    const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("scenario")) {
    throw ConfigError("manifest must be an object with a \"scenario\"");
  }
  RunManifest m;
  m.scenario = scenario_from_json(j["scenario"], base_dir);
  if (!j.contains("strategies") || !j["strategies"].is_array() ||
      j["strategies"].empty()) {
    throw ConfigError("manifest needs a nonempty \"strategies\" array");
  }
  for (const auto& s : j["strategies"]) {
    m.strategies.push_back(strategy_from_json(s));
  }
  if (j.contains("imputation")) {
    const json& imp = j["imputation"];
    const std::string method = imp.value("method", "norm");
    if (method == "norm") {
      m.imputation.method = ImputeMethod::NormDraw;
    } else if (method == "pmm") {
      m.imputation.method = ImputeMethod::Pmm;
    } else {
      throw ConfigError("imputation method must be \"norm\" or \"pmm\"");
    }
    m.imputation.donors = imp.value("donors", 5);
    m.imputation.iterations = imp.value("iterations", 1);
  }
  m.imputation.m = m.scenario.m;
  m.output_dir = j.value("output_dir", std::string("out"));
  m.threads = j.value("threads", 0);
  m.verbose_traces = j.value("verbose_traces", false);
  return m;
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto base = std::filesystem::path(path).parent_path().string();
  return manifest_from_json_text(buf.str(), base.empty() ? "." : base);
}

std::string manifest_to_json_text(const RunManifest& manifest) {
  json j;
  j["scenario"] = scenario_to_json(manifest.scenario);
  json strategies = json::array();
  for (const StrategySpec& s : manifest.strategies) {
    strategies.push_back(strategy_to_json(s));
  }
  j["strategies"] = strategies;
  j["imputation"] = {
      {"method",
       manifest.imputation.method == ImputeMethod::NormDraw ? "norm" : "pmm"},
      {"donors", manifest.imputation.donors},
      {"iterations", manifest.imputation.iterations}};
  j["output_dir"] = manifest.output_dir;
  j["threads"] = manifest.threads;
  j["verbose_traces"] = manifest.verbose_traces;
  return j.dump(2) + "\n";
}

RunManifest basic_manifest() {
  RunManifest m;
  m.scenario = basic_preset();
  m.strategies = all_strategies();
  m.imputation.m = m.scenario.m;
  m.output_dir = "out/basic";
  return m;
}

RunManifest extreme_manifest() {
  RunManifest m;
  m.scenario = extreme_preset();
  m.strategies = all_strategies();
  m.imputation.m = m.scenario.m;
  m.output_dir = "out/extreme";
  return m;
}

RunManifest realistic_shaped_manifest() {
  RunManifest m;
  m.scenario = realistic_shaped_preset();
  m.strategies = all_strategies();
  m.imputation.m = m.scenario.m;
  m.output_dir = "out/realistic-shaped";
  return m;
}

}  // namespace misim
