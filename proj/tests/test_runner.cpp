#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "misim/errors.hpp"
#include "misim/json_io.hpp"
#include "misim/runner.hpp"

using namespace misim;

namespace {

RunManifest smoke_manifest(int k_reps, int m, const std::string& out_dir) {
  RunManifest manifest = basic_manifest();
  manifest.scenario.k_reps = k_reps;
  manifest.scenario.m = m;
  manifest.imputation.m = m;
  manifest.scenario.calibration_n = 50000;
  manifest.output_dir = out_dir;
  return manifest;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("smoke run produces the four CSVs with expected row counts") {
  const std::string dir = "runner_smoke_out";
  RunManifest manifest = smoke_manifest(10, 4, dir);
  const ScenarioOutputs out = run_scenario(manifest);
  write_outputs(manifest, out);

  const int n_strategies = static_cast<int>(manifest.strategies.size());
  CHECK(static_cast<int>(out.results.size()) == 10 * n_strategies * 2);

  const std::string results = slurp(std::filesystem::path(dir) / "results.csv");
  CHECK(count_lines(results) == 1 + 10 * n_strategies * 2);
  const std::string summary = slurp(std::filesystem::path(dir) / "summary.csv");
  CHECK(count_lines(summary) == 1 + n_strategies * 2);
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "selection.csv"));
  const std::string plot = slurp(std::filesystem::path(dir) / "plotdata.csv");
  CHECK(count_lines(plot) == 1 + n_strategies * 2 * 2);

  CHECK(out.mean_missing_fraction > 0.1);
  CHECK(out.mean_missing_fraction < 0.3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical manifests give byte-identical outputs at any thread count") {
  const std::string dir_a = "runner_det_a";
  const std::string dir_b = "runner_det_b";
  RunManifest a = smoke_manifest(6, 3, dir_a);
  a.threads = 1;
  RunManifest b = smoke_manifest(6, 3, dir_b);
  b.threads = 3;
  write_outputs(a, run_scenario(a));
  write_outputs(b, run_scenario(b));
  for (const char* file :
       {"results.csv", "summary.csv", "selection.csv", "plotdata.csv"}) {
    CHECK(slurp(std::filesystem::path(dir_a) / file) ==
          slurp(std::filesystem::path(dir_b) / file));
  }
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("strategies are paired: removing one never changes another") {
  RunManifest both = smoke_manifest(4, 3, "unused");
  both.strategies = {strategy_spec(StrategyKind::CCA),
                     strategy_spec(StrategyKind::Full)};
  RunManifest only = smoke_manifest(4, 3, "unused");
  only.strategies = {strategy_spec(StrategyKind::Full)};

  const ScenarioOutputs out_both = run_scenario(both);
  const ScenarioOutputs out_only = run_scenario(only);

  std::vector<RepResult> full_both, full_only;
  for (const RepResult& r : out_both.results) {
    if (r.strategy == "full") full_both.push_back(r);
  }
  for (const RepResult& r : out_only.results) {
    if (r.strategy == "full") full_only.push_back(r);
  }
  REQUIRE(full_both.size() == full_only.size());
  for (std::size_t i = 0; i < full_both.size(); ++i) {
    CHECK(full_both[i].estimate == full_only[i].estimate);
    CHECK(full_both[i].model_se == full_only[i].model_se);
    CHECK(full_both[i].ci_low == full_only[i].ci_low);
  }
}

TEST_CASE("stream ids separate phases, strategies and replicates") {
  const auto base = stream_id_for("basic", "full", 3, "impute");
  CHECK(base != stream_id_for("basic", "full", 3, "select"));
  CHECK(base != stream_id_for("basic", "lasso", 3, "impute"));
  CHECK(base != stream_id_for("basic", "full", 4, "impute"));
  CHECK(base != stream_id_for("extreme", "full", 3, "impute"));
  CHECK(base == stream_id_for("basic", "full", 3, "impute"));
}

TEST_CASE("manifest json round trip preserves the scenario") {
  RunManifest manifest = smoke_manifest(7, 5, "roundtrip_out");
  const std::string text = manifest_to_json_text(manifest);
  const RunManifest back = manifest_from_json_text(text);
  CHECK(back.scenario.name == manifest.scenario.name);
  CHECK(back.scenario.n == manifest.scenario.n);
  CHECK(back.scenario.p == manifest.scenario.p);
  CHECK(back.scenario.k_reps == 7);
  CHECK(back.scenario.m == 5);
  CHECK(back.strategies.size() == manifest.strategies.size());
  CHECK(back.scenario.master_seed == manifest.scenario.master_seed);
  REQUIRE(back.scenario.beta_a.has_value());
  CHECK(((*back.scenario.beta_a) - (*manifest.scenario.beta_a))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("malformed manifests are configuration errors") {
  CHECK_THROWS_AS(manifest_from_json_text("not json"), ConfigError);
  CHECK_THROWS_AS(manifest_from_json_text("{}"), ConfigError);
  CHECK_THROWS_AS(
      manifest_from_json_text(
          R"({"scenario": {"name": "x", "n": 10, "p": 2}, "strategies": []})"),
      ConfigError);
  CHECK_THROWS_AS(
      manifest_from_json_text(
          R"({"scenario": {"name": "x", "n": 10, "p": 2},
              "strategies": ["no-such-strategy"]})"),
      ConfigError);
}

TEST_CASE("preset manifests are self-consistent") {
  for (const RunManifest& manifest :
       {basic_manifest(), extreme_manifest()}) {
    CHECK(manifest.strategies.size() == 10);
    const ScenarioConfig derived = derive_generative_params(manifest.scenario);
    CHECK(*derived.sigma_eps > 0.0);
  }
}
