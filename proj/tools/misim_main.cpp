#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "misim/errors.hpp"
#include "misim/json_io.hpp"
#include "misim/oracle.hpp"
#include "misim/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void emit_preset(const misim::RunManifest& manifest,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw misim::ConfigError("cannot write " + path.string());
  out << misim::manifest_to_json_text(manifest);
  std::cout << "wrote " << path.string() << "\n";
}

int run_command(const std::string& manifest_path, int threads, int k_reps,
                int m, const std::string& out_dir, bool verbose_traces) {
  misim::RunManifest manifest = misim::load_manifest(manifest_path);
  if (threads >= 0) manifest.threads = threads;
  if (k_reps > 0) manifest.scenario.k_reps = k_reps;
  if (m > 0) {
    manifest.scenario.m = m;
    manifest.imputation.m = m;
  }
  if (!out_dir.empty()) manifest.output_dir = out_dir;
  if (verbose_traces) manifest.verbose_traces = true;

  const misim::ScenarioOutputs outputs = misim::run_scenario(manifest);
  misim::write_outputs(manifest, outputs);
  std::cout << "scenario " << outputs.scenario.name << ": " << manifest.scenario.k_reps
            << " replicates x " << manifest.strategies.size() << " strategies, m="
            << manifest.imputation.m << "\n"
            << "mean missing fraction " << outputs.mean_missing_fraction << "\n"
            << "outputs in " << manifest.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"missing-data imputation strategy simulator"};
  app.require_subcommand(1);

  std::string manifest_path;
  int threads = -1;
  int k_reps = 0;
  int m = 0;
  std::string out_dir;
  bool verbose_traces = false;

  auto* run = app.add_subcommand("run", "run a scenario manifest end to end");
  run->add_option("manifest", manifest_path, "manifest JSON path")->required();
  run->add_option("--threads", threads, "worker threads (0 = auto)");
  run->add_option("--k-reps", k_reps, "override replicate count");
  run->add_option("--m", m, "override imputations per replicate");
  run->add_option("--out", out_dir, "override output directory");
  run->add_flag("--verbose-traces", verbose_traces,
                "write per-replicate selection traces");

  std::string preset_dir = ".";
  auto* presets = app.add_subcommand(
      "presets", "emit basic / extreme / realistic-shaped manifests");
  presets->add_option("--out", preset_dir, "directory for the manifests");

  std::string validate_path;
  auto* validate =
      app.add_subcommand("validate", "check a manifest without running it");
  validate->add_option("manifest", validate_path, "manifest JSON path")
      ->required();

  auto* oracle =
      app.add_subcommand("oracle", "run the independent oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) {
      return run_command(manifest_path, threads, k_reps, m, out_dir,
                         verbose_traces);
    }
    if (presets->parsed()) {
      const std::filesystem::path dir(preset_dir);
      std::filesystem::create_directories(dir);
      emit_preset(misim::basic_manifest(), dir / "basic.json");
      emit_preset(misim::extreme_manifest(), dir / "extreme.json");
      emit_preset(misim::realistic_shaped_manifest(),
                  dir / "realistic_shaped.json");
      return 0;
    }
    if (validate->parsed()) {
      misim::RunManifest manifest = misim::load_manifest(validate_path);
      misim::prepare_scenario(manifest.scenario);  // derives + calibrates
      std::cout << "ok: " << manifest.scenario.name << " (n="
                << manifest.scenario.n << ", p=" << manifest.scenario.p
                << ", " << manifest.strategies.size() << " strategies)\n";
      return 0;
    }
    if (oracle->parsed()) {
      bool all_pass = true;
      for (const misim::OracleCheck& check : misim::run_oracle_suite()) {
        std::printf("[%s] %s: %s\n", check.passed ? "PASS" : "FAIL",
                    check.name.c_str(), check.detail.c_str());
        all_pass = all_pass && check.passed;
      }
      return all_pass ? 0 : kExitRuntime;
    }
  } catch (const misim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const misim::InfeasibleCorrelationsError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
