#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "misim/datagen.hpp"
#include "misim/impute.hpp"
#include "misim/metrics.hpp"
#include "misim/select.hpp"

namespace misim {

struct RunManifest {
  ScenarioConfig scenario;
  std::vector<StrategySpec> strategies;
  ImputationModelSpec imputation;
  std::string output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency
  bool verbose_traces = false;
};

/// Per-strategy selection frequencies across replicates.
struct SelectionStats {
  Eigen::VectorXd freq;       // length p, fraction of reps selecting A_i
  double mean_total = 0.0;    // mean number selected per replicate
};

struct ScenarioOutputs {
  ScenarioConfig scenario;  // derived parameters and calibrated gamma0
  std::vector<RepResult> results;  // rep-major, strategy order as manifest
  std::vector<PerformanceSummary> summaries;
  std::map<std::string, SelectionStats> selection;  // by strategy label
  std::vector<std::vector<TraceRecord>> traces;  // rep-major when verbose
  std::vector<std::string> trace_names;          // parallel to traces
  double mean_missing_fraction = 0.0;
};

/// Stream id for one (scenario, strategy, replicate, phase) cell; the
/// generation and missingness phases use an empty strategy label so every
/// strategy sees the same dataset, and per-strategy ids are independent of
/// the manifest's strategy list.
std::uint64_t stream_id_for(const std::string& scenario_name,
                            const std::string& strategy_label,
                            std::uint64_t rep_id, const std::string& phase);

/// Derive generative parameters and calibrate gamma0 if absent.
ScenarioConfig prepare_scenario(const ScenarioConfig& config);

/// Run every replicate x strategy cell (replicates in parallel, results
/// buffered in rep order so output is identical for any thread count).
ScenarioOutputs run_scenario(const RunManifest& manifest);

/// Write results.csv, summary.csv, selection.csv and plotdata.csv (plus
/// per-replicate trace CSVs when verbose) under manifest.output_dir.
void write_outputs(const RunManifest& manifest, const ScenarioOutputs& out);

}  // namespace misim
