#include "misim/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "misim/csv.hpp"
#include "misim/errors.hpp"

namespace misim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RepOut {
  double miss_frac = 0.0;
  std::vector<StrategyRun> runs;  // manifest strategy order
};

void append_u64(std::string& buf, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) buf.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

std::string corr_bucket(double corr) {
  const double a = std::fabs(corr);
  if (a < 0.1) return "[0,0.1)";
  if (a < 0.2) return "[0.1,0.2)";
  if (a < 0.4) return "[0.2,0.4)";
  return "[0.4,1]";
}

RepResult to_rep_result(int rep, const std::string& strategy,
                        const PooledEstimate& est, bool converged) {
  RepResult r;
  r.rep_id = rep;
  r.strategy = strategy;
  r.estimand = estimand_label(est.estimand);
  r.converged = converged;
  if (converged) {
    r.estimate = est.q_bar;
    r.model_se = std::sqrt(est.t_var);
    r.ci_low = est.ci_low;
    r.ci_high = est.ci_high;
  } else {
    r.estimate = r.model_se = r.ci_low = r.ci_high = kNaN;
  }
  return r;
}

}  // namespace

std::uint64_t stream_id_for(const std::string& scenario_name,
                            const std::string& strategy_label,
                            std::uint64_t rep_id, const std::string& phase) {
  std::string buf;
  buf.reserve(scenario_name.size() + strategy_label.size() + phase.size() + 11);
  buf += scenario_name;
  buf.push_back('\x1f');
  buf += strategy_label;
  buf.push_back('\x1f');
  append_u64(buf, rep_id);
  buf.push_back('\x1f');
  buf += phase;
  return mix64(fnv1a64(buf));
}

ScenarioConfig prepare_scenario(const ScenarioConfig& config) {
  ScenarioConfig cfg = derive_generative_params(config);
  if (!cfg.gamma0) cfg.gamma0 = calibrate_gamma0(cfg);
  return cfg;
}

ScenarioOutputs run_scenario(const RunManifest& manifest) {
  if (manifest.strategies.empty()) {
    throw ConfigError("manifest needs at least one strategy");
  }
  ScenarioOutputs out;
  out.scenario = prepare_scenario(manifest.scenario);
  const ScenarioConfig& cfg = out.scenario;
  const int k_reps = cfg.k_reps;
  if (k_reps < 1) throw ConfigError("k_reps must be >= 1");

  ImputationModelSpec model = manifest.imputation;
  model.m = model.m > 0 ? model.m : cfg.m;

  const auto n_strats = manifest.strategies.size();
  std::vector<std::string> labels(n_strats);
  for (std::size_t s = 0; s < n_strats; ++s) {
    labels[s] = strategy_label(manifest.strategies[s].kind);
  }

  std::vector<RepOut> reps(static_cast<std::size_t>(k_reps));
  std::atomic<int> next_rep{0};
  std::atomic<bool> failed{false};
  std::string failure_text;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    for (;;) {
      const int rep = next_rep.fetch_add(1);
      if (rep >= k_reps || failed.load()) break;
      try {
        RngStream gen_rng(cfg.master_seed,
                          stream_id_for(cfg.name, "", rep, "gen"));
        StudyData data = generate_complete(cfg, gen_rng);
        RngStream miss_rng(cfg.master_seed,
                           stream_id_for(cfg.name, "", rep, "miss"));
        impose_missingness(data, cfg, miss_rng);

        RepOut& slot = reps[static_cast<std::size_t>(rep)];
        slot.miss_frac = static_cast<double>(data.n_missing()) /
                         static_cast<double>(data.rows());
        slot.runs.reserve(n_strats);
        for (std::size_t s = 0; s < n_strats; ++s) {
          RngStream sel_rng(cfg.master_seed,
                            stream_id_for(cfg.name, labels[s], rep, "select"));
          RngStream imp_rng(cfg.master_seed,
                            stream_id_for(cfg.name, labels[s], rep, "impute"));
          slot.runs.push_back(run_strategy(data, manifest.strategies[s], model,
                                           sel_rng, imp_rng));
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure_text.empty()) failure_text = e.what();
      }
    }
  };

  int n_threads = manifest.threads > 0
                      ? manifest.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, k_reps));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) {
    throw std::runtime_error("replicate failed: " + failure_text);
  }

  // aggregation is single-threaded in rep order, so output never depends
  // on scheduling
  double miss_acc = 0.0;
  for (const RepOut& rep : reps) miss_acc += rep.miss_frac;
  out.mean_missing_fraction = miss_acc / static_cast<double>(k_reps);

  const Eigen::Index p = cfg.p;
  std::vector<Eigen::VectorXd> sel_freq(n_strats, Eigen::VectorXd::Zero(p));
  std::vector<double> sel_total(n_strats, 0.0);
  std::vector<long> sel_count(n_strats, 0);

  for (int rep = 0; rep < k_reps; ++rep) {
    const RepOut& slot = reps[static_cast<std::size_t>(rep)];
    for (std::size_t s = 0; s < n_strats; ++s) {
      const StrategyRun& run = slot.runs[s];
      out.results.push_back(
          to_rep_result(rep, labels[s], run.mean_y, run.converged));
      out.results.push_back(
          to_rep_result(rep, labels[s], run.beta_x, run.converged));
      if (run.converged && selects_variables(manifest.strategies[s].kind)) {
        for (Eigen::Index j : run.selection.selected_aux) sel_freq[s][j] += 1.0;
        sel_total[s] += static_cast<double>(run.selection.selected_aux.size());
        ++sel_count[s];
      }
      if (manifest.verbose_traces) {
        out.traces.push_back(run.selection.trace);
        out.trace_names.push_back("rep_" + std::to_string(rep) + "_" + labels[s]);
      }
    }
  }

  for (std::size_t s = 0; s < n_strats; ++s) {
    if (!selects_variables(manifest.strategies[s].kind)) continue;
    SelectionStats stats;
    const double denom = sel_count[s] > 0 ? static_cast<double>(sel_count[s]) : 1.0;
    stats.freq = sel_freq[s] / denom;
    stats.mean_total = sel_total[s] / denom;
    out.selection[labels[s]] = std::move(stats);
  }

  // summaries per (strategy, estimand); truth: mu_Y = 0, beta_X from config
  for (std::size_t s = 0; s < n_strats; ++s) {
    for (Estimand est : {Estimand::MeanY, Estimand::BetaX}) {
      const std::string elabel = estimand_label(est);
      std::vector<RepResult> cell;
      cell.reserve(static_cast<std::size_t>(k_reps));
      for (const RepResult& r : out.results) {
        if (r.strategy == labels[s] && r.estimand == elabel) cell.push_back(r);
      }
      const double truth = est == Estimand::MeanY ? 0.0 : cfg.beta_x;
      out.summaries.push_back(summarize(cell, truth));
    }
  }
  return out;
}

void write_outputs(const RunManifest& manifest, const ScenarioOutputs& out) {
  namespace fs = std::filesystem;
  const fs::path dir(manifest.output_dir);
  fs::create_directories(dir);

  {
    CsvWriter w((dir / "results.csv").string());
    w.row({"rep_id", "strategy", "estimand", "estimate", "model_se", "ci_low",
           "ci_high", "converged"});
    for (const RepResult& r : out.results) {
      w.row({std::to_string(r.rep_id), r.strategy, r.estimand,
             csv_num(r.estimate), csv_num(r.model_se), csv_num(r.ci_low),
             csv_num(r.ci_high), r.converged ? "1" : "0"});
    }
  }
  {
    CsvWriter w((dir / "summary.csv").string());
    w.row({"strategy", "estimand", "k_used", "bias", "bias_mcse", "emp_se",
           "emp_se_mcse", "mod_se", "mod_se_mcse", "coverage", "coverage_mcse",
           "std_bias_pct", "rel_bias_pct", "rel_mod_se_err_pct",
           "convergence_rate"});
    for (const PerformanceSummary& s : out.summaries) {
      w.row({s.strategy, s.estimand, std::to_string(s.k_used), csv_num(s.bias),
             csv_num(s.bias_mcse), csv_num(s.emp_se), csv_num(s.emp_se_mcse),
             csv_num(s.mod_se), csv_num(s.mod_se_mcse), csv_num(s.coverage),
             csv_num(s.coverage_mcse),
             s.std_bias_pct ? csv_num(*s.std_bias_pct) : "",
             s.rel_bias_pct ? csv_num(*s.rel_bias_pct) : "",
             csv_num(s.rel_mod_se_err_pct), csv_num(s.convergence_rate)});
    }
  }
  {
    CsvWriter w((dir / "selection.csv").string());
    w.row({"strategy", "corr_group", "miss_assoc", "n_vars", "mean_selected",
           "pct_selected"});
    const Eigen::VectorXd corr = corr_with_outcome(out.scenario);
    for (const auto& [label, stats] : out.selection) {
      // Table-1-style grouping by (correlation level, missingness link)
      std::map<std::pair<std::string, std::string>,
               std::pair<int, double>> groups;
      for (Eigen::Index j = 0; j < corr.size(); ++j) {
        const std::string assoc =
            out.scenario.gamma_a[j] != 0.0 ? "yes" : "no";
        auto& cell = groups[{corr_bucket(corr[j]), assoc}];
        cell.first += 1;
        cell.second += stats.freq[j];
      }
      for (const auto& [key, cell] : groups) {
        w.row({label, key.first, key.second, std::to_string(cell.first),
               csv_num(cell.second),
               csv_num(100.0 * cell.second / static_cast<double>(cell.first))});
      }
      w.row({label, "total", "", std::to_string(static_cast<int>(corr.size())),
             csv_num(stats.mean_total),
             csv_num(100.0 * stats.mean_total /
                     static_cast<double>(corr.size()))});
    }
  }
  {
    CsvWriter w((dir / "plotdata.csv").string());
    w.row({"scenario", "strategy", "estimand", "measure", "value", "mc_ci_low",
           "mc_ci_high"});
    for (const PerformanceSummary& s : out.summaries) {
      w.row({out.scenario.name, s.strategy, s.estimand, "bias",
             csv_num(s.bias), csv_num(s.bias - 1.96 * s.bias_mcse),
             csv_num(s.bias + 1.96 * s.bias_mcse)});
      w.row({out.scenario.name, s.strategy, s.estimand, "emp_se",
             csv_num(s.emp_se), csv_num(s.emp_se - 1.96 * s.emp_se_mcse),
             csv_num(s.emp_se + 1.96 * s.emp_se_mcse)});
    }
  }
  if (manifest.verbose_traces) {
    const fs::path tdir = dir / "traces";
    fs::create_directories(tdir);
    for (std::size_t i = 0; i < out.traces.size(); ++i) {
      CsvWriter w((tdir / (out.trace_names[i] + ".csv")).string());
      w.row({"candidate", "criterion", "decision"});
      for (const TraceRecord& t : out.traces[i]) {
        w.row({t.candidate, csv_num(t.criterion), t.decision});
      }
    }
  }
}

}  // namespace misim
