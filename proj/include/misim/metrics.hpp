#pragma once

#include <optional>
#include <string>
#include <vector>

namespace misim {

struct RepResult {
  int rep_id = 0;
  std::string strategy;
  std::string estimand;
  double estimate = 0.0;
  double model_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool converged = false;
};

/// Morris-style performance measures with Monte Carlo standard errors.
/// Non-converged replicates contribute only to convergence_rate.
/// std_bias_pct is absent when emp_se == 0; rel_bias_pct is absent when
/// the true value is 0.
struct PerformanceSummary {
  std::string strategy;
  std::string estimand;
  int k_used = 0;  // converged replicates
  double bias = 0.0;
  double bias_mcse = 0.0;
  double emp_se = 0.0;
  double emp_se_mcse = 0.0;
  double mod_se = 0.0;
  double mod_se_mcse = 0.0;
  double coverage = 0.0;
  double coverage_mcse = 0.0;
  std::optional<double> std_bias_pct;
  std::optional<double> rel_bias_pct;
  double rel_mod_se_err_pct = 0.0;
  double convergence_rate = 0.0;
};

/// Aggregate one (strategy, estimand) cell. Invariant to the order of the
/// inputs (value arrays are sorted before accumulation). Fewer than 2
/// converged results populate only k_used and convergence_rate (other
/// fields NaN).
PerformanceSummary summarize(const std::vector<RepResult>& results,
                             double true_value);

}  // namespace misim
