#include "misim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace misim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

PerformanceSummary summarize(const std::vector<RepResult>& results,
                             double true_value) {
  PerformanceSummary out;
  if (!results.empty()) {
    out.strategy = results.front().strategy;
    out.estimand = results.front().estimand;
  }
  const auto k_all = results.size();

  std::vector<double> est, se2;
  long covered = 0;
  for (const RepResult& r : results) {
    if (!r.converged) continue;
    est.push_back(r.estimate);
    se2.push_back(r.model_se * r.model_se);
    if (r.ci_low <= true_value && true_value <= r.ci_high) ++covered;
  }
  out.k_used = static_cast<int>(est.size());
  out.convergence_rate =
      k_all == 0 ? 0.0 : static_cast<double>(est.size()) / static_cast<double>(k_all);

  if (est.size() < 2) {
    out.bias = out.bias_mcse = out.emp_se = out.emp_se_mcse = kNaN;
    out.mod_se = out.mod_se_mcse = out.coverage = out.coverage_mcse = kNaN;
    out.rel_mod_se_err_pct = kNaN;
    return out;
  }

  // sorting makes every accumulation independent of input order
  std::sort(est.begin(), est.end());
  std::sort(se2.begin(), se2.end());
  const double k = static_cast<double>(est.size());

  const double est_mean = mean_of(est);
  const double est_var = sample_var(est, est_mean);
  out.bias = est_mean - true_value;
  out.bias_mcse = std::sqrt(est_var / k);
  out.emp_se = std::sqrt(est_var);
  out.emp_se_mcse = out.emp_se / std::sqrt(2.0 * (k - 1.0));

  const double se2_mean = mean_of(se2);
  const double se2_var = sample_var(se2, se2_mean);
  out.mod_se = std::sqrt(se2_mean);
  out.mod_se_mcse = out.mod_se > 0.0
                        ? std::sqrt(se2_var / (4.0 * k * se2_mean))
                        : kNaN;

  out.coverage = static_cast<double>(covered) / k;
  out.coverage_mcse = std::sqrt(out.coverage * (1.0 - out.coverage) / k);

  if (out.emp_se > 0.0) {
    out.std_bias_pct = 100.0 * out.bias / out.emp_se;
    out.rel_mod_se_err_pct = 100.0 * (out.mod_se / out.emp_se - 1.0);
  } else {
    out.rel_mod_se_err_pct = kNaN;
  }
  if (true_value != 0.0) {
    out.rel_bias_pct = 100.0 * out.bias / true_value;
  }
  return out;
}

}  // namespace misim
