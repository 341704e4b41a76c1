#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "misim/datagen.hpp"
#include "misim/ols.hpp"
#include "misim/select.hpp"

namespace misim {

enum class ImputeMethod { NormDraw, Pmm };

struct ImputationModelSpec {
  ImputeMethod method = ImputeMethod::NormDraw;
  int donors = 5;     // PMM only
  int m = 20;         // imputations per replicate
  int iterations = 1; // cycles; 1 suffices for a single incomplete column
};

enum class Estimand { MeanY, BetaX };
std::string estimand_label(Estimand e);

/// Rubin's-rules pooled estimate. Identities held exactly:
///   t_var = w + (1 + 1/m_used) * b
///   fmi   = (1 + 1/m_used) * b / t_var
///   ci    = q_bar -+ t_quantile(0.975, df) * sqrt(t_var)
struct PooledEstimate {
  Estimand estimand = Estimand::MeanY;
  double q_bar = 0.0;
  double w = 0.0;      // within-imputation variance
  double b = 0.0;      // between-imputation variance
  double t_var = 0.0;  // total variance
  double df = 0.0;     // Barnard-Rubin; +inf when b == 0
  double ci_low = 0.0;
  double ci_high = 0.0;
  double fmi = 0.0;
  int m_used = 0;
  bool converged = true;
};

/// Predictor matrix for the imputation model: X first, then either the
/// selected auxiliary columns or the PcAux component scores.
Eigen::MatrixXd build_predictors(const StudyData& data,
                                 const SelectionResult& selection);

/// One proper Bayesian linear-regression imputation: fit OLS of Y on
/// (intercept, predictors) over respondents, draw (beta*, sigma2*), impute
/// each missing row as z^t beta* + N(0, sigma2*). No missing rows returns
/// y unchanged with no draws consumed.
Eigen::VectorXd impute_norm(const StudyData& data,
                            const Eigen::MatrixXd& predictors, RngStream& rng);

/// Predictive mean matching, type-1: predicted means use a parameter draw
/// for missing rows and the OLS fit for observed rows; each missing row
/// draws uniformly among the `donors` observed rows with closest predicted
/// means (ties by row index) and copies that donor's observed Y.
Eigen::VectorXd impute_pmm(const StudyData& data,
                           const Eigen::MatrixXd& predictors, int donors,
                           RngStream& rng);

struct Analysis {
  double estimate = 0.0;
  double se = 0.0;
};

/// Complete-data analysis: MeanY -> (ybar, s_y/sqrt(n)); BetaX -> OLS slope
/// of Y on (1, X) with its model SE.
Analysis analyze(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                 Estimand estimand);

/// Rubin's rules with Barnard-Rubin small-sample degrees of freedom;
/// n_complete_df is the complete-data df of the analysis (n-1 for the
/// mean, n-2 for the slope). b == 0 falls back to a normal-quantile CI.
PooledEstimate pool_rubin(const std::vector<double>& estimates,
                          const std::vector<double>& variances,
                          double n_complete_df, Estimand estimand);

/// Complete-case analysis: analyze() on respondent rows with a
/// t-based CI on respondent degrees of freedom.
PooledEstimate cca_analyze(const StudyData& data, Estimand estimand);

/// Everything run_strategy knows about one (dataset, strategy) cell.
struct StrategyRun {
  SelectionResult selection;
  PooledEstimate mean_y;
  PooledEstimate beta_x;
  bool converged = true;
  std::string failure;
};

/// Full per-replicate pipeline for one strategy: CCA bypasses imputation;
/// otherwise select -> build predictors (X always included) -> m
/// imputations -> analyze each -> pool. Any error is folded into
/// converged = false for the convergence-rate metric.
StrategyRun run_strategy(const StudyData& data, const StrategySpec& strategy,
                         const ImputationModelSpec& model,
                         RngStream& select_rng, RngStream& impute_rng);

}  // namespace misim
