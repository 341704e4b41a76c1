#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "misim/datagen.hpp"
#include "misim/rng.hpp"

namespace misim {

enum class StrategyKind {
  QuickpredPt2,
  QuickpredPt4,
  PcAux,
  Forward,
  ForwardSw,
  ForwardFMI,
  Tests,
  Lasso,
  Full,
  CCA,
};

struct StrategySpec {
  StrategyKind kind = StrategyKind::Full;
  double cutoff = 0.2;             // quickpred correlation cutoff
  double variance_threshold = 0.40;  // PcAux cumulative variance target
  double alpha = 0.05;             // forward / forward-sw / tests level
  double tau = 0.01;               // forward-FMI stopping percentage
  int cv_folds = 10;               // lasso cross-validation folds
};

StrategySpec strategy_spec(StrategyKind kind);
std::string strategy_label(StrategyKind kind);
StrategyKind strategy_kind_from_label(const std::string& label);

/// True for strategies whose per-variable selections belong in the
/// selection-frequency table (PcAux passes component scores instead;
/// CCA/Full perform no selection).
bool selects_variables(StrategyKind kind);

struct TraceRecord {
  std::string candidate;
  double criterion = 0.0;
  std::string decision;
};

/// Outcome of one selection strategy on one dataset. selected_aux holds
/// 0-based indices into the auxiliary columns; derived_predictors is
/// present only for PcAux (component scores for all rows).
struct SelectionResult {
  std::vector<Eigen::Index> selected_aux;
  std::optional<Eigen::MatrixXd> derived_predictors;
  std::vector<TraceRecord> trace;
};

/// A_i selected iff max(|corr(A_i, Y)| over available cases,
/// |corr(A_i, M_Y)|) > cutoff; undefined correlations score 0.
SelectionResult quickpred_select(const StudyData& data, double cutoff);

/// First c principal components of the standardized auxiliaries, c minimal
/// with cumulative explained fraction >= variance_threshold.
SelectionResult pcaux_select(const StudyData& data, double variance_threshold);

/// Greedy forward selection on respondent rows; base model is intercept+X.
/// At each step the candidate with the smallest Wald p-value is added if
/// p < alpha (ties broken by lowest column index). With allow_removal, any
/// selected variable whose p-value in the refit model exceeds alpha is
/// dropped back into the candidate pool after each addition.
SelectionResult forward_select(const StudyData& data, double alpha,
                               bool allow_removal);

struct FmiEstimate {
  double fmi = 0.0;
  double mu_hat = 0.0;
};

/// Pattern-mixture FMI for the mean of Y through the proxy A* = fitted
/// values of Y on aux[subset] among respondents:
///   fmi = 1 - (1/n) / ((1 - rho^2)/n_R + rho^2/n),  rho = corr(Y, A*|resp)
///   mu_hat = regression estimator ybar_R + b (A*bar - A*bar_R)
/// A constant (or empty) proxy degrades to fmi = n_miss/n, mu_hat = ybar_R.
FmiEstimate estimate_fmi_proxy(const StudyData& data,
                               const std::vector<Eigen::Index>& subset);

/// Forward selection on the proxy FMI: always seed with the single
/// variable minimizing fmi, then keep adding the best candidate while the
/// fmi reduction is at least tau * (n_miss/n). Zero missing rows selects
/// nothing.
SelectionResult forward_fmi_select(const StudyData& data, double tau);

/// Welch t-test of each A_i between the M_Y groups; select iff p < alpha.
/// A group with fewer than 2 rows yields an empty selection with a logged
/// warning.
SelectionResult ttest_select(const StudyData& data, double alpha);

/// LASSO of Y on (X, A) over respondent rows with X penalty-exempt;
/// auxiliaries with nonzero coefficients at the one-standard-error lambda
/// are selected (coefficients themselves are discarded).
SelectionResult lasso_select(const StudyData& data, int cv_folds,
                             RngStream& rng);

/// Dispatch on spec.kind; Full selects every auxiliary, CCA selects none.
SelectionResult run_selection(const StudyData& data, const StrategySpec& spec,
                              RngStream& rng);

}  // namespace misim
