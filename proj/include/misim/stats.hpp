#pragma once

#include <Eigen/Dense>

#include <optional>

namespace misim {

/// Pearson correlation over pairwise-complete cases (missing = NaN).
/// Returns nullopt when either complete subvector is constant; raises
/// InsufficientDataError below 3 complete pairs. Works unchanged for 0/1
/// indicators (point-biserial case).
std::optional<double> pearson_corr(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y);

struct PcaResult {
  Eigen::MatrixXd component_scores;      // n x p, decreasing eigenvalue order
  Eigen::VectorXd explained_fractions;   // nonincreasing, sums to 1
};

/// Principal components of the column-standardized data (correlation-matrix
/// eigendecomposition). Requires n > p; a constant column with standardize
/// set raises DegenerateColumnError naming the column. Eigenvector signs are
/// fixed so the largest-magnitude loading is positive.
PcaResult pca(const Eigen::MatrixXd& data, bool standardize = true);

struct WelchTest {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Welch (unequal-variance) two-sample t-test; both groups need >= 2 rows.
WelchTest welch_t_test(const Eigen::VectorXd& group0,
                       const Eigen::VectorXd& group1);

}  // namespace misim
