#pragma once

#include <Eigen/Dense>

#include <vector>

#include "misim/rng.hpp"

namespace misim {

/// L1-penalized regression path on a descending log-spaced lambda grid.
/// Coefficients are reported on the original scale; the solver works on
/// columns standardized to mean 0 and 1/n-variance 1, with the intercept
/// unpenalized and fit on centered data. At lambdas[0] = lambda_max every
/// penalized coefficient is exactly zero, and the KKT conditions hold
/// within 1e-6 at every grid point.
struct LassoPath {
  Eigen::VectorXd lambdas;       // length L, decreasing
  Eigen::MatrixXd coefficients;  // L x q, original scale
  Eigen::VectorXd intercepts;    // length L
  Eigen::VectorXd column_means;  // standardization, length q
  Eigen::VectorXd column_scales; // 1/n scale; 1 for constant columns
  std::vector<Eigen::Index> penalty_exempt;
};

struct CvResult {
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  Eigen::Index index_min = 0;  // into the shared lambda grid
  Eigen::Index index_1se = 0;
  Eigen::VectorXd lambdas;
  Eigen::VectorXd cv_mean;  // mean held-out squared prediction error
  Eigen::VectorXd cv_se;    // sd of fold means / sqrt(folds)
};

/// Optional per-sweep diagnostics (objective on the standardized scale:
/// RSS/2n + lambda * L1 over penalized coefficients).
struct LassoDiagnostics {
  std::vector<double> objective_per_sweep;
};

/// Cyclic coordinate descent with warm starts. Convergence: max
/// standardized-scale coefficient change per sweep < 1e-7; more than 1e5
/// sweeps at one lambda raises ConvergenceError with the lambda index.
LassoPath lasso_path(const Eigen::MatrixXd& design,
                     const Eigen::VectorXd& response,
                     const std::vector<Eigen::Index>& penalty_exempt,
                     int n_lambda = 100, double lambda_min_ratio = 1e-3,
                     LassoDiagnostics* diagnostics = nullptr);

/// Path fit on a caller-supplied grid (used for cross-validation folds).
LassoPath lasso_path_on_grid(const Eigen::MatrixXd& design,
                             const Eigen::VectorXd& response,
                             const std::vector<Eigen::Index>& penalty_exempt,
                             const Eigen::VectorXd& lambdas,
                             LassoDiagnostics* diagnostics = nullptr);

/// K-fold cross-validation on the shared full-data lambda grid. Rows are
/// assigned to folds by a seeded permutation (sizes differ by at most 1);
/// lambda_1se is the largest lambda whose CV error is within one standard
/// error of the minimum.
CvResult cv_lasso(const Eigen::MatrixXd& design,
                  const Eigen::VectorXd& response,
                  const std::vector<Eigen::Index>& penalty_exempt, int folds,
                  RngStream& rng);

}  // namespace misim
