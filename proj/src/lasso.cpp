#include "misim/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "misim/errors.hpp"
#include "misim/ols.hpp"

namespace misim {

namespace {

constexpr double kTol = 1e-7;
constexpr long kMaxSweeps = 100000;

inline double soft_threshold(double a, double lambda) {
  if (a > lambda) return a - lambda;
  if (a < -lambda) return a + lambda;
  return 0.0;
}

struct Standardized {
  Eigen::MatrixXd z;          // centered, scaled to 1/n-variance 1
  Eigen::VectorXd means;
  Eigen::VectorXd scales;     // 1 for constant columns (z column is zero)
  Eigen::VectorXd yc;
  double y_mean = 0.0;
  std::vector<bool> active;   // false for constant columns
};

Standardized standardize(const Eigen::MatrixXd& design,
                         const Eigen::VectorXd& response) {
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  Standardized s;
  s.z = design;
  s.means.resize(q);
  s.scales.resize(q);
  s.active.assign(static_cast<std::size_t>(q), true);
  for (Eigen::Index j = 0; j < q; ++j) {
    s.means[j] = s.z.col(j).mean();
    s.z.col(j).array() -= s.means[j];
    const double scale =
        std::sqrt(s.z.col(j).squaredNorm() / static_cast<double>(n));
    if (scale > 0.0) {
      s.scales[j] = scale;
      s.z.col(j) /= scale;
    } else {
      s.scales[j] = 1.0;
      s.active[static_cast<std::size_t>(j)] = false;
    }
  }
  s.y_mean = response.mean();
  s.yc = response.array() - s.y_mean;
  return s;
}

// OLS of yc on the exempt columns only (the "null model" the path starts
// from); inactive columns get coefficient 0.
Eigen::VectorXd exempt_only_fit(const Standardized& s,
                                const std::vector<Eigen::Index>& exempt) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(s.z.cols());
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j : exempt) {
    if (s.active[static_cast<std::size_t>(j)]) cols.push_back(j);
  }
  if (cols.empty()) return beta;
  Eigen::MatrixXd sub(s.z.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(k) = s.z.col(cols[k]);
  const Eigen::VectorXd coef =
      (sub.transpose() * sub).ldlt().solve(sub.transpose() * s.yc);
  for (std::size_t k = 0; k < cols.size(); ++k) beta[cols[k]] = coef[k];
  return beta;
}

LassoPath fit_path(const Eigen::MatrixXd& design,
                   const Eigen::VectorXd& response,
                   const std::vector<Eigen::Index>& penalty_exempt,
                   Eigen::VectorXd lambdas, LassoDiagnostics* diag) {
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  const Eigen::Index n_lambda = lambdas.size();
  const double dn = static_cast<double>(n);

  Standardized s = standardize(design, response);
  std::vector<bool> exempt(static_cast<std::size_t>(q), false);
  for (Eigen::Index j : penalty_exempt) {
    if (j < 0 || j >= q) throw ConfigError("penalty_exempt index out of range");
    exempt[static_cast<std::size_t>(j)] = true;
  }

  Eigen::VectorXd beta = exempt_only_fit(s, penalty_exempt);
  Eigen::VectorXd r = s.yc - s.z * beta;

  LassoPath path;
  path.lambdas = std::move(lambdas);
  path.coefficients.resize(n_lambda, q);
  path.intercepts.resize(n_lambda);
  path.column_means = s.means;
  path.column_scales = s.scales;
  path.penalty_exempt = penalty_exempt;

  for (Eigen::Index l = 0; l < n_lambda; ++l) {
    const double lambda = path.lambdas[l];
    long sweep = 0;
    for (;; ++sweep) {
      if (sweep >= kMaxSweeps) {
        throw ConvergenceError("lasso_path: no convergence at lambda index " +
                                   std::to_string(l),
                               static_cast<long>(l));
      }
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (!s.active[static_cast<std::size_t>(j)]) continue;
        const double old = beta[j];
        // z_j^t z_j = n, so the coordinate update is a plain (soft-thresholded)
        // correlation with the partial residual
        const double rho = s.z.col(j).dot(r) / dn + old;
        const double next =
            exempt[static_cast<std::size_t>(j)] ? rho : soft_threshold(rho, lambda);
        if (next != old) {
          r += s.z.col(j) * (old - next);
          beta[j] = next;
          max_change = std::max(max_change, std::fabs(next - old));
        }
      }
      if (diag) {
        double l1 = 0.0;
        for (Eigen::Index j = 0; j < q; ++j) {
          if (!exempt[static_cast<std::size_t>(j)]) l1 += std::fabs(beta[j]);
        }
        diag->objective_per_sweep.push_back(r.squaredNorm() / (2.0 * dn) +
                                            lambda * l1);
      }
      if (max_change < kTol) break;
    }
    for (Eigen::Index j = 0; j < q; ++j) {
      path.coefficients(l, j) = beta[j] / s.scales[j];
    }
    path.intercepts[l] =
        s.y_mean - path.coefficients.row(l).dot(s.means);
  }
  return path;
}

}  // namespace

LassoPath lasso_path(const Eigen::MatrixXd& design,
                     const Eigen::VectorXd& response,
                     const std::vector<Eigen::Index>& penalty_exempt,
                     int n_lambda, double lambda_min_ratio,
                     LassoDiagnostics* diagnostics) {
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  if (n < 2) throw ConfigError("lasso_path: needs n >= 2");
  if (q < 1) throw ConfigError("lasso_path: empty design");
  if (response.size() != n) throw ConfigError("lasso_path: row mismatch");
  if (n_lambda < 1) throw ConfigError("lasso_path: n_lambda must be >= 1");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
    throw ConfigError("lasso_path: lambda_min_ratio outside (0,1)");
  }
  const double y_mean = response.mean();
  if ((response.array() - y_mean).abs().maxCoeff() == 0.0) {
    throw ConfigError("lasso_path: constant response");
  }

  Standardized s = standardize(design, response);
  std::vector<bool> exempt(static_cast<std::size_t>(q), false);
  for (Eigen::Index j : penalty_exempt) {
    if (j < 0 || j >= q) throw ConfigError("penalty_exempt index out of range");
    exempt[static_cast<std::size_t>(j)] = true;
  }
  const Eigen::VectorXd beta0 = exempt_only_fit(s, penalty_exempt);
  const Eigen::VectorXd r0 = s.yc - s.z * beta0;

  double lambda_max = 0.0;
  for (Eigen::Index j = 0; j < q; ++j) {
    if (exempt[static_cast<std::size_t>(j)] ||
        !s.active[static_cast<std::size_t>(j)]) {
      continue;
    }
    lambda_max = std::max(
        lambda_max, std::fabs(s.z.col(j).dot(r0)) / static_cast<double>(n));
  }
  if (lambda_max <= 0.0) lambda_max = 1e-12;

  Eigen::VectorXd lambdas(n_lambda);
  if (n_lambda == 1) {
    lambdas[0] = lambda_max;
  } else {
    const double llo = std::log(lambda_max * lambda_min_ratio);
    const double lhi = std::log(lambda_max);
    for (Eigen::Index l = 0; l < n_lambda; ++l) {
      const double f = static_cast<double>(l) / static_cast<double>(n_lambda - 1);
      lambdas[l] = std::exp(lhi + f * (llo - lhi));
    }
    lambdas[0] = lambda_max;
  }
  return fit_path(design, response, penalty_exempt, std::move(lambdas),
                  diagnostics);
}

LassoPath lasso_path_on_grid(const Eigen::MatrixXd& design,
                             const Eigen::VectorXd& response,
                             const std::vector<Eigen::Index>& penalty_exempt,
                             const Eigen::VectorXd& lambdas,
                             LassoDiagnostics* diagnostics) {
  if (design.rows() < 2) throw ConfigError("lasso_path: needs n >= 2");
  if (lambdas.size() < 1) throw ConfigError("lasso_path: empty lambda grid");
  for (Eigen::Index l = 1; l < lambdas.size(); ++l) {
    if (lambdas[l] > lambdas[l - 1]) {
      throw ConfigError("lasso_path: lambda grid must be nonincreasing");
    }
  }
  return fit_path(design, response, penalty_exempt, lambdas, diagnostics);
}

CvResult cv_lasso(const Eigen::MatrixXd& design,
                  const Eigen::VectorXd& response,
                  const std::vector<Eigen::Index>& penalty_exempt, int folds,
                  RngStream& rng) {
  const Eigen::Index n = design.rows();
  if (folds < 2) throw ConfigError("cv_lasso: needs folds >= 2");
  if (n < folds) throw ConfigError("cv_lasso: needs n >= folds");
  if (n / folds < 2) throw ConfigError("cv_lasso: a fold would have < 2 rows");

  // shared grid from the full-data fit
  const LassoPath full = lasso_path(design, response, penalty_exempt);
  const Eigen::Index n_lambda = full.lambdas.size();

  // seeded Fisher-Yates permutation; row perm[k] goes to fold k % folds
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_uniform() *
                                             static_cast<double>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(std::min(j, i))]);
  }
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    fold_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] =
        static_cast<int>(k % folds);
  }

  Eigen::MatrixXd fold_mse(folds, n_lambda);
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    }
    Eigen::MatrixXd xtr(static_cast<Eigen::Index>(train.size()), design.cols());
    Eigen::VectorXd ytr(static_cast<Eigen::Index>(train.size()));
    for (std::size_t k = 0; k < train.size(); ++k) {
      xtr.row(static_cast<Eigen::Index>(k)) = design.row(train[k]);
      ytr[static_cast<Eigen::Index>(k)] = response[train[k]];
    }
    const LassoPath part = lasso_path_on_grid(xtr, ytr, penalty_exempt,
                                              full.lambdas);
    for (Eigen::Index l = 0; l < n_lambda; ++l) {
      double sse = 0.0;
      for (Eigen::Index i : test) {
        const double pred =
            design.row(i).dot(part.coefficients.row(l)) + part.intercepts[l];
        const double e = response[i] - pred;
        sse += e * e;
      }
      fold_mse(f, l) = sse / static_cast<double>(test.size());
    }
  }

  CvResult cv;
  cv.lambdas = full.lambdas;
  cv.cv_mean.resize(n_lambda);
  cv.cv_se.resize(n_lambda);
  const double df = static_cast<double>(folds);
  for (Eigen::Index l = 0; l < n_lambda; ++l) {
    const double mean = fold_mse.col(l).mean();
    cv.cv_mean[l] = mean;
    const double var =
        (fold_mse.col(l).array() - mean).square().sum() / (df - 1.0);
    cv.cv_se[l] = std::sqrt(var / df);
  }

  cv.index_min = 0;
  for (Eigen::Index l = 1; l < n_lambda; ++l) {
    if (cv.cv_mean[l] < cv.cv_mean[cv.index_min]) cv.index_min = l;
  }
  const double threshold = cv.cv_mean[cv.index_min] + cv.cv_se[cv.index_min];
  cv.index_1se = cv.index_min;
  for (Eigen::Index l = 0; l <= cv.index_min; ++l) {
    if (cv.cv_mean[l] <= threshold) {
      cv.index_1se = l;
      break;
    }
  }
  cv.lambda_min = cv.lambdas[cv.index_min];
  cv.lambda_1se = cv.lambdas[cv.index_1se];
  return cv;
}

}  // namespace misim
