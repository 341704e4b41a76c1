#pragma once

#include <Eigen/Dense>

#include "misim/rng.hpp"

namespace misim {

struct OlsFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd coef_covariance;  // residual_variance * gram_inverse
  Eigen::MatrixXd gram_inverse;     // (X^t X)^-1
  double residual_variance = 0.0;
  long residual_df = 0;  // n - q, intercept counted in q
  Eigen::VectorXd wald_p_values;
};

/// Least-squares fit via column-pivoted QR. Rank is checked with relative
/// pivot threshold 1e-10; a deficient design raises SingularDesignError
/// carrying the offending column index. Requires n > q.
OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

struct BayesLmDraw {
  Eigen::VectorXd coef;
  double sigma2 = 0.0;
};

/// Proper Bayesian draw from the linear-model posterior:
///   sigma2 = residual_variance * df / g,  g ~ chisq(df)
///   coef   ~ Normal(coefficients, sigma2 * gram_inverse)
/// residual_variance == 0 short-circuits to (coefficients, 0) with no
/// draws consumed.
BayesLmDraw bayes_lm_draw(const OlsFit& fit,
                          const Eigen::MatrixXd& design_gram_inverse,
                          RngStream& rng);

/// Repeated-draw variant that factorizes gram_inverse once.
class BayesLmSampler {
 public:
  BayesLmSampler(OlsFit fit, const Eigen::MatrixXd& design_gram_inverse);
  BayesLmDraw draw(RngStream& rng) const;
  const OlsFit& fit() const { return fit_; }

 private:
  OlsFit fit_;
  Eigen::MatrixXd transform_;  // spectral root of gram_inverse
};

}  // namespace misim
