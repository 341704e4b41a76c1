#include "misim/ols.hpp"

#include <cmath>

#include "misim/dist.hpp"
#include "misim/errors.hpp"
#include "misim/linalg.hpp"

namespace misim {

OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  if (response.size() != n) throw ConfigError("ols_fit: row mismatch");
  if (q < 1) throw ConfigError("ols_fit: empty design");
  if (n <= q) throw InsufficientDataError("ols_fit: needs n > q");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < q) {
    // first column that fails to pivot, in original indexing
    const auto& perm = qr.colsPermutation().indices();
    throw SingularDesignError(static_cast<long>(perm(qr.rank())));
  }

  OlsFit fit;
  fit.coefficients = qr.solve(response);
  const Eigen::VectorXd resid = response - design * fit.coefficients;
  fit.residual_df = static_cast<long>(n - q);
  fit.residual_variance = resid.squaredNorm() / static_cast<double>(fit.residual_df);
  // an exact fit leaves only accumulated roundoff; snap it to zero so the
  // degenerate posterior-draw contract holds bit-exactly
  const double y_scale = std::max(1.0, response.squaredNorm() / static_cast<double>(n));
  if (fit.residual_variance <= 1e-24 * y_scale) fit.residual_variance = 0.0;

  // (X^t X)^-1 = P R^-1 R^-t P^t  from  X P = Q R
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(q, q);
  const Eigen::MatrixXd rinv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(q, q));
  Eigen::MatrixXd gram_inv = rinv * rinv.transpose();
  gram_inv = qr.colsPermutation() * gram_inv;
  gram_inv = gram_inv * qr.colsPermutation().transpose();
  fit.gram_inverse = 0.5 * (gram_inv + gram_inv.transpose());  // symmetrize
  fit.coef_covariance = fit.residual_variance * fit.gram_inverse;

  fit.wald_p_values.resize(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    const double var_j = std::max(0.0, fit.coef_covariance(j, j));
    const double se = std::sqrt(var_j);
    if (se == 0.0) {
      fit.wald_p_values[j] = fit.coefficients[j] == 0.0 ? 1.0 : 0.0;
    } else {
      const double t = std::fabs(fit.coefficients[j]) / se;
      fit.wald_p_values[j] =
          2.0 * (1.0 - t_cdf(t, static_cast<double>(fit.residual_df)));
    }
  }
  return fit;
}

BayesLmDraw bayes_lm_draw(const OlsFit& fit,
                          const Eigen::MatrixXd& design_gram_inverse,
                          RngStream& rng) {
  return BayesLmSampler(fit, design_gram_inverse).draw(rng);
}

BayesLmSampler::BayesLmSampler(OlsFit fit,
                               const Eigen::MatrixXd& design_gram_inverse)
    : fit_(std::move(fit)) {
  if (fit_.residual_df < 1) {
    throw InsufficientDataError("bayes_lm_draw: residual df < 1");
  }
  transform_ = psd_transform(design_gram_inverse);
}

BayesLmDraw BayesLmSampler::draw(RngStream& rng) const {
  if (fit_.residual_variance == 0.0) return {fit_.coefficients, 0.0};
  const double df = static_cast<double>(fit_.residual_df);
  const double g = rng.next_chisq(df);
  const double sigma2 = fit_.residual_variance * df / g;
  Eigen::VectorXd z(fit_.coefficients.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.next_normal();
  BayesLmDraw out;
  out.sigma2 = sigma2;
  out.coef = fit_.coefficients + std::sqrt(sigma2) * (transform_ * z);
  return out;
}

}  // namespace misim
