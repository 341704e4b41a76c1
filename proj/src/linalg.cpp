#include "misim/linalg.hpp"

#include "misim/errors.hpp"

namespace misim {

Eigen::MatrixXd psd_transform(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw ConfigError("covariance must be square");
  if (cov.size() == 0) throw ConfigError("covariance is empty");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("covariance not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw NotPsdError("eigendecomposition failed");
  }
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-8) {
      throw NotPsdError("covariance has eigenvalue " + std::to_string(ev[i]) +
                        " below -1e-8");
    }
    if (ev[i] < 0.0) ev[i] = 0.0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

Eigen::MatrixXd mvn_sample(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, Eigen::Index n,
                           RngStream& rng) {
  if (cov.rows() != mean.size()) {
    throw ConfigError("mvn_sample: mean/cov dimension mismatch");
  }
  return mvn_sample_with_transform(mean, psd_transform(cov), n, rng);
}

Eigen::MatrixXd mvn_sample_with_transform(const Eigen::VectorXd& mean,
                                          const Eigen::MatrixXd& transform,
                                          Eigen::Index n, RngStream& rng) {
  const Eigen::Index d = mean.size();
  if (transform.rows() != d) {
    throw ConfigError("mvn_sample: transform dimension mismatch");
  }
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.next_normal();
  }
  Eigen::MatrixXd out = z * transform.transpose();
  out.rowwise() += mean.transpose();
  return out;
}

}  // namespace misim
