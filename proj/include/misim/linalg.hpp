#pragma once

#include <Eigen/Dense>

#include "misim/rng.hpp"

namespace misim {

/// Spectral square root of a symmetric PSD matrix: returns T with
/// T T^t = cov. Eigenvalues in [-1e-8, 0) are clamped to zero; anything
/// below -1e-8 raises NotPsdError, asymmetry raises ConfigError.
Eigen::MatrixXd psd_transform(const Eigen::MatrixXd& cov);

/// n independent rows ~ MVN(mean, cov), cov factorized once per call
/// (spectral decomposition). Standard normals are consumed row-major.
Eigen::MatrixXd mvn_sample(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, Eigen::Index n,
                           RngStream& rng);

/// Same draw path with a precomputed transform (T from psd_transform).
Eigen::MatrixXd mvn_sample_with_transform(const Eigen::VectorXd& mean,
                                          const Eigen::MatrixXd& transform,
                                          Eigen::Index n, RngStream& rng);

}  // namespace misim
