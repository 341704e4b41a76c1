#include "misim/stats.hpp"

#include <cmath>

#include "misim/dist.hpp"
#include "misim/errors.hpp"

namespace misim {

std::optional<double> pearson_corr(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw ConfigError("pearson_corr: length mismatch");
  double sx = 0.0, sy = 0.0;
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i])) {
      sx += x[i];
      sy += y[i];
      ++m;
    }
  }
  if (m < 3) {
    throw InsufficientDataError("pearson_corr: fewer than 3 complete pairs");
  }
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i])) {
      const double dx = x[i] - mx;
      const double dy = y[i] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  double r = sxy / std::sqrt(sxx * syy);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

PcaResult pca(const Eigen::MatrixXd& data, bool standardize) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (p < 1) throw ConfigError("pca: no columns");
  if (n <= p) throw InsufficientDataError("pca: needs n > p");

  Eigen::MatrixXd z = data;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mean = z.col(j).mean();
    z.col(j).array() -= mean;
    if (standardize) {
      const double sd =
          std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n - 1));
      if (sd <= 0.0) throw DegenerateColumnError(static_cast<long>(j));
      z.col(j) /= sd;
    }
  }

  const Eigen::MatrixXd c = z.transpose() * z / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) throw NotPsdError("pca: eigensolver failed");

  // Eigen returns ascending order; flip to decreasing and fix signs so the
  // largest-magnitude loading of each component is positive.
  Eigen::VectorXd ev = es.eigenvalues().reverse();
  Eigen::MatrixXd vec = es.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < p; ++k) {
    if (ev[k] < 0.0) ev[k] = 0.0;
    Eigen::Index imax = 0;
    vec.col(k).cwiseAbs().maxCoeff(&imax);
    if (vec(imax, k) < 0.0) vec.col(k) = -vec.col(k);
  }

  PcaResult out;
  out.component_scores = z * vec;
  const double denom = standardize ? static_cast<double>(p) : ev.sum();
  out.explained_fractions = ev / denom;
  return out;
}

WelchTest welch_t_test(const Eigen::VectorXd& group0,
                       const Eigen::VectorXd& group1) {
  const Eigen::Index n0 = group0.size();
  const Eigen::Index n1 = group1.size();
  if (n0 < 2 || n1 < 2) {
    throw InsufficientDataError("welch_t_test: each group needs >= 2 rows");
  }
  const double m0 = group0.mean();
  const double m1 = group1.mean();
  const double v0 =
      (group0.array() - m0).square().sum() / static_cast<double>(n0 - 1);
  const double v1 =
      (group1.array() - m1).square().sum() / static_cast<double>(n1 - 1);
  const double se2 = v0 / static_cast<double>(n0) + v1 / static_cast<double>(n1);

  WelchTest out;
  if (se2 <= 0.0) {
    out.t = 0.0;
    out.df = static_cast<double>(n0 + n1 - 2);
    out.p_value = (m0 == m1) ? 1.0 : 0.0;
    return out;
  }
  out.t = (m1 - m0) / std::sqrt(se2);
  const double a = v0 / static_cast<double>(n0);
  const double b = v1 / static_cast<double>(n1);
  out.df = se2 * se2 /
           (a * a / static_cast<double>(n0 - 1) +
            b * b / static_cast<double>(n1 - 1));
  out.p_value = 2.0 * (1.0 - t_cdf(std::fabs(out.t), out.df));
  return out;
}

}  // namespace misim
