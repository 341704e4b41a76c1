#include "misim/oracle.hpp"

#include <cmath>
#include <sstream>

#include "misim/datagen.hpp"
#include "misim/dist.hpp"
#include "misim/impute.hpp"
#include "misim/lasso.hpp"
#include "misim/linalg.hpp"
#include "misim/ols.hpp"
#include "misim/select.hpp"
#include "misim/stats.hpp"

namespace misim {

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// Composite Simpson over [a, b]; the oracle integration route, independent
// of the series/continued-fraction implementations it checks.
template <typename F>
double simpson(F f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double t_pdf(double u, double df) {
  const double lc = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                    0.5 * std::log(df * M_PI);
  return std::exp(lc - 0.5 * (df + 1.0) * std::log1p(u * u / df));
}

double quad_normal_cdf(double z) {
  return 0.5 + simpson(normal_pdf, 0.0, z, 4000);
}

double quad_t_cdf(double t, double df) {
  return 0.5 + simpson([df](double u) { return t_pdf(u, df); }, 0.0, t, 4000);
}

OracleCheck rubin_pooling_hand_values() {
  OracleCheck check{"rubin-pooling-hand-values", false, ""};
  const PooledEstimate pooled =
      pool_rubin({1.0, 2.0}, {0.5, 0.5}, 1e6, Estimand::MeanY);
  const double err =
      std::fabs(pooled.q_bar - 1.5) + std::fabs(pooled.w - 0.5) +
      std::fabs(pooled.b - 0.5) + std::fabs(pooled.t_var - 1.25) +
      std::fabs(pooled.fmi - 0.6);
  check.passed = err < 1e-12;
  check.detail = "sum of deviations " + fmt(err);
  return check;
}

OracleCheck fmi_analytic_vs_empirical() {
  OracleCheck check{"fmi-analytic-vs-empirical", false, ""};
  ScenarioConfig cfg = derive_generative_params(basic_preset());
  cfg.gamma0 = calibrate_gamma0(cfg);
  RngStream gen(cfg.master_seed, 0xF31);
  StudyData data = generate_complete(cfg, gen);
  RngStream miss(cfg.master_seed, 0xF32);
  impose_missingness(data, cfg, miss);

  std::vector<Eigen::Index> all;
  for (Eigen::Index j = 0; j < cfg.p; ++j) all.push_back(j);
  const double analytic = estimate_fmi_proxy(data, all).fmi;

  SelectionResult full;
  full.selected_aux = all;
  const Eigen::MatrixXd predictors = build_predictors(data, full);
  RngStream imp(cfg.master_seed, 0xF33);
  const int m = 2000;
  std::vector<double> est, var;
  for (int k = 0; k < m; ++k) {
    const Eigen::VectorXd y = impute_norm(data, predictors, imp);
    const Analysis a = analyze(y, data.x, Estimand::MeanY);
    est.push_back(a.estimate);
    var.push_back(a.se * a.se);
  }
  const double empirical =
      pool_rubin(est, var, static_cast<double>(cfg.n - 1), Estimand::MeanY).fmi;
  const double diff = std::fabs(analytic - empirical);
  check.passed = diff <= 0.05;
  check.detail = "analytic " + fmt(analytic) + " empirical " + fmt(empirical) +
                 " diff " + fmt(diff);
  return check;
}

// KKT residual on the standardized scale, recomputed from scratch.
double kkt_worst_violation(const Eigen::MatrixXd& design,
                           const Eigen::VectorXd& response,
                           const std::vector<Eigen::Index>& exempt,
                           const LassoPath& path) {
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  Eigen::MatrixXd z = design;
  Eigen::VectorXd scale(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    z.col(j).array() -= z.col(j).mean();
    scale[j] = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
    if (scale[j] > 0) z.col(j) /= scale[j];
  }
  Eigen::VectorXd yc = response.array() - response.mean();
  std::vector<bool> is_exempt(static_cast<std::size_t>(q), false);
  for (Eigen::Index j : exempt) is_exempt[static_cast<std::size_t>(j)] = true;

  double worst = 0.0;
  for (Eigen::Index l = 0; l < path.lambdas.size(); ++l) {
    const double lambda = path.lambdas[l];
    Eigen::VectorXd beta_std(q);
    for (Eigen::Index j = 0; j < q; ++j) {
      beta_std[j] = path.coefficients(l, j) * scale[j];
    }
    const Eigen::VectorXd r = yc - z * beta_std;
    for (Eigen::Index j = 0; j < q; ++j) {
      if (scale[j] == 0.0) continue;
      const double g = z.col(j).dot(r) / static_cast<double>(n);
      double violation;
      if (is_exempt[static_cast<std::size_t>(j)]) {
        violation = std::fabs(g);
      } else if (beta_std[j] != 0.0) {
        violation = std::fabs(g - lambda * (beta_std[j] > 0 ? 1.0 : -1.0));
      } else {
        violation = std::max(0.0, std::fabs(g) - lambda);
      }
      worst = std::max(worst, violation);
    }
  }
  return worst;
}

OracleCheck lasso_kkt_random_instances() {
  OracleCheck check{"lasso-kkt-random-instances", false, ""};
  RngStream rng(0x44A7, 7);
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const Eigen::Index n = 40 + static_cast<Eigen::Index>(rng.next_uniform() * 160);
    const Eigen::Index q = 2 + static_cast<Eigen::Index>(rng.next_uniform() * 10);
    Eigen::MatrixXd design(n, q);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < q; ++j) design(i, j) = rng.next_normal();
    }
    for (Eigen::Index j = 0; j < q; ++j) {
      design.col(j) *= 0.5 + 3.0 * rng.next_uniform();  // uneven scales
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
    for (Eigen::Index j = 0; j < q; ++j) {
      if (rng.next_uniform() < 0.5) beta[j] = 2.0 * rng.next_normal();
    }
    Eigen::VectorXd y = design * beta;
    for (Eigen::Index i = 0; i < n; ++i) y[i] += rng.next_normal();
    std::vector<Eigen::Index> exempt;
    if (inst % 3 == 0) exempt.push_back(0);
    const LassoPath path = lasso_path(design, y, exempt);
    worst = std::max(worst, kkt_worst_violation(design, y, exempt, path));
  }
  check.passed = worst < 1e-6;
  check.detail = "worst KKT violation " + fmt(worst);
  return check;
}

OracleCheck lasso_soft_threshold_closed_form() {
  OracleCheck check{"lasso-soft-threshold-orthonormal", false, ""};
  RngStream rng(0x50F7, 11);
  const Eigen::Index n = 200, q = 6;
  Eigen::MatrixXd design(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) design(i, j) = rng.next_normal();
  }
  // center then modified Gram-Schmidt; columns end up mean-zero with
  // z_j^t z_k = n * delta_jk, so standardization is the identity
  for (Eigen::Index j = 0; j < q; ++j) {
    design.col(j).array() -= design.col(j).mean();
    for (Eigen::Index k = 0; k < j; ++k) {
      design.col(j) -=
          design.col(k) * (design.col(k).dot(design.col(j)) /
                           design.col(k).squaredNorm());
    }
    design.col(j) *= std::sqrt(static_cast<double>(n)) / design.col(j).norm();
  }
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = 0.8 * design(i, 0) - 0.4 * design(i, 2) + rng.next_normal();
  }
  const LassoPath path = lasso_path(design, y, {});
  const Eigen::VectorXd yc = y.array() - y.mean();
  double worst = 0.0;
  for (Eigen::Index l = 0; l < path.lambdas.size(); ++l) {
    for (Eigen::Index j = 0; j < q; ++j) {
      const double c = design.col(j).dot(yc) / static_cast<double>(n);
      const double expected =
          std::fabs(c) > path.lambdas[l]
              ? c - path.lambdas[l] * (c > 0 ? 1.0 : -1.0)
              : 0.0;
      worst = std::max(worst,
                       std::fabs(path.coefficients(l, j) - expected));
    }
  }
  check.passed = worst < 1e-8;
  check.detail = "worst deviation from soft threshold " + fmt(worst);
  return check;
}

OracleCheck pca_orthogonality_and_fractions() {
  OracleCheck check{"pca-orthogonality-fractions", false, ""};
  RngStream rng(0x9CA, 3);
  const Eigen::Index n = 1000, p = 16;
  Eigen::MatrixXd data(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) data(i, j) = rng.next_normal();
  }
  const PcaResult res = pca(data, true);
  const Eigen::MatrixXd gram = res.component_scores.transpose() *
                               res.component_scores /
                               static_cast<double>(n - 1);
  double offdiag = 0.0;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b) {
      if (a != b) offdiag = std::max(offdiag, std::fabs(gram(a, b)));
    }
  }
  const double sum_err = std::fabs(res.explained_fractions.sum() - 1.0);
  bool nonincreasing = true;
  for (Eigen::Index k = 1; k < p; ++k) {
    if (res.explained_fractions[k] > res.explained_fractions[k - 1] + 1e-14) {
      nonincreasing = false;
    }
  }
  check.passed = offdiag < 1e-10 && sum_err < 1e-10 && nonincreasing;
  check.detail = "max offdiag " + fmt(offdiag) + " fraction-sum error " +
                 fmt(sum_err);
  return check;
}

OracleCheck bayes_lm_draw_moments() {
  OracleCheck check{"bayes-lm-draw-moments", false, ""};
  RngStream rng(0xBA7E5, 5);
  const Eigen::Index n = 1000;  // q = 2 gives residual df 998
  Eigen::MatrixXd design(n, 2);
  design.col(0).setOnes();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 1) = rng.next_normal();
    y[i] = 0.7 + 0.5 * design(i, 1) + 1.3 * rng.next_normal();
  }
  const OlsFit fit = ols_fit(design, y);
  const double df = static_cast<double>(fit.residual_df);

  RngStream draw_rng(0xBA7E5, 6);
  const int reps = 10000;
  double sigma2_mean = 0.0;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> draws;
  draws.reserve(reps);
  for (int k = 0; k < reps; ++k) {
    const BayesLmDraw d = bayes_lm_draw(fit, fit.gram_inverse, draw_rng);
    sigma2_mean += d.sigma2;
    draws.emplace_back(d.coef[0], d.coef[1]);
    mean += draws.back();
  }
  sigma2_mean /= reps;
  mean /= reps;
  for (const auto& d : draws) cov += (d - mean) * (d - mean).transpose();
  cov /= (reps - 1);

  // inverse-chisq first moment: E[sigma2] = rv * df / (df - 2)
  const double sigma2_target = fit.residual_variance * df / (df - 2.0);
  const double sigma2_err = std::fabs(sigma2_mean / sigma2_target - 1.0);
  const Eigen::Matrix2d cov_target = sigma2_target * fit.gram_inverse;
  const double cov_err =
      (cov - cov_target).norm() / cov_target.norm();
  check.passed = sigma2_err < 0.01 && cov_err < 0.05;
  check.detail = "sigma2 rel err " + fmt(sigma2_err) + " cov Frobenius rel err " +
                 fmt(cov_err);
  return check;
}

OracleCheck dist_functions_vs_quadrature() {
  OracleCheck check{"dist-functions-vs-quadrature", false, ""};
  double worst = 0.0;
  for (double z = -6.0; z <= 6.0; z += 0.75) {
    worst = std::max(worst, std::fabs(normal_cdf(z) - quad_normal_cdf(z)));
  }
  for (double df : {1.0, 2.0, 5.0, 10.0, 50.0, 1000.0}) {
    for (double t = -6.0; t <= 6.0; t += 0.75) {
      worst = std::max(worst, std::fabs(t_cdf(t, df) - quad_t_cdf(t, df)));
    }
    for (double p : {0.6, 0.9, 0.95, 0.975, 0.99}) {
      const double qq = t_quantile(p, df);
      worst = std::max(worst, std::fabs(quad_t_cdf(qq, df) - p));
    }
  }
  const double frozen = std::fabs(t_quantile(0.975, 10.0) - 2.2281388520);
  check.passed = worst < 1e-9 && frozen < 5e-7;
  check.detail = "worst |cdf - quadrature| " + fmt(worst) +
                 ", t-table deviation " + fmt(frozen);
  return check;
}

}  // namespace

std::vector<OracleCheck> run_oracle_suite() {
  std::vector<OracleCheck> checks;
  checks.push_back(rubin_pooling_hand_values());
  checks.push_back(fmi_analytic_vs_empirical());
  checks.push_back(lasso_kkt_random_instances());
  checks.push_back(lasso_soft_threshold_closed_form());
  checks.push_back(pca_orthogonality_and_fractions());
  checks.push_back(bayes_lm_draw_moments());
  checks.push_back(dist_functions_vs_quadrature());
  return checks;
}

}  // namespace misim
