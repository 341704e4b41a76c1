#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "misim/datagen.hpp"
#include "misim/dist.hpp"
#include "misim/errors.hpp"
#include "misim/rng.hpp"

using namespace misim;

namespace {

// Newton-IRLS logistic regression; independent oracle for the missingness
// odds ratios.
Eigen::VectorXd logistic_fit(const Eigen::MatrixXd& design,
                             const Eigen::VectorXd& outcome) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.cols());
  for (int it = 0; it < 25; ++it) {
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd mu(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu[i] = expit(eta[i]);
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    const Eigen::MatrixXd xtwx =
        design.transpose() * w.asDiagonal() * design;
    const Eigen::VectorXd grad = design.transpose() * (outcome - mu);
    const Eigen::VectorXd step = xtwx.ldlt().solve(grad);
    beta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-10) break;
  }
  return beta;
}

}  // namespace

TEST_CASE("variance decomposition arithmetic for the basic scenario") {
  const ScenarioConfig cfg = derive_generative_params(basic_preset());
  CHECK(*cfg.sigma_eps == doctest::Approx(0.07).epsilon(1e-12));
}

TEST_CASE("pure-noise outcome has unit residual variance") {
  ScenarioConfig cfg;
  cfg.name = "noise";
  cfg.n = 100;
  cfg.p = 3;
  cfg.beta_x = 0.0;
  cfg.beta_a = Eigen::VectorXd::Zero(3);
  cfg.sigma_a = Eigen::MatrixXd::Identity(3, 3);
  cfg.gamma_a = Eigen::VectorXd::Zero(3);
  const ScenarioConfig derived = derive_generative_params(cfg);
  CHECK(*derived.sigma_eps == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("junk auxiliaries contribute nothing to sigma_eps") {
  const ScenarioConfig cfg = derive_generative_params(extreme_preset());
  CHECK(*cfg.sigma_eps == doctest::Approx(0.07).epsilon(1e-12));
}

TEST_CASE("target_corr route inverts the auxiliary covariance") {
  ScenarioConfig cfg;
  cfg.name = "corr";
  cfg.n = 100;
  cfg.p = 2;
  cfg.beta_x = 0.2;
  cfg.sigma_a = Eigen::MatrixXd(2, 2);
  cfg.sigma_a << 1.0, 0.5, 0.5, 1.0;
  Eigen::VectorXd r(2);
  r << 0.3, 0.3;
  cfg.target_corr = r;
  cfg.gamma_a = Eigen::VectorXd::Zero(2);
  const ScenarioConfig derived = derive_generative_params(cfg);
  // exchangeable block: beta = r / (1 + rho)
  CHECK((*derived.beta_a)[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK((*derived.beta_a)[1] == doctest::Approx(0.2).epsilon(1e-12));
  const Eigen::VectorXd back = corr_with_outcome(derived);
  CHECK(back[0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("infeasible correlations are rejected") {
  ScenarioConfig cfg;
  cfg.name = "bad";
  cfg.n = 10;
  cfg.p = 2;
  cfg.beta_x = 0.9;
  Eigen::VectorXd beta(2);
  beta << 0.5, 0.5;
  cfg.beta_a = beta;
  cfg.sigma_a = Eigen::MatrixXd::Identity(2, 2);
  cfg.gamma_a = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(derive_generative_params(cfg), InfeasibleCorrelationsError);
}

TEST_CASE("exactly one of beta_a / target_corr") {
  ScenarioConfig cfg = basic_preset();
  cfg.target_corr = *cfg.beta_a;
  CHECK_THROWS_AS(derive_generative_params(cfg), ConfigError);
  cfg.beta_a.reset();
  cfg.target_corr.reset();
  CHECK_THROWS_AS(derive_generative_params(cfg), ConfigError);
}

TEST_CASE("noise-free outcome is an exact linear function") {
  ScenarioConfig cfg;
  cfg.name = "exact";
  cfg.n = 50;
  cfg.p = 2;
  cfg.beta_x = 0.3;
  cfg.beta_a = Eigen::VectorXd::Zero(2);
  cfg.sigma_a = Eigen::MatrixXd::Identity(2, 2);
  cfg.sigma_eps = 0.0;  // bypass derivation on purpose
  cfg.gamma_a = Eigen::VectorXd::Zero(2);
  RngStream rng(1, 1);
  const StudyData data = generate_complete(cfg, rng);
  CHECK((data.y - 0.3 * data.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generated correlation matches the target at large n") {
  ScenarioConfig cfg = derive_generative_params(basic_preset());
  cfg.n = 100000;
  RngStream rng(99, 1);
  const StudyData data = generate_complete(cfg, rng);
  const Eigen::VectorXd a16 = data.aux.col(15);
  const double cxy =
      ((a16.array() - a16.mean()) * (data.y.array() - data.y.mean())).sum();
  const double corr = cxy / std::sqrt((a16.array() - a16.mean()).square().sum() *
                                      (data.y.array() - data.y.mean()).square().sum());
  CHECK(std::fabs(corr - 0.4) < 0.01);
}

TEST_CASE("basic dimensions match the preset") {
  ScenarioConfig cfg = derive_generative_params(basic_preset());
  RngStream rng(99, 2);
  const StudyData data = generate_complete(cfg, rng);
  CHECK(data.rows() == 1000);
  CHECK(data.aux.cols() == 16);
  CHECK(data.n_missing() == 0);
}

TEST_CASE("pre-deletion outcome variance is one") {
  ScenarioConfig cfg = derive_generative_params(basic_preset());
  cfg.n = 1000000;
  RngStream rng(99, 3);
  const StudyData data = generate_complete(cfg, rng);
  const double mean = data.y.mean();
  const double var = (data.y.array() - mean).square().sum() /
                     static_cast<double>(data.rows() - 1);
  CHECK(std::fabs(var - 1.0) < 0.01);
}

TEST_CASE("calibration with no covariate dependence is the logit") {
  ScenarioConfig cfg;
  cfg.name = "flat";
  cfg.n = 10;
  cfg.p = 2;
  cfg.beta_a = Eigen::VectorXd::Zero(2);
  cfg.sigma_a = Eigen::MatrixXd::Identity(2, 2);
  cfg.gamma_a = Eigen::VectorXd::Zero(2);
  cfg.target_miss = 0.2;
  cfg.calibration_n = 10000;  // exact regardless of draws
  const double g0 = calibrate_gamma0(cfg);
  CHECK(std::fabs(g0 - std::log(0.2 / 0.8)) < 5e-4);
}

TEST_CASE("calibrated intercepts reproduce the target missingness") {
  for (bool extreme : {false, true}) {
    ScenarioConfig cfg =
        derive_generative_params(extreme ? extreme_preset() : basic_preset());
    cfg.gamma0 = calibrate_gamma0(cfg);
    cfg.n = 100000;
    RngStream gen(2024, extreme ? 11 : 10);
    StudyData data = generate_complete(cfg, gen);
    RngStream miss(2024, extreme ? 21 : 20);
    impose_missingness(data, cfg, miss);
    const double frac = static_cast<double>(data.n_missing()) /
                        static_cast<double>(data.rows());
    CHECK(std::fabs(frac - cfg.target_miss) < 0.005);
  }
}

TEST_CASE("guard intercept produces no missingness") {
  ScenarioConfig cfg = derive_generative_params(basic_preset());
  cfg.gamma_a = Eigen::VectorXd::Zero(16);
  cfg.gamma0 = -50.0;
  RngStream gen(7, 1);
  StudyData data = generate_complete(cfg, gen);
  RngStream miss(7, 2);
  impose_missingness(data, cfg, miss);
  CHECK(data.n_missing() == 0);
  CHECK((data.y - data.y_true).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mean missing fraction over 500 replicates stays near 20%") {
  ScenarioConfig cfg = derive_generative_params(basic_preset());
  cfg.gamma0 = calibrate_gamma0(cfg);
  double acc = 0.0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    RngStream gen(cfg.master_seed, 1000 + r);
    StudyData data = generate_complete(cfg, gen);
    RngStream miss(cfg.master_seed, 2000 + r);
    impose_missingness(data, cfg, miss);
    acc += static_cast<double>(data.n_missing()) /
           static_cast<double>(data.rows());
  }
  const double mean_frac = acc / reps;
  CHECK(mean_frac > 0.19);
  CHECK(mean_frac < 0.21);
}

TEST_CASE("missingness odds ratio is recovered by logistic regression") {
  ScenarioConfig cfg = derive_generative_params(basic_preset());
  cfg.gamma0 = calibrate_gamma0(cfg);
  cfg.n = 1000000;
  RngStream gen(4242, 1);
  StudyData data = generate_complete(cfg, gen);
  RngStream miss(4242, 2);
  impose_missingness(data, cfg, miss);

  // joint logistic regression of M_Y on the associated auxiliaries
  std::vector<Eigen::Index> assoc;
  for (Eigen::Index j = 0; j < cfg.p; ++j) {
    if (cfg.gamma_a[j] != 0.0) assoc.push_back(j);
  }
  Eigen::MatrixXd design(cfg.n, 1 + static_cast<Eigen::Index>(assoc.size()));
  design.col(0).setOnes();
  for (std::size_t k = 0; k < assoc.size(); ++k) {
    Eigen::VectorXd col = data.aux.col(assoc[k]);
    col.array() -= col.mean();
    col /= std::sqrt(col.squaredNorm() / static_cast<double>(cfg.n - 1));
    design.col(1 + static_cast<Eigen::Index>(k)) = col;
  }
  Eigen::VectorXd outcome(cfg.n);
  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    outcome[i] = static_cast<double>(data.miss_y[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd beta = logistic_fit(design, outcome);
  for (std::size_t k = 0; k < assoc.size(); ++k) {
    const double odds = std::exp(beta[1 + static_cast<Eigen::Index>(k)]);
    CHECK(std::fabs(odds - 1.2) < 0.02);
  }
}

TEST_CASE("missingness depends only on the auxiliaries") {
  ScenarioConfig cfg = derive_generative_params(basic_preset());
  cfg.gamma0 = calibrate_gamma0(cfg);
  RngStream gen(31, 7);
  StudyData a = generate_complete(cfg, gen);
  StudyData b = a;
  b.y.reverseInPlace();  // different outcomes, same auxiliaries
  b.y_true = b.y;
  RngStream miss_a(31, 8), miss_b(31, 8);
  impose_missingness(a, cfg, miss_a);
  impose_missingness(b, cfg, miss_b);
  CHECK(a.miss_y == b.miss_y);
}

TEST_CASE("realistic-shaped preset is feasible end to end") {
  ScenarioConfig cfg = realistic_shaped_preset();
  cfg.calibration_n = 20000;  // smoke-scale calibration
  const ScenarioConfig derived = derive_generative_params(cfg);
  CHECK(*derived.sigma_eps > 0.0);
  const double g0 = calibrate_gamma0(derived);
  CHECK(std::fabs(g0) < 10.0);
}

TEST_CASE("correlation CSV loader round-trips a matrix") {
  const Eigen::MatrixXd m = block_exchangeable_corr({2, 1}, 0.4);
  const std::string path = "test_corr_tmp.csv";
  {
    std::ofstream out(path);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out << (j ? "," : "") << m(i, j);
      out << "\n";
    }
  }
  const Eigen::MatrixXd loaded = load_corr_csv(path);
  CHECK((loaded - m).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_corr_csv("does_not_exist.csv"), ConfigError);
}
