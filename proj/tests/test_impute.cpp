#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "misim/datagen.hpp"
#include "misim/errors.hpp"
#include "misim/impute.hpp"
#include "misim/rng.hpp"

using namespace misim;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

StudyData seeded_basic(std::uint64_t seed, bool with_missing = true) {
  ScenarioConfig cfg = derive_generative_params(basic_preset());
  cfg.gamma0 = calibrate_gamma0(cfg);
  RngStream gen(seed, 1);
  StudyData d = generate_complete(cfg, gen);
  if (with_missing) {
    RngStream miss(seed, 2);
    impose_missingness(d, cfg, miss);
  }
  return d;
}

SelectionResult full_selection(const StudyData& d) {
  SelectionResult sel;
  for (Eigen::Index j = 0; j < d.n_aux(); ++j) sel.selected_aux.push_back(j);
  return sel;
}

}  // namespace

TEST_CASE("no missing rows leaves the outcome untouched") {
  const StudyData d = seeded_basic(41, /*with_missing=*/false);
  RngStream rng(41, 3);
  const Eigen::VectorXd y = impute_norm(d, build_predictors(d, full_selection(d)), rng);
  CHECK((y - d.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("an exact linear outcome is imputed exactly") {
  const Eigen::Index n = 40;
  StudyData d;
  d.x.resize(n);
  d.aux.resize(n, 1);
  d.y.resize(n);
  RngStream rng(42, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.x[i] = rng.next_normal();
    d.aux(i, 0) = rng.next_normal();
    d.y[i] = 2.0 + 0.5 * d.x[i] - 0.25 * d.aux(i, 0);
  }
  d.y_true = d.y;
  d.miss_y.assign(n, 0);
  for (Eigen::Index i = 0; i < 10; ++i) {
    d.miss_y[static_cast<std::size_t>(i)] = 1;
    d.y[i] = kNaN;
  }
  RngStream imp(42, 2);
  const Eigen::VectorXd y = impute_norm(d, build_predictors(d, full_selection(d)), imp);
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(std::fabs(y[i] - d.y_true[i]) < 1e-8);
  }
}

TEST_CASE("observed entries are never modified") {
  const StudyData d = seeded_basic(43);
  RngStream rng(43, 3);
  const Eigen::MatrixXd preds = build_predictors(d, full_selection(d));
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd y = impute_norm(d, preds, rng);
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      if (!d.miss_y[static_cast<std::size_t>(i)]) CHECK(y[i] == d.y[i]);
      else CHECK(std::isfinite(y[i]));
    }
  }
}

TEST_CASE("long-run pooled mean recovers the pre-deletion mean") {
  const StudyData d = seeded_basic(44);
  const Eigen::MatrixXd preds = build_predictors(d, full_selection(d));
  RngStream rng(44, 3);
  const int m = 2000;
  std::vector<double> est, var;
  for (int k = 0; k < m; ++k) {
    const Eigen::VectorXd y = impute_norm(d, preds, rng);
    const Analysis a = analyze(y, d.x, Estimand::MeanY);
    est.push_back(a.estimate);
    var.push_back(a.se * a.se);
  }
  const PooledEstimate pooled =
      pool_rubin(est, var, static_cast<double>(d.rows() - 1), Estimand::MeanY);
  const double truth = d.y_true.mean();
  CHECK(std::fabs(pooled.q_bar - truth) < 3.0 * std::sqrt(pooled.t_var));
}

TEST_CASE("pmm with one donor copies the nearest respondent") {
  StudyData d;
  const Eigen::Index n = 12;
  d.x.resize(n);
  d.aux.resize(n, 0);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.x[i] = static_cast<double>(i);
    d.y[i] = 3.0 * static_cast<double>(i);
  }
  d.y_true = d.y;
  d.miss_y.assign(n, 0);
  d.miss_y[5] = 1;
  d.y[5] = kNaN;
  Eigen::MatrixXd preds(n, 1);
  preds.col(0) = d.x;
  RngStream rng(45, 1);
  const Eigen::VectorXd y = impute_pmm(d, preds, 1, rng);
  // nearest predicted mean is row 4 or 6; either way the imputed value is
  // an observed neighbor
  CHECK((y[5] == 12.0 || y[5] == 18.0));
}

TEST_CASE("pmm imputations stay inside the observed support") {
  const StudyData d = seeded_basic(46);
  const Eigen::MatrixXd preds = build_predictors(d, full_selection(d));
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (!d.miss_y[static_cast<std::size_t>(i)]) {
      ymin = std::min(ymin, d.y[i]);
      ymax = std::max(ymax, d.y[i]);
    }
  }
  RngStream rng(46, 3);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd y = impute_pmm(d, preds, 5, rng);
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      CHECK(y[i] >= ymin);
      CHECK(y[i] <= ymax);
    }
  }
}

TEST_CASE("pmm and normal-draw imputation agree on the pooled mean") {
  const StudyData d = seeded_basic(47);
  const Eigen::MatrixXd preds = build_predictors(d, full_selection(d));
  const int m = 200;
  std::vector<double> est_n, var_n, est_p, var_p;
  RngStream rng_n(47, 3), rng_p(47, 4);
  for (int k = 0; k < m; ++k) {
    const Analysis an =
        analyze(impute_norm(d, preds, rng_n), d.x, Estimand::MeanY);
    est_n.push_back(an.estimate);
    var_n.push_back(an.se * an.se);
    const Analysis ap =
        analyze(impute_pmm(d, preds, 5, rng_p), d.x, Estimand::MeanY);
    est_p.push_back(ap.estimate);
    var_p.push_back(ap.se * ap.se);
  }
  const double dn = static_cast<double>(d.rows() - 1);
  const PooledEstimate pn = pool_rubin(est_n, var_n, dn, Estimand::MeanY);
  const PooledEstimate pp = pool_rubin(est_p, var_p, dn, Estimand::MeanY);
  CHECK(std::fabs(pn.q_bar - pp.q_bar) < 0.05);
}

TEST_CASE("analyze handles the degenerate cases") {
  Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 3.25);
  Eigen::VectorXd x(10);
  for (int i = 0; i < 10; ++i) x[i] = i;
  const Analysis mean = analyze(y, x, Estimand::MeanY);
  CHECK(mean.estimate == 3.25);
  CHECK(mean.se == 0.0);

  const Eigen::VectorXd y2 = 0.3 * x;
  const Analysis slope = analyze(y2, x, Estimand::BetaX);
  CHECK(slope.estimate == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(slope.se < 1e-10);
}

TEST_CASE("complete-data slope is close to its target") {
  const StudyData d = seeded_basic(48, /*with_missing=*/false);
  const Analysis a = analyze(d.y, d.x, Estimand::BetaX);
  CHECK(std::fabs(a.estimate - 0.3) < 3.0 * a.se);
}

TEST_CASE("rubin pooling on hand-computed values") {
  const PooledEstimate pooled =
      pool_rubin({1.0, 2.0}, {0.5, 0.5}, 1e9, Estimand::MeanY);
  CHECK(pooled.q_bar == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(pooled.w == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pooled.b == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pooled.t_var == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(pooled.fmi == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(pooled.t_var == pooled.w + (1.0 + 1.0 / 2.0) * pooled.b);
}

TEST_CASE("identical estimates collapse the between variance") {
  const PooledEstimate pooled =
      pool_rubin({2.0, 2.0, 2.0}, {0.25, 0.25, 0.25}, 100.0, Estimand::MeanY);
  CHECK(pooled.b == 0.0);
  CHECK(pooled.t_var == pooled.w);
  CHECK(pooled.fmi == 0.0);
  CHECK(std::isinf(pooled.df));
  CHECK(pooled.ci_low == doctest::Approx(2.0 - 1.959963985 * 0.5).epsilon(1e-8));
}

TEST_CASE("pooling needs at least two imputations") {
  CHECK_THROWS_AS(pool_rubin({1.0}, {1.0}, 10.0, Estimand::MeanY), ConfigError);
}

TEST_CASE("cca equals the full analysis without missing data") {
  const StudyData d = seeded_basic(49, /*with_missing=*/false);
  const PooledEstimate cca = cca_analyze(d, Estimand::MeanY);
  const Analysis full = analyze(d.y, d.x, Estimand::MeanY);
  CHECK(cca.q_bar == full.estimate);
  CHECK(std::sqrt(cca.t_var) == doctest::Approx(full.se).epsilon(1e-14));
}

TEST_CASE("run_strategy on complete data degenerates to the plain analysis") {
  const StudyData d = seeded_basic(50, /*with_missing=*/false);
  ImputationModelSpec model;
  model.m = 5;
  RngStream sel(50, 3), imp(50, 4);
  const StrategyRun run =
      run_strategy(d, strategy_spec(StrategyKind::Full), model, sel, imp);
  REQUIRE(run.converged);
  const Analysis mean = analyze(d.y, d.x, Estimand::MeanY);
  CHECK(run.mean_y.q_bar == doctest::Approx(mean.estimate).epsilon(1e-14));
  CHECK(run.mean_y.b == 0.0);
}

TEST_CASE("failures are folded into the convergence flag") {
  StudyData d = seeded_basic(51);
  // make nearly everything missing so the imputation model cannot be fit
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (i >= 5) {
      d.miss_y[static_cast<std::size_t>(i)] = 1;
      d.y[i] = kNaN;
    }
  }
  ImputationModelSpec model;
  model.m = 5;
  RngStream sel(51, 3), imp(51, 4);
  const StrategyRun run =
      run_strategy(d, strategy_spec(StrategyKind::Full), model, sel, imp);
  CHECK(!run.converged);
  CHECK(!run.failure.empty());
}

TEST_CASE("pooling identities hold on a real strategy run") {
  const StudyData d = seeded_basic(52);
  ImputationModelSpec model;
  model.m = 7;
  RngStream sel(52, 3), imp(52, 4);
  const StrategyRun run = run_strategy(
      d, strategy_spec(StrategyKind::QuickpredPt2), model, sel, imp);
  REQUIRE(run.converged);
  for (const PooledEstimate* est : {&run.mean_y, &run.beta_x}) {
    CHECK(est->t_var ==
          est->w + (1.0 + 1.0 / est->m_used) * est->b);
    CHECK(est->fmi ==
          doctest::Approx((1.0 + 1.0 / est->m_used) * est->b / est->t_var)
              .epsilon(1e-12));
    CHECK(est->ci_low <= est->q_bar);
    CHECK(est->q_bar <= est->ci_high);
  }
}
