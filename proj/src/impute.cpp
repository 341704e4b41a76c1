#include "misim/impute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "misim/dist.hpp"
#include "misim/errors.hpp"

namespace misim {

namespace {

struct SplitRows {
  std::vector<Eigen::Index> obs, mis;
};

SplitRows split_rows(const StudyData& data) {
  SplitRows out;
  for (std::size_t i = 0; i < data.miss_y.size(); ++i) {
    (data.miss_y[i] ? out.mis : out.obs).push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

// Imputation model fit on respondents, reusable across the m draws.
class LinearImputer {
 public:
  LinearImputer(const StudyData& data, const Eigen::MatrixXd& predictors)
      : data_(data), rows_(split_rows(data)) {
    const Eigen::Index n = data.rows();
    if (predictors.rows() != n) {
      throw ConfigError("impute: predictor rows mismatch");
    }
    design_all_.resize(n, 1 + predictors.cols());
    design_all_.col(0).setOnes();
    design_all_.rightCols(predictors.cols()) = predictors;

    const auto n_obs = static_cast<Eigen::Index>(rows_.obs.size());
    // respondents >= predictor count (without intercept) + 2
    if (n_obs < design_all_.cols() + 1) {
      throw InsufficientDataError("impute: too few respondents for the model");
    }
    Eigen::MatrixXd design_obs(n_obs, design_all_.cols());
    Eigen::VectorXd y_obs(n_obs);
    for (Eigen::Index i = 0; i < n_obs; ++i) {
      design_obs.row(i) = design_all_.row(rows_.obs[static_cast<std::size_t>(i)]);
      y_obs[i] = data.y[rows_.obs[static_cast<std::size_t>(i)]];
    }
    OlsFit fit = ols_fit(design_obs, y_obs);
    Eigen::MatrixXd gram = fit.gram_inverse;
    sampler_.emplace(std::move(fit), gram);
  }

  Eigen::VectorXd draw_norm(RngStream& rng) const {
    Eigen::VectorXd y = data_.y;
    if (rows_.mis.empty()) return y;
    const BayesLmDraw draw = sampler_->draw(rng);
    const double sd = std::sqrt(draw.sigma2);
    for (const Eigen::Index i : rows_.mis) {
      y[i] = design_all_.row(i).dot(draw.coef) + sd * rng.next_normal();
    }
    return y;
  }

  Eigen::VectorXd draw_pmm(int donors, RngStream& rng) const {
    if (donors < 1) throw ConfigError("pmm: donors must be >= 1");
    Eigen::VectorXd y = data_.y;
    if (rows_.mis.empty()) return y;
    const auto n_obs = static_cast<Eigen::Index>(rows_.obs.size());
    if (n_obs < donors) throw InsufficientDataError("pmm: too few donors");

    // type-1 matching: drawn parameters predict the missing rows, the OLS
    // fit predicts the observed rows
    const BayesLmDraw draw = sampler_->draw(rng);
    Eigen::VectorXd eta_obs(n_obs);
    for (Eigen::Index k = 0; k < n_obs; ++k) {
      eta_obs[k] = design_all_.row(rows_.obs[static_cast<std::size_t>(k)])
                       .dot(sampler_->fit().coefficients);
    }
    std::vector<std::pair<double, Eigen::Index>> ranked(
        static_cast<std::size_t>(n_obs));
    for (const Eigen::Index i : rows_.mis) {
      const double eta = design_all_.row(i).dot(draw.coef);
      for (Eigen::Index k = 0; k < n_obs; ++k) {
        ranked[static_cast<std::size_t>(k)] = {
            std::fabs(eta_obs[k] - eta), rows_.obs[static_cast<std::size_t>(k)]};
      }
      std::partial_sort(ranked.begin(), ranked.begin() + donors, ranked.end());
      const auto pick = static_cast<Eigen::Index>(
          rng.next_uniform() * static_cast<double>(donors));
      y[i] = data_.y[ranked[static_cast<std::size_t>(
                                std::min<Eigen::Index>(pick, donors - 1))]
                         .second];
    }
    return y;
  }

 private:
  const StudyData& data_;
  SplitRows rows_;
  Eigen::MatrixXd design_all_;
  std::optional<BayesLmSampler> sampler_;
};

double infinity() { return std::numeric_limits<double>::infinity(); }

}  // namespace

std::string estimand_label(Estimand e) {
  return e == Estimand::MeanY ? "mean_y" : "beta_x";
}

Eigen::MatrixXd build_predictors(const StudyData& data,
                                 const SelectionResult& selection) {
  const Eigen::Index n = data.rows();
  if (selection.derived_predictors) {
    const Eigen::MatrixXd& scores = *selection.derived_predictors;
    if (scores.rows() != n) {
      throw ConfigError("derived predictors row mismatch");
    }
    Eigen::MatrixXd out(n, 1 + scores.cols());
    out.col(0) = data.x;
    out.rightCols(scores.cols()) = scores;
    return out;
  }
  Eigen::MatrixXd out(n, 1 + static_cast<Eigen::Index>(
                             selection.selected_aux.size()));
  out.col(0) = data.x;
  for (std::size_t k = 0; k < selection.selected_aux.size(); ++k) {
    out.col(1 + static_cast<Eigen::Index>(k)) =
        data.aux.col(selection.selected_aux[k]);
  }
  return out;
}

Eigen::VectorXd impute_norm(const StudyData& data,
                            const Eigen::MatrixXd& predictors,
                            RngStream& rng) {
  if (data.n_missing() == 0) return data.y;
  return LinearImputer(data, predictors).draw_norm(rng);
}

Eigen::VectorXd impute_pmm(const StudyData& data,
                           const Eigen::MatrixXd& predictors, int donors,
                           RngStream& rng) {
  if (data.n_missing() == 0) return data.y;
  return LinearImputer(data, predictors).draw_pmm(donors, rng);
}

Analysis analyze(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                 Estimand estimand) {
  const Eigen::Index n = y.size();
  if (estimand == Estimand::MeanY) {
    if (n < 2) throw InsufficientDataError("analyze: needs n >= 2");
    const double mean = y.mean();
    const double var =
        (y.array() - mean).square().sum() / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }
  if (x.size() != n) throw ConfigError("analyze: x/y length mismatch");
  Eigen::MatrixXd design(n, 2);
  design.col(0).setOnes();
  design.col(1) = x;
  const OlsFit fit = ols_fit(design, y);
  return {fit.coefficients[1],
          std::sqrt(std::max(0.0, fit.coef_covariance(1, 1)))};
}

PooledEstimate pool_rubin(const std::vector<double>& estimates,
                          const std::vector<double>& variances,
                          double n_complete_df, Estimand estimand) {
  const auto m = static_cast<int>(estimates.size());
  if (m < 2) throw ConfigError("pool_rubin: needs m >= 2");
  if (variances.size() != estimates.size()) {
    throw ConfigError("pool_rubin: estimates/variances length mismatch");
  }
  const double dm = static_cast<double>(m);

  PooledEstimate out;
  out.estimand = estimand;
  out.m_used = m;
  double q = 0.0, w = 0.0;
  for (int k = 0; k < m; ++k) {
    if (variances[static_cast<std::size_t>(k)] < 0.0) {
      throw ConfigError("pool_rubin: negative variance");
    }
    q += estimates[static_cast<std::size_t>(k)];
    w += variances[static_cast<std::size_t>(k)];
  }
  out.q_bar = q / dm;
  out.w = w / dm;
  double b = 0.0;
  for (int k = 0; k < m; ++k) {
    const double d = estimates[static_cast<std::size_t>(k)] - out.q_bar;
    b += d * d;
  }
  out.b = b / (dm - 1.0);
  out.t_var = out.w + (1.0 + 1.0 / dm) * out.b;

  double quantile;
  if (out.b == 0.0 || out.t_var == 0.0) {
    out.fmi = 0.0;
    out.df = infinity();
    quantile = normal_quantile(0.975);
  } else {
    out.fmi = (1.0 + 1.0 / dm) * out.b / out.t_var;
    // Barnard-Rubin: harmonic combination of the classical df with the
    // observed-data df
    const double nu_old =
        (dm - 1.0) * std::pow(1.0 + out.w / ((1.0 + 1.0 / dm) * out.b), 2);
    const double nu_com = n_complete_df;
    const double nu_obs =
        (nu_com + 1.0) / (nu_com + 3.0) * nu_com * (1.0 - out.fmi);
    out.df = nu_old * nu_obs / (nu_old + nu_obs);
    quantile = t_quantile(0.975, out.df);
  }
  const double half = quantile * std::sqrt(out.t_var);
  out.ci_low = out.q_bar - half;
  out.ci_high = out.q_bar + half;
  return out;
}

PooledEstimate cca_analyze(const StudyData& data, Estimand estimand) {
  const SplitRows rows = split_rows(data);
  const auto n_r = static_cast<Eigen::Index>(rows.obs.size());
  if (n_r < 3) throw InsufficientDataError("cca_analyze: < 3 respondents");
  Eigen::VectorXd y(n_r), x(n_r);
  for (Eigen::Index i = 0; i < n_r; ++i) {
    y[i] = data.y[rows.obs[static_cast<std::size_t>(i)]];
    x[i] = data.x[rows.obs[static_cast<std::size_t>(i)]];
  }
  const Analysis a = analyze(y, x, estimand);
  PooledEstimate out;
  out.estimand = estimand;
  out.q_bar = a.estimate;
  out.w = a.se * a.se;
  out.b = 0.0;
  out.t_var = out.w;
  out.fmi = 0.0;
  out.m_used = 1;
  out.df = static_cast<double>(n_r - (estimand == Estimand::MeanY ? 1 : 2));
  const double half = t_quantile(0.975, out.df) * a.se;
  out.ci_low = a.estimate - half;
  out.ci_high = a.estimate + half;
  return out;
}

StrategyRun run_strategy(const StudyData& data, const StrategySpec& strategy,
                         const ImputationModelSpec& model,
                         RngStream& select_rng, RngStream& impute_rng) {
  StrategyRun run;
  try {
    if (strategy.kind == StrategyKind::CCA) {
      run.selection = run_selection(data, strategy, select_rng);
      run.mean_y = cca_analyze(data, Estimand::MeanY);
      run.beta_x = cca_analyze(data, Estimand::BetaX);
      return run;
    }
    if (model.m < 2) throw ConfigError("imputation model needs m >= 2");
    run.selection = run_selection(data, strategy, select_rng);
    const Eigen::MatrixXd predictors = build_predictors(data, run.selection);
    const bool any_missing = data.n_missing() > 0;
    std::optional<LinearImputer> imputer;
    if (any_missing) imputer.emplace(data, predictors);

    std::vector<double> mean_est, mean_var, beta_est, beta_var;
    mean_est.reserve(model.m);
    for (int k = 0; k < model.m; ++k) {
      Eigen::VectorXd completed = data.y;
      if (any_missing) {
        for (int cycle = 0; cycle < std::max(1, model.iterations); ++cycle) {
          completed = model.method == ImputeMethod::NormDraw
                          ? imputer->draw_norm(impute_rng)
                          : imputer->draw_pmm(model.donors, impute_rng);
        }
      }
      const Analysis am = analyze(completed, data.x, Estimand::MeanY);
      const Analysis ab = analyze(completed, data.x, Estimand::BetaX);
      mean_est.push_back(am.estimate);
      mean_var.push_back(am.se * am.se);
      beta_est.push_back(ab.estimate);
      beta_var.push_back(ab.se * ab.se);
    }
    const double dn = static_cast<double>(data.rows());
    run.mean_y = pool_rubin(mean_est, mean_var, dn - 1.0, Estimand::MeanY);
    run.beta_x = pool_rubin(beta_est, beta_var, dn - 2.0, Estimand::BetaX);
  } catch (const std::exception& e) {
    run.converged = false;
    run.failure = e.what();
    run.mean_y.converged = false;
    run.beta_x.converged = false;
  }
  return run;
}

}  // namespace misim
