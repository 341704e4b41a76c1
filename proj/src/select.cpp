#include "misim/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "misim/errors.hpp"
#include "misim/lasso.hpp"
#include "misim/ols.hpp"
#include "misim/stats.hpp"

namespace misim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string aux_name(Eigen::Index j) { return "A" + std::to_string(j + 1); }

std::vector<Eigen::Index> respondent_rows(const StudyData& data) {
  std::vector<Eigen::Index> rows;
  rows.reserve(data.miss_y.size());
  for (std::size_t i = 0; i < data.miss_y.size(); ++i) {
    if (!data.miss_y[i]) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

double corr_or_zero(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  try {
    return pearson_corr(x, y).value_or(0.0);
  } catch (const InsufficientDataError&) {
    return 0.0;
  }
}

// Design [1, X, aux[selected]...] over the given rows.
Eigen::MatrixXd respondent_design(const StudyData& data,
                                  const std::vector<Eigen::Index>& rows,
                                  const std::vector<Eigen::Index>& selected) {
  const auto nr = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd design(nr, 2 + static_cast<Eigen::Index>(selected.size()));
  for (Eigen::Index i = 0; i < nr; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = data.x[rows[static_cast<std::size_t>(i)]];
    for (std::size_t k = 0; k < selected.size(); ++k) {
      design(i, 2 + static_cast<Eigen::Index>(k)) =
          data.aux(rows[static_cast<std::size_t>(i)], selected[k]);
    }
  }
  return design;
}

Eigen::VectorXd subvector(const Eigen::VectorXd& v,
                          const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[rows[k]];
  return out;
}

}  // namespace

StrategySpec strategy_spec(StrategyKind kind) {
  StrategySpec spec;
  spec.kind = kind;
  spec.cutoff = (kind == StrategyKind::QuickpredPt4) ? 0.4 : 0.2;
  return spec;
}

std::string strategy_label(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::QuickpredPt2: return "quickpred-pt2";
    case StrategyKind::QuickpredPt4: return "quickpred-pt4";
    case StrategyKind::PcAux: return "pcaux";
    case StrategyKind::Forward: return "forward";
    case StrategyKind::ForwardSw: return "forward-sw";
    case StrategyKind::ForwardFMI: return "forward-fmi";
    case StrategyKind::Tests: return "tests";
    case StrategyKind::Lasso: return "lasso";
    case StrategyKind::Full: return "full";
    case StrategyKind::CCA: return "cca";
  }
  throw ConfigError("unknown strategy kind");
}

StrategyKind strategy_kind_from_label(const std::string& label) {
  for (StrategyKind kind :
       {StrategyKind::QuickpredPt2, StrategyKind::QuickpredPt4,
        StrategyKind::PcAux, StrategyKind::Forward, StrategyKind::ForwardSw,
        StrategyKind::ForwardFMI, StrategyKind::Tests, StrategyKind::Lasso,
        StrategyKind::Full, StrategyKind::CCA}) {
    if (strategy_label(kind) == label) return kind;
  }
  throw ConfigError("unknown strategy label: '" + label + "'");
}

bool selects_variables(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::PcAux:
    case StrategyKind::Full:
    case StrategyKind::CCA:
      return false;
    default:
      return true;
  }
}

SelectionResult quickpred_select(const StudyData& data, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) {
    throw ConfigError("quickpred cutoff outside (0,1)");
  }
  const Eigen::Index p = data.n_aux();
  Eigen::VectorXd miss(data.rows());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    miss[i] = static_cast<double>(data.miss_y[static_cast<std::size_t>(i)]);
  }
  SelectionResult res;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double with_y = std::fabs(corr_or_zero(data.aux.col(j), data.y));
    const double with_m = std::fabs(corr_or_zero(data.aux.col(j), miss));
    const double crit = std::max(with_y, with_m);
    const bool take = crit > cutoff;
    res.trace.push_back({aux_name(j), crit, take ? "selected" : "rejected"});
    if (take) res.selected_aux.push_back(j);
  }
  return res;
}

SelectionResult pcaux_select(const StudyData& data, double variance_threshold) {
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0)) {
    throw ConfigError("pcaux variance threshold outside (0,1]");
  }
  const PcaResult pcs = pca(data.aux, /*standardize=*/true);
  double cum = 0.0;
  Eigen::Index c = 0;
  SelectionResult res;
  while (c < pcs.explained_fractions.size()) {
    cum += pcs.explained_fractions[c];
    ++c;
    res.trace.push_back({"PC" + std::to_string(c), cum, "included"});
    if (cum >= variance_threshold - 1e-12) break;
  }
  res.derived_predictors = pcs.component_scores.leftCols(c);
  return res;
}

SelectionResult forward_select(const StudyData& data, double alpha,
                               bool allow_removal) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha outside (0,1)");
  const Eigen::Index p = data.n_aux();
  const auto rows = respondent_rows(data);
  const Eigen::VectorXd y_obs = subvector(data.y, rows);

  SelectionResult res;
  std::vector<Eigen::Index> selected;
  std::set<Eigen::Index> remaining;
  for (Eigen::Index j = 0; j < p; ++j) remaining.insert(j);

  const long max_steps = 50 * static_cast<long>(p) + 50;
  long steps = 0;
  for (;;) {
    if (++steps > max_steps) {
      res.trace.push_back({"-", kNaN, "step-budget-stop"});
      break;
    }
    Eigen::Index best = -1;
    double best_p = std::numeric_limits<double>::infinity();
    for (Eigen::Index j : remaining) {
      std::vector<Eigen::Index> trial = selected;
      trial.push_back(j);
      OlsFit fit;
      try {
        fit = ols_fit(respondent_design(data, rows, trial), y_obs);
      } catch (const std::exception&) {
        res.trace.push_back({aux_name(j), kNaN, "skipped-singular"});
        continue;
      }
      const double pj = fit.wald_p_values[fit.wald_p_values.size() - 1];
      if (pj < best_p) {  // strict: ties keep the lowest column index
        best_p = pj;
        best = j;
      }
    }
    if (best < 0 || !(best_p < alpha)) {
      res.trace.push_back(
          {best < 0 ? "-" : aux_name(best), best_p, "stop"});
      break;
    }
    selected.push_back(best);
    remaining.erase(best);
    res.trace.push_back({aux_name(best), best_p, "added"});

    if (allow_removal) {
      // drop the worst offender, refit, repeat
      for (;;) {
        if (++steps > max_steps) break;
        OlsFit fit;
        try {
          fit = ols_fit(respondent_design(data, rows, selected), y_obs);
        } catch (const std::exception&) {
          break;
        }
        Eigen::Index worst = -1;
        double worst_p = alpha;
        for (std::size_t k = 0; k < selected.size(); ++k) {
          const double pk = fit.wald_p_values[2 + static_cast<Eigen::Index>(k)];
          if (pk > worst_p) {
            worst_p = pk;
            worst = static_cast<Eigen::Index>(k);
          }
        }
        if (worst < 0) break;
        const Eigen::Index removed = selected[static_cast<std::size_t>(worst)];
        selected.erase(selected.begin() + worst);
        remaining.insert(removed);
        res.trace.push_back({aux_name(removed), worst_p, "removed"});
      }
    }
  }
  std::sort(selected.begin(), selected.end());
  res.selected_aux = std::move(selected);
  return res;
}

FmiEstimate estimate_fmi_proxy(const StudyData& data,
                               const std::vector<Eigen::Index>& subset) {
  const Eigen::Index n = data.rows();
  const auto rows = respondent_rows(data);
  const auto n_r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n_mis = n - n_r;
  const double miss_frac = static_cast<double>(n_mis) / static_cast<double>(n);
  const Eigen::VectorXd y_obs = subvector(data.y, rows);

  const auto no_information = [&]() {
    FmiEstimate out;
    out.fmi = miss_frac;
    out.mu_hat = y_obs.mean();
    return out;
  };
  if (subset.empty()) return no_information();
  if (n_r < static_cast<Eigen::Index>(subset.size()) + 2) {
    throw InsufficientDataError("estimate_fmi_proxy: too few respondents");
  }

  // proxy = fitted values of Y on aux[subset] among respondents; a
  // rank-tolerant solve keeps the projection well defined even when the
  // subset is collinear or constant
  Eigen::MatrixXd design_obs(n_r, 1 + static_cast<Eigen::Index>(subset.size()));
  design_obs.col(0).setOnes();
  for (std::size_t k = 0; k < subset.size(); ++k) {
    design_obs.col(1 + static_cast<Eigen::Index>(k)) =
        subvector(data.aux.col(subset[k]), rows);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design_obs);
  qr.setThreshold(1e-10);
  const Eigen::VectorXd coef = qr.solve(y_obs);
  const Eigen::VectorXd proxy_obs = design_obs * coef;

  Eigen::MatrixXd design_all(n, design_obs.cols());
  design_all.col(0).setOnes();
  for (std::size_t k = 0; k < subset.size(); ++k) {
    design_all.col(1 + static_cast<Eigen::Index>(k)) = data.aux.col(subset[k]);
  }
  const Eigen::VectorXd proxy_all = design_all * coef;

  const double proxy_var_obs =
      (proxy_obs.array() - proxy_obs.mean()).square().sum();
  if (proxy_var_obs <= 0.0) return no_information();

  const auto rho = pearson_corr(y_obs, proxy_obs);
  if (!rho) return no_information();
  const double rho2 = std::min(1.0, (*rho) * (*rho));

  // regression estimator of mu_Y and its pattern-mixture variance ratio
  const double slope =
      (proxy_obs.array() - proxy_obs.mean())
          .cwiseProduct(y_obs.array() - y_obs.mean())
          .sum() /
      proxy_var_obs;
  FmiEstimate out;
  out.mu_hat = y_obs.mean() + slope * (proxy_all.mean() - proxy_obs.mean());
  const double dn = static_cast<double>(n);
  const double dnr = static_cast<double>(n_r);
  const double var_ratio = (1.0 / dn) / ((1.0 - rho2) / dnr + rho2 / dn);
  out.fmi = std::clamp(1.0 - var_ratio, 0.0, 1.0);
  return out;
}

SelectionResult forward_fmi_select(const StudyData& data, double tau) {
  if (!(tau > 0.0)) throw ConfigError("forward-fmi tau must be positive");
  SelectionResult res;
  const Eigen::Index n = data.rows();
  const Eigen::Index n_mis = data.n_missing();
  if (n_mis == 0) {
    res.trace.push_back({"-", 0.0, "no-missing"});
    return res;
  }
  const double miss_frac = static_cast<double>(n_mis) / static_cast<double>(n);
  const double min_gain = tau * miss_frac;
  const Eigen::Index p = data.n_aux();

  std::vector<Eigen::Index> selected;
  std::set<Eigen::Index> remaining;
  for (Eigen::Index j = 0; j < p; ++j) remaining.insert(j);
  double current_fmi = miss_frac;  // empty-proxy baseline

  for (Eigen::Index step = 0; step < p; ++step) {
    Eigen::Index best = -1;
    double best_fmi = std::numeric_limits<double>::infinity();
    for (Eigen::Index j : remaining) {
      std::vector<Eigen::Index> trial = selected;
      trial.push_back(j);
      double fmi;
      try {
        fmi = estimate_fmi_proxy(data, trial).fmi;
      } catch (const std::exception&) {
        res.trace.push_back({aux_name(j), kNaN, "skipped"});
        continue;
      }
      if (fmi < best_fmi) {
        best_fmi = fmi;
        best = j;
      }
    }
    if (best < 0) break;
    // the initial variable is always taken; later additions must cut the
    // FMI by at least tau * missing fraction
    if (step > 0 && !(current_fmi - best_fmi >= min_gain)) {
      res.trace.push_back({aux_name(best), best_fmi, "stop"});
      break;
    }
    selected.push_back(best);
    remaining.erase(best);
    res.trace.push_back({aux_name(best), best_fmi, "added"});
    current_fmi = best_fmi;
  }
  std::sort(selected.begin(), selected.end());
  res.selected_aux = std::move(selected);
  return res;
}

SelectionResult ttest_select(const StudyData& data, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha outside (0,1)");
  SelectionResult res;
  const Eigen::Index n = data.rows();
  const Eigen::Index n_mis = data.n_missing();
  const Eigen::Index n_obs = n - n_mis;
  if (n_mis < 2 || n_obs < 2) {
    res.trace.push_back({"-", kNaN, "group-too-small"});
    return res;
  }
  Eigen::VectorXd obs(n_obs), mis(n_mis);
  for (Eigen::Index j = 0; j < data.n_aux(); ++j) {
    Eigen::Index io = 0, im = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (data.miss_y[static_cast<std::size_t>(i)]) {
        mis[im++] = data.aux(i, j);
      } else {
        obs[io++] = data.aux(i, j);
      }
    }
    const WelchTest test = welch_t_test(obs, mis);
    const bool take = test.p_value < alpha;
    res.trace.push_back({aux_name(j), test.p_value,
                         take ? "selected" : "rejected"});
    if (take) res.selected_aux.push_back(j);
  }
  return res;
}

SelectionResult lasso_select(const StudyData& data, int cv_folds,
                             RngStream& rng) {
  const auto rows = respondent_rows(data);
  const auto n_r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = data.n_aux();

  Eigen::MatrixXd design(n_r, 1 + p);
  Eigen::VectorXd y_obs(n_r);
  for (Eigen::Index i = 0; i < n_r; ++i) {
    const Eigen::Index row = rows[static_cast<std::size_t>(i)];
    design(i, 0) = data.x[row];
    design.row(i).tail(p) = data.aux.row(row);
    y_obs[i] = data.y[row];
  }
  const std::vector<Eigen::Index> exempt = {0};  // X survives selection

  const LassoPath path = lasso_path(design, y_obs, exempt);
  CvResult cv = cv_lasso(design, y_obs, exempt, cv_folds, rng);

  SelectionResult res;
  res.trace.push_back({"lambda", cv.lambda_1se, "one-se-choice"});
  for (Eigen::Index j = 0; j < p; ++j) {
    const double coef = path.coefficients(cv.index_1se, 1 + j);
    const bool take = coef != 0.0;
    res.trace.push_back({aux_name(j), coef, take ? "selected" : "rejected"});
    if (take) res.selected_aux.push_back(j);
  }
  return res;
}

SelectionResult run_selection(const StudyData& data, const StrategySpec& spec,
                              RngStream& rng) {
  switch (spec.kind) {
    case StrategyKind::QuickpredPt2:
    case StrategyKind::QuickpredPt4:
      return quickpred_select(data, spec.cutoff);
    case StrategyKind::PcAux:
      return pcaux_select(data, spec.variance_threshold);
    case StrategyKind::Forward:
      return forward_select(data, spec.alpha, /*allow_removal=*/false);
    case StrategyKind::ForwardSw:
      return forward_select(data, spec.alpha, /*allow_removal=*/true);
    case StrategyKind::ForwardFMI:
      return forward_fmi_select(data, spec.tau);
    case StrategyKind::Tests:
      return ttest_select(data, spec.alpha);
    case StrategyKind::Lasso:
      return lasso_select(data, spec.cv_folds, rng);
    case StrategyKind::Full: {
      SelectionResult res;
      for (Eigen::Index j = 0; j < data.n_aux(); ++j) {
        res.selected_aux.push_back(j);
      }
      res.trace.push_back({"*", static_cast<double>(data.n_aux()), "full"});
      return res;
    }
    case StrategyKind::CCA: {
      SelectionResult res;
      res.trace.push_back({"-", 0.0, "complete-cases"});
      return res;
    }
  }
  throw ConfigError("unknown strategy kind");
}

}  // namespace misim
