#include "misim/datagen.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "misim/dist.hpp"
#include "misim/errors.hpp"
#include "misim/linalg.hpp"

namespace misim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_correlation_matrix(const Eigen::MatrixXd& sigma, Eigen::Index p) {
  if (sigma.rows() != p || sigma.cols() != p) {
    throw ConfigError("sigma_a must be p x p");
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::fabs(sigma(i, i) - 1.0) > 1e-8) {
      throw ConfigError("sigma_a must have unit diagonal");
    }
  }
}

}  // namespace

Eigen::Index StudyData::n_missing() const {
  Eigen::Index k = 0;
  for (auto b : miss_y) k += b;
  return k;
}

ScenarioConfig derive_generative_params(ScenarioConfig cfg) {
  if (cfg.n < 1 || cfg.p < 1) throw ConfigError("scenario needs n >= 1, p >= 1");
  if (cfg.beta_a.has_value() == cfg.target_corr.has_value()) {
    throw ConfigError("supply exactly one of beta_a / target_corr");
  }
  check_correlation_matrix(cfg.sigma_a, cfg.p);
  psd_transform(cfg.sigma_a);  // symmetry/PSD validation

  if (cfg.target_corr) {
    if (cfg.target_corr->size() != cfg.p) {
      throw ConfigError("target_corr must have length p");
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cfg.sigma_a);
    if (ldlt.info() != Eigen::Success) {
      throw ConfigError("sigma_a is not invertible for target_corr");
    }
    cfg.beta_a = ldlt.solve(*cfg.target_corr);
  } else {
    if (cfg.beta_a->size() != cfg.p) {
      throw ConfigError("beta_a must have length p");
    }
    if (!cfg.sigma_a.isIdentity(1e-12)) {
      throw ConfigError("beta_a may only be supplied with sigma_a = identity");
    }
  }

  const Eigen::VectorXd& beta = *cfg.beta_a;
  const double explained = cfg.beta_x * cfg.beta_x +
                           beta.dot(cfg.sigma_a * beta);
  const double sigma_eps = 1.0 - explained;
  if (sigma_eps <= 0.0) {
    throw InfeasibleCorrelationsError(
        "requested correlations are infeasible (sigma_eps = " +
        std::to_string(sigma_eps) + ")");
  }
  cfg.sigma_eps = sigma_eps;
  return cfg;
}

StudyData generate_complete(const ScenarioConfig& cfg, RngStream& rng) {
  if (!cfg.beta_a || !cfg.sigma_eps) {
    throw ConfigError("generate_complete: derive parameters first");
  }
  const Eigen::Index n = cfg.n;
  const Eigen::Index p = cfg.p;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p + 1, p + 1);
  cov(0, 0) = 1.0;
  cov.bottomRightCorner(p, p) = cfg.sigma_a;

  const Eigen::MatrixXd xa =
      mvn_sample(Eigen::VectorXd::Zero(p + 1), cov, n, rng);

  StudyData data;
  data.x = xa.col(0);
  data.aux = xa.rightCols(p);
  const double eps_sd = std::sqrt(*cfg.sigma_eps);
  Eigen::VectorXd eps(n);
  for (Eigen::Index i = 0; i < n; ++i) eps[i] = eps_sd * rng.next_normal();
  data.y = cfg.beta_x * data.x + data.aux * (*cfg.beta_a) + eps;
  data.y_true = data.y;
  data.miss_y.assign(static_cast<std::size_t>(n), 0);
  return data;
}

double calibrate_gamma0(const ScenarioConfig& cfg) {
  if (cfg.gamma_a.size() != cfg.p) {
    throw ConfigError("calibrate_gamma0: gamma_a must have length p");
  }
  if (!(cfg.target_miss > 0.0 && cfg.target_miss < 1.0)) {
    throw ConfigError("calibrate_gamma0: target_miss outside (0,1)");
  }
  if (cfg.calibration_n < 1000) {
    throw ConfigError("calibrate_gamma0: calibration_n too small");
  }

  // gamma_a^t A reduces to w^t z with w = T^t gamma_a, z standard normal;
  // the draw set is fixed once so bisection sees a monotone function.
  const Eigen::MatrixXd t = psd_transform(cfg.sigma_a);
  const Eigen::VectorXd w = t.transpose() * cfg.gamma_a;
  RngStream rng(cfg.calibration_seed, 0xCA11B);
  const Eigen::Index nsim = static_cast<Eigen::Index>(cfg.calibration_n);
  Eigen::VectorXd s(nsim);
  Eigen::VectorXd z(cfg.p);
  for (Eigen::Index i = 0; i < nsim; ++i) {
    for (Eigen::Index j = 0; j < cfg.p; ++j) z[j] = rng.next_normal();
    s[i] = w.dot(z);
  }

  const auto miss_rate = [&](double g0) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < nsim; ++i) acc += expit(g0 + s[i]);
    return acc / static_cast<double>(nsim);
  };

  double lo = -50.0, hi = 50.0;
  if (miss_rate(lo) > cfg.target_miss || miss_rate(hi) < cfg.target_miss) {
    throw CalibrationError("calibrate_gamma0: bracket [-50, 50] failed");
  }
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (miss_rate(mid) < cfg.target_miss) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void impose_missingness(StudyData& data, const ScenarioConfig& cfg,
                        RngStream& rng) {
  if (!cfg.gamma0) throw ConfigError("impose_missingness: gamma0 not calibrated");
  if (cfg.gamma_a.size() != data.n_aux()) {
    throw ConfigError("impose_missingness: gamma_a length mismatch");
  }
  const Eigen::Index n = data.rows();
  const Eigen::VectorXd eta =
      (data.aux * cfg.gamma_a).array() + *cfg.gamma0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.next_uniform();
    if (u < expit(eta[i])) {
      data.miss_y[static_cast<std::size_t>(i)] = 1;
      data.y[i] = kNaN;
    } else {
      data.miss_y[static_cast<std::size_t>(i)] = 0;
    }
  }
}

Eigen::VectorXd corr_with_outcome(const ScenarioConfig& cfg) {
  if (!cfg.beta_a) throw ConfigError("corr_with_outcome: derive parameters first");
  return cfg.sigma_a * (*cfg.beta_a);
}

Eigen::MatrixXd block_exchangeable_corr(const std::vector<int>& block_sizes,
                                        double within) {
  if (!(within > -1.0 && within < 1.0)) {
    throw ConfigError("block correlation must be in (-1, 1)");
  }
  Eigen::Index p = 0;
  for (int s : block_sizes) {
    if (s < 1) throw ConfigError("block sizes must be positive");
    p += s;
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
  Eigen::Index off = 0;
  for (int s : block_sizes) {
    out.block(off, off, s, s).setConstant(within);
    for (int i = 0; i < s; ++i) out(off + i, off + i) = 1.0;
    off += s;
  }
  return out;
}

Eigen::MatrixXd load_corr_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open correlation CSV: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("bad numeric cell in " + path + ": '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const std::size_t p = rows.size();
  if (p == 0) throw ConfigError("empty correlation CSV: " + path);
  Eigen::MatrixXd out(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    if (rows[i].size() != p) {
      throw ConfigError("correlation CSV is not square: " + path);
    }
    for (std::size_t j = 0; j < p; ++j) out(i, j) = rows[i][j];
  }
  return out;
}

ScenarioConfig basic_preset() {
  ScenarioConfig cfg;
  cfg.name = "basic";
  cfg.n = 1000;
  cfg.p = 16;
  cfg.beta_x = 0.3;
  Eigen::VectorXd beta(16);
  beta << 0, 0, 0, 0, 0.1, 0.1, 0.1, 0.1, 0.2, 0.2, 0.2, 0.2, 0.4, 0.4, 0.4, 0.4;
  cfg.beta_a = beta;
  cfg.sigma_a = Eigen::MatrixXd::Identity(16, 16);
  cfg.target_miss = 0.2;
  // OR 1.2 per SD on the first variable of each beta-level pair
  cfg.gamma_a = Eigen::VectorXd::Zero(16);
  for (Eigen::Index j : {0, 2, 4, 6, 8, 10, 12, 14}) {
    cfg.gamma_a[j] = std::log(1.2);
  }
  cfg.m = 20;
  cfg.k_reps = 500;
  cfg.master_seed = 1001;
  return cfg;
}

ScenarioConfig extreme_preset() {
  ScenarioConfig cfg;
  cfg.name = "extreme";
  cfg.n = 250;
  cfg.p = 50;
  cfg.beta_x = 0.3;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(50);
  for (Eigen::Index j = 38; j < 42; ++j) beta[j] = 0.1;
  for (Eigen::Index j = 42; j < 46; ++j) beta[j] = 0.2;
  for (Eigen::Index j = 46; j < 50; ++j) beta[j] = 0.4;
  cfg.beta_a = beta;
  cfg.sigma_a = Eigen::MatrixXd::Identity(50, 50);
  cfg.target_miss = 0.5;
  // OR 2.0 per SD on two junk variables plus one of each nonzero pair
  cfg.gamma_a = Eigen::VectorXd::Zero(50);
  for (Eigen::Index j : {0, 2, 38, 40, 42, 44, 46, 48}) {
    cfg.gamma_a[j] = std::log(2.0);
  }
  cfg.m = 20;
  cfg.k_reps = 300;
  cfg.master_seed = 2002;
  return cfg;
}

ScenarioConfig realistic_shaped_preset() {
  ScenarioConfig cfg;
  cfg.name = "realistic-shaped";
  cfg.n = 4983;
  cfg.p = 81;
  cfg.beta_x = 0.3;
  // Nine exchangeable blocks of nine stand in for the unavailable estimated
  // matrix; per-block outcome correlations span weak to strong.
  cfg.sigma_a = block_exchangeable_corr(std::vector<int>(9, 9), 0.6);
  const double block_corr[9] = {0.45, 0.30, 0.30, 0.15, 0.15,
                                0.15, 0.15, 0.05, 0.05};
  Eigen::VectorXd target(81);
  for (int b = 0; b < 9; ++b) {
    for (int i = 0; i < 9; ++i) target[9 * b + i] = block_corr[b];
  }
  cfg.target_corr = target;
  cfg.target_miss = 0.174;
  cfg.gamma_a = Eigen::VectorXd::Zero(81);
  for (int b = 0; b < 9; ++b) {
    cfg.gamma_a[9 * b + 0] = std::log(1.2);
    cfg.gamma_a[9 * b + 1] = std::log(1.2);
    cfg.gamma_a[9 * b + 2] = std::log(0.8);
  }
  cfg.m = 20;
  cfg.k_reps = 100;
  cfg.master_seed = 3003;
  return cfg;
}

}  // namespace misim
