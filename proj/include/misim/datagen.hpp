#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "misim/rng.hpp"

namespace misim {

/// Full generative + missingness + replication specification for one
/// simulation scenario. Exactly one of {beta_a, target_corr} is supplied;
/// derive_generative_params fills the other together with sigma_eps, and
/// calibrate_gamma0 fills gamma0.
struct ScenarioConfig {
  std::string name;
  Eigen::Index n = 0;  // sample size per replicate
  Eigen::Index p = 0;  // auxiliary count
  double beta_x = 0.3;
  std::optional<Eigen::VectorXd> beta_a;      // length p
  std::optional<Eigen::VectorXd> target_corr; // length p, corr(Y, A_i)
  Eigen::MatrixXd sigma_a;                    // p x p correlation matrix
  std::optional<double> sigma_eps;            // residual variance of Y
  std::optional<double> gamma0;               // missingness intercept
  Eigen::VectorXd gamma_a;                    // log-odds per SD, length p
  double target_miss = 0.2;
  int m = 20;       // imputations per replicate
  int k_reps = 500; // replicate count
  std::uint64_t master_seed = 1;
  std::int64_t calibration_n = 1'000'000;
  std::uint64_t calibration_seed = 0x5eedcab;
};

/// One replicate's rectangular dataset. Missing outcome entries hold NaN
/// (the dedicated not-a-value sentinel); miss_y[i] == 1 iff y[i] is NaN.
/// x and aux are always complete; y_true keeps the pre-deletion outcome
/// for the harness only.
struct StudyData {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd y_true;
  Eigen::MatrixXd aux;
  std::vector<std::uint8_t> miss_y;

  Eigen::Index rows() const { return x.size(); }
  Eigen::Index n_aux() const { return aux.cols(); }
  Eigen::Index n_missing() const;
};

/// Fill beta_a (from target_corr via sigma_a^-1 r, or pass through) and
/// sigma_eps = 1 - beta_x^2 - beta_a^t sigma_a beta_a, which normalizes
/// Var(Y) to 1 so that corr(Y, A) = sigma_a beta_a and corr(Y, X) = beta_x.
/// Raises InfeasibleCorrelationsError when sigma_eps <= 0.
ScenarioConfig derive_generative_params(ScenarioConfig config);

/// (X, A) ~ MVN(0, diag(1, sigma_a)); Y = beta_x X + beta_a^t A + eps.
/// Draw order: the (X, A) block row-major, then one normal per row for eps.
StudyData generate_complete(const ScenarioConfig& config, RngStream& rng);

/// Missingness intercept gamma0 such that the Monte Carlo estimate of
/// E[expit(gamma0 + gamma_a^t A)] over calibration_n fresh draws of A hits
/// target_miss, found by bisection on [-50, 50]. Deterministic given
/// calibration_seed; the draw set is shared across bisection steps.
double calibrate_gamma0(const ScenarioConfig& config);

/// Set y[i] to NaN with probability expit(gamma0 + gamma_a^t aux_i),
/// independently per row (one uniform per row). y_true is untouched.
void impose_missingness(StudyData& data, const ScenarioConfig& config,
                        RngStream& rng);

/// corr(Y, A_i) vector implied by the derived parameters: sigma_a * beta_a.
Eigen::VectorXd corr_with_outcome(const ScenarioConfig& config);

/// Block-diagonal exchangeable correlation matrix: within-block
/// off-diagonals equal `within`, cross-block zero.
Eigen::MatrixXd block_exchangeable_corr(const std::vector<int>& block_sizes,
                                        double within);

/// Header-free row-major CSV -> p x p matrix.
Eigen::MatrixXd load_corr_csv(const std::string& path);

// Scenario presets. Basic: n=1000, p=16, 20% missing, OR 1.2 on the first
// variable of each beta-level pair. Extreme: n=250, p=50 (34 junk
// auxiliaries), 50% missing, OR 2.0. Realistic-shaped: n=4983, p=81,
// synthetic block-exchangeable correlation structure standing in for an
// estimated matrix; users may substitute their own via CSV.
ScenarioConfig basic_preset();
ScenarioConfig extreme_preset();
ScenarioConfig realistic_shaped_preset();

}  // namespace misim
