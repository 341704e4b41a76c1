#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "misim/metrics.hpp"

using namespace misim;

namespace {

RepResult rep(int id, double est, double se, double lo, double hi,
              bool conv = true) {
  RepResult r;
  r.rep_id = id;
  r.strategy = "s";
  r.estimand = "mean_y";
  r.estimate = est;
  r.model_se = se;
  r.ci_low = lo;
  r.ci_high = hi;
  r.converged = conv;
  return r;
}

}  // namespace

TEST_CASE("hand-computed two-replicate summary") {
  const std::vector<RepResult> results = {rep(0, 0.0, 1.0, -2.0, 2.0),
                                          rep(1, 2.0, 1.0, 0.0, 4.0)};
  const PerformanceSummary s = summarize(results, 1.0);
  CHECK(s.bias == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(s.emp_se == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s.mod_se == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.coverage == 1.0);
  CHECK(s.rel_mod_se_err_pct == doctest::Approx(-29.2893).epsilon(1e-4));
  CHECK(s.bias_mcse == doctest::Approx(1.0).epsilon(1e-12));  // sqrt(2/2)
  CHECK(*s.rel_bias_pct == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("degenerate all-identical estimates") {
  const std::vector<RepResult> results = {rep(0, 1.0, 1.0, 0.0, 2.0),
                                          rep(1, 1.0, 1.0, 0.0, 2.0),
                                          rep(2, 1.0, 1.0, 0.0, 2.0)};
  const PerformanceSummary s = summarize(results, 1.0);
  CHECK(s.bias == 0.0);
  CHECK(s.emp_se == 0.0);
  CHECK(!s.std_bias_pct.has_value());
  CHECK(s.coverage == 1.0);
  CHECK(s.coverage_mcse == 0.0);
}

TEST_CASE("coverage mcse at the design target") {
  std::vector<RepResult> results;
  for (int i = 0; i < 2000; ++i) {
    const bool cover = i < 1900;  // 95%
    results.push_back(rep(i, 0.0, 1.0, cover ? -1.0 : 1.0, cover ? 1.0 : 2.0));
  }
  const PerformanceSummary s = summarize(results, 0.0);
  CHECK(s.coverage == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(s.coverage_mcse == doctest::Approx(0.004873397).epsilon(1e-4));
}

TEST_CASE("summaries are invariant to input order") {
  std::vector<RepResult> results;
  std::mt19937 gen(11);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const double est = 0.5 + noise(gen);
    results.push_back(rep(i, est, 1.0 + 0.1 * std::fabs(noise(gen)),
                          est - 2.0, est + 2.0));
  }
  const PerformanceSummary a = summarize(results, 0.5);
  std::shuffle(results.begin(), results.end(), gen);
  const PerformanceSummary b = summarize(results, 0.5);
  CHECK(a.bias == b.bias);
  CHECK(a.emp_se == b.emp_se);
  CHECK(a.mod_se == b.mod_se);
  CHECK(a.coverage == b.coverage);
  CHECK(a.bias_mcse == b.bias_mcse);
}

TEST_CASE("affine equivariance") {
  std::vector<RepResult> results;
  std::mt19937 gen(12);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double est = noise(gen);
    results.push_back(rep(i, est, 1.0, est - 1.9, est + 1.9));
  }
  const double truth = 0.1;
  const PerformanceSummary base = summarize(results, truth);

  const double shift = 3.7, scale = 2.5;
  std::vector<RepResult> moved = results;
  for (RepResult& r : moved) {
    r.estimate = scale * r.estimate + shift;
    r.model_se *= scale;
    r.ci_low = scale * r.ci_low + shift;
    r.ci_high = scale * r.ci_high + shift;
  }
  const PerformanceSummary after = summarize(moved, scale * truth + shift);
  CHECK(after.bias == doctest::Approx(scale * base.bias).epsilon(1e-10));
  CHECK(after.emp_se == doctest::Approx(scale * base.emp_se).epsilon(1e-10));
  CHECK(after.mod_se == doctest::Approx(scale * base.mod_se).epsilon(1e-10));
  CHECK(after.coverage == base.coverage);
  CHECK(*after.std_bias_pct ==
        doctest::Approx(*base.std_bias_pct).epsilon(1e-8));
  CHECK(after.rel_mod_se_err_pct ==
        doctest::Approx(base.rel_mod_se_err_pct).epsilon(1e-8));
}

TEST_CASE("non-converged replicates only count against the rate") {
  std::vector<RepResult> results = {rep(0, 1.0, 1.0, 0.0, 2.0),
                                    rep(1, 3.0, 1.0, 2.0, 4.0),
                                    rep(2, 0.0, 0.0, 0.0, 0.0, false)};
  const PerformanceSummary s = summarize(results, 2.0);
  CHECK(s.k_used == 2);
  CHECK(s.convergence_rate == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s.bias == doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<RepResult> few = {rep(0, 1.0, 1.0, 0.0, 2.0),
                                      rep(1, 0.0, 0.0, 0.0, 0.0, false)};
  const PerformanceSummary only_rate = summarize(few, 2.0);
  CHECK(only_rate.k_used == 1);
  CHECK(only_rate.convergence_rate == 0.5);
  CHECK(std::isnan(only_rate.bias));
}

TEST_CASE("zero truth suppresses relative bias") {
  const std::vector<RepResult> results = {rep(0, 0.1, 1.0, -1.0, 1.0),
                                          rep(1, -0.1, 1.0, -1.0, 1.0)};
  const PerformanceSummary s = summarize(results, 0.0);
  CHECK(!s.rel_bias_pct.has_value());
}
