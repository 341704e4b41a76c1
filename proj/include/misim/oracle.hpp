#pragma once

#include <string>
#include <vector>

namespace misim {

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Independent cross-checks of the numerical core: Rubin pooling against
/// hand-computed values, the analytic FMI against a long empirical
/// imputation run, LASSO KKT residuals and the orthonormal soft-threshold
/// closed form, PCA orthogonality, posterior-draw moments, and the
/// distribution functions against quadrature/root-finding oracles. Each
/// oracle recomputes its expectation through a route independent of the
/// implementation it checks.
std::vector<OracleCheck> run_oracle_suite();

}  // namespace misim
