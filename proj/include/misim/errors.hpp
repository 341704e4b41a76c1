#pragma once

#include <stdexcept>
#include <string>

namespace misim {

// Invalid user-facing configuration: bad arguments, malformed manifests,
// domain violations in distribution functions.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Covariance/correlation matrix with an eigenvalue below -1e-8.
struct NotPsdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Design matrix rank-deficient at relative pivot threshold 1e-10.
struct SingularDesignError : std::runtime_error {
  explicit SingularDesignError(long column_index)
      : std::runtime_error("singular design: column " +
                           std::to_string(column_index) +
                           " is linearly dependent"),
        column(column_index) {}
  long column;
};

// Too few rows/pairs/respondents for the requested computation.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Coordinate descent failed to converge within the sweep budget.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, long lambda_idx)
      : std::runtime_error(what), lambda_index(lambda_idx) {}
  long lambda_index;
};

// Intercept calibration could not bracket the target missingness proportion.
struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested outcome/auxiliary correlations leave no residual variance.
struct InfeasibleCorrelationsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Constant column where standardization was requested.
struct DegenerateColumnError : std::runtime_error {
  explicit DegenerateColumnError(long column_index)
      : std::runtime_error("degenerate (constant) column " +
                           std::to_string(column_index)),
        column(column_index) {}
  long column;
};

}  // namespace misim
