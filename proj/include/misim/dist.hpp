#pragma once

namespace misim {

/// Standard normal cdf, accurate to machine precision via erfc.
double normal_cdf(double z);

/// Standard normal quantile (Wichura's PPND16), p in (0, 1).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double reg_incomplete_beta(double a, double b, double x);

/// Student-t cdf, df > 0.
double t_cdf(double t, double df);

/// Student-t quantile by monotone bisection on t_cdf; prob in (0, 1).
double t_quantile(double prob, double df);

double expit(double x);

}  // namespace misim
