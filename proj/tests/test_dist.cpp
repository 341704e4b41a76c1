#include <doctest.h>

#include <cmath>

#include "misim/dist.hpp"
#include "misim/errors.hpp"

using namespace misim;

TEST_CASE("normal cdf fixed points") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-10));
  CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096e-16).epsilon(1e-3));
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-10, 1e-4, 0.025, 0.3, 0.5, 0.7, 0.975, 1.0 - 1e-4}) {
    CHECK(std::fabs(normal_cdf(normal_quantile(p)) - p) < 1e-12);
  }
  CHECK_THROWS_AS(normal_quantile(0.0), ConfigError);
  CHECK_THROWS_AS(normal_quantile(1.0), ConfigError);
}

TEST_CASE("t table value and quantile round trip") {
  CHECK(std::fabs(t_quantile(0.975, 10.0) - 2.2281388520) < 5e-7);
  CHECK(std::fabs(t_cdf(t_quantile(0.9, 5.0), 5.0) - 0.9) < 1e-9);
  for (double df : {1.0, 3.0, 30.0, 250.0}) {
    for (double p : {0.01, 0.2, 0.5, 0.8, 0.99}) {
      CHECK(std::fabs(t_cdf(t_quantile(p, df), df) - p) < 1e-9);
    }
  }
}

TEST_CASE("t cdf approaches the normal cdf for huge df") {
  for (double z = -4.0; z <= 4.0; z += 0.5) {
    CHECK(std::fabs(t_cdf(z, 1e6) - normal_cdf(z)) < 1e-3);
  }
}

TEST_CASE("t distribution domain checks") {
  CHECK_THROWS_AS(t_cdf(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(t_quantile(0.5, -1.0), ConfigError);
  CHECK_THROWS_AS(t_quantile(1.5, 5.0), ConfigError);
  CHECK(t_cdf(0.0, 3.0) == 0.5);
  CHECK(t_quantile(0.5, 3.0) == 0.0);
}

TEST_CASE("expit is a proper sigmoid") {
  CHECK(expit(0.0) == 0.5);
  CHECK(expit(50.0) == doctest::Approx(1.0));
  CHECK(expit(-50.0) == doctest::Approx(0.0));
  CHECK(expit(1.2) + expit(-1.2) == doctest::Approx(1.0).epsilon(1e-14));
}
