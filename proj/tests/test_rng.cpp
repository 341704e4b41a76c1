#include <doctest.h>

#include <cmath>

#include "misim/errors.hpp"
#include "misim/rng.hpp"

using misim::RngStream;

TEST_CASE("identical keys replay the identical sequence") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  RngStream c(42, 7);
  RngStream d(42, 7);
  for (int i = 0; i < 100; ++i) {
    CHECK(c.next_normal() == d.next_normal());
    CHECK(c.next_chisq(5.0) == d.next_chisq(5.0));
  }
}

TEST_CASE("distinct stream ids do not collide") {
  RngStream a(42, 0);
  RngStream b(42, 1);
  RngStream c(43, 0);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    if (x == b.next_u64()) ++equal_ab;
    if (x == c.next_u64()) ++equal_ac;
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("uniforms live strictly inside (0,1)") {
  RngStream rng(1, 1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double u = rng.next_uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("normal draws have the right first two moments") {
  RngStream rng(7, 3);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(var - 1.0) < 0.03);
}

TEST_CASE("chisq draws match the df mean") {
  RngStream rng(11, 5);
  const int n = 100000;
  for (double df : {1.0, 7.0, 998.0}) {
    double sum = 0.0;
    const int reps = df > 100 ? 2000 : n;
    for (int i = 0; i < reps; ++i) sum += rng.next_chisq(df);
    const double mean = sum / reps;
    const double tol = 4.0 * std::sqrt(2.0 * df / reps);
    CHECK(std::fabs(mean - df) < tol);
  }
  CHECK_THROWS_AS(rng.next_chisq(0.0), misim::ConfigError);
  CHECK_THROWS_AS(rng.next_gamma(-1.0), misim::ConfigError);
}
