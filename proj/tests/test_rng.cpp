#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gtsec/rng.hpp"

using namespace gtsec;

TEST_CASE("identical seeds replay the identical stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(42), d(42);
  for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("derived seeds are stable and stream-separated") {
  const auto s1 = derive_seed(7, "alpha");
  CHECK(s1 == derive_seed(7, "alpha"));
  CHECK(s1 != derive_seed(7, "beta"));
  CHECK(s1 != derive_seed(8, "alpha"));
}

TEST_CASE("uniform stays inside its interval") {
  Rng r(5);
  for (int i = 0; i < 10000; ++i) {
    const double x = r.uniform(2.0, 3.5);
    CHECK(x >= 2.0);
    CHECK(x < 3.5);
  }
}

TEST_CASE("uniform integers cover the range uniformly enough") {
  Rng r(11);
  int counts[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 50000; ++i) ++counts[r.uniform_int(0, 4)];
  for (int c : counts) {
    CHECK(c > 9000);
    CHECK(c < 11000);
  }
}

TEST_CASE("normal moments look standard") {
  Rng r(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("unit vectors have unit norm") {
  Rng r(9);
  for (int i = 0; i < 50; ++i)
    CHECK(r.unit_vector(17).norm() == doctest::Approx(1.0).epsilon(1e-12));
}
