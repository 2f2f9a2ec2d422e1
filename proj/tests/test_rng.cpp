#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "netdep/rng.hpp"

using namespace netdep;

TEST_CASE("streams are deterministic and distinct") {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  int differing = 0;
  RngStream a2(42, 3);
  for (int i = 0; i < 100; ++i) {
    if (a2.next_u64() != c.next_u64()) ++differing;
  }
  CHECK(differing > 90);
}

TEST_CASE("uniform stays in [0,1)") {
  RngStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  RngStream rng(7);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma moments, including tiny shapes") {
  RngStream rng(11);
  const int n = 50000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.gamma_draw(3.0);
  // Gamma(3) has mean 3, variance 3.
  CHECK(sum / n == doctest::Approx(3.0).epsilon(0.03));

  for (int i = 0; i < 1000; ++i) {
    const double lg = rng.log_gamma_draw(1e-4);
    CHECK(std::isfinite(lg));  // linear scale would underflow to zero
  }
}

TEST_CASE("dirichlet degenerate and concentration cases") {
  RngStream rng(5);
  const Vector one = sample_dirichlet(Vector::Ones(1), rng);
  CHECK(one.size() == 1);
  CHECK(one[0] == doctest::Approx(1.0).epsilon(1e-15));

  Vector big(2);
  big << 1e6, 1e6;
  for (int i = 0; i < 20; ++i) {
    const Vector x = sample_dirichlet(big, rng);
    CHECK(std::abs(x[0] - 0.5) < 0.01);
    CHECK(std::abs(x[1] - 0.5) < 0.01);
  }
}

TEST_CASE("dirichlet mean matches the closed form") {
  // alpha = (100,1,1,1): E x_1 = 100/103, Var x_1 = 100*3/(103^2 * 104).
  Vector alpha(4);
  alpha << 100.0, 1.0, 1.0, 1.0;
  RngStream rng(13);
  const int reps = 10000;
  double sum = 0.0;
  for (int i = 0; i < reps; ++i) {
    const Vector x = sample_dirichlet(alpha, rng);
    CHECK(x.minCoeff() >= 0.0);
    CHECK(std::abs(x.sum() - 1.0) <= 1e-12);
    sum += x[0];
  }
  const double expected = 100.0 / 103.0;
  const double sd = std::sqrt(100.0 * 3.0 / (103.0 * 103.0 * 104.0));
  CHECK(std::abs(sum / reps - expected) <= 3.0 * sd / std::sqrt(reps));
}

TEST_CASE("dirichlet rejects non-positive shapes") {
  RngStream rng(1);
  Vector alpha(2);
  alpha << 1.0, 0.0;
  CHECK_THROWS_AS(sample_dirichlet(alpha, rng), NetdepError);
  try {
    sample_dirichlet(alpha, rng);
  } catch (const NetdepError& err) {
    CHECK(err.code() == ErrorCode::InvalidAlpha);
  }
}

TEST_CASE("sampling without replacement and permutations") {
  RngStream rng(3);
  const auto picked = rng.sample_without_replacement(10, 4);
  CHECK(picked.size() == 4);
  std::set<int> unique(picked.begin(), picked.end());
  CHECK(unique.size() == 4);
  for (int v : picked) {
    CHECK(v >= 0);
    CHECK(v < 10);
  }

  const auto perm = rng.permutation(50);
  std::set<int> values(perm.begin(), perm.end());
  CHECK(values.size() == 50);
  CHECK(*values.begin() == 0);
  CHECK(*values.rbegin() == 49);
}
