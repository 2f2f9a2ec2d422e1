#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "netdep/covtest.hpp"
#include "netdep/embedding.hpp"
#include "netdep/graph_model.hpp"
#include "netdep/linalg.hpp"
#include "netdep/regression.hpp"
#include "netdep/threads.hpp"
#include "support/oracles.hpp"

using namespace netdep;

TEST_CASE("ridge on a diagonal system") {
  const int n = 5;
  const Matrix z = Matrix::Identity(n, n);
  Matrix x = Matrix::Zero(n, 1);
  x(0, 0) = 1.0;
  Vector penalties(1);
  penalties << 1.0;
  const RidgeFit fit = ridge_fit(x, z, penalties);
  const double expected = (1.0 / n) / (1.0 / n + 1.0);
  CHECK(fit.coefficients(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  for (int j = 1; j < n; ++j) CHECK(fit.coefficients(j, 0) == 0.0);
}

TEST_CASE("ridge shrinkage bound at huge penalties") {
  RngStream rng(1);
  const Matrix z = oracle::gaussian_matrix(40, 6, rng);
  const Matrix x = oracle::gaussian_matrix(40, 2, rng);
  Vector penalties(2);
  penalties << 1e8, 1e8;
  const RidgeFit fit = ridge_fit(x, z, penalties);
  for (int k = 0; k < 2; ++k) {
    const double bound = (z.transpose() * x.col(k) / 40).norm() / 1e8;
    CHECK(fit.coefficients.col(k).norm() <= bound * (1 + 1e-10));
  }
}

TEST_CASE("ridge matches an independent gradient-descent minimizer") {
  RngStream rng(2);
  const Matrix z = oracle::gaussian_matrix(30, 5, rng);
  const Matrix x = oracle::gaussian_matrix(30, 1, rng);
  Vector penalties(1);
  penalties << 0.3;
  const RidgeFit fit = ridge_fit(x, z, penalties);
  const Vector gd = oracle::gradient_descent_ridge(x.col(0), z, 0.3);
  CHECK((fit.coefficients.col(0) - gd).norm() <= 1e-6);
}

TEST_CASE("ridge closed form solves the penalized normal equations") {
  RngStream rng(3);
  const Matrix z = oracle::gaussian_matrix(25, 40, rng);  // p > n
  const Matrix x = oracle::gaussian_matrix(25, 3, rng);
  Vector penalties(3);
  penalties << 0.5, 1.0, 2.0;
  const RidgeFit fit = ridge_fit(x, z, penalties);
  const Matrix gram = z.transpose() * z / 25;
  for (int k = 0; k < 3; ++k) {
    Matrix system = gram;
    system.diagonal().array() += penalties[k];
    const Vector residual =
        system * fit.coefficients.col(k) - z.transpose() * x.col(k) / 25;
    const double scale = (z.transpose() * x.col(k) / 25).norm();
    CHECK(residual.norm() <= 1e-10 * std::max(1.0, scale));
  }

  Vector zero_penalty = Vector::Zero(3);
  CHECK_THROWS_AS(ridge_fit(x, z, zero_penalty), NetdepError);
}

TEST_CASE("lasso null-solution threshold and unpenalized limit") {
  RngStream rng(4);
  const Matrix z = oracle::gaussian_matrix(50, 8, rng);
  const Vector x = oracle::gaussian_matrix(50, 1, rng).col(0);
  const double lambda_max = lasso_lambda_max(x, z);
  CHECK(lasso_fit_column(x, z, lambda_max * 1.0001).cwiseAbs().maxCoeff() ==
        0.0);

  const Vector ls =
      (z.transpose() * z).ldlt().solve(z.transpose() * x);
  CHECK((lasso_fit_column(x, z, 0.0) - ls).norm() <= 1e-6);
}

TEST_CASE("lasso soft-thresholds under an orthonormal design") {
  RngStream rng(5);
  const int n = 32, p = 6;
  Eigen::HouseholderQR<Matrix> qr(oracle::gaussian_matrix(n, p, rng));
  Matrix q = qr.householderQ();
  const Matrix z = q.leftCols(p) * std::sqrt(static_cast<double>(n));
  const Vector x = oracle::gaussian_matrix(n, 1, rng).col(0);
  const double lambda = 0.4;
  const Vector fit = lasso_fit_column(x, z, lambda);
  const Vector corr = z.transpose() * x / n;
  for (int j = 0; j < p; ++j) {
    const double soft =
        std::copysign(std::max(std::abs(corr[j]) - lambda / 2.0, 0.0),
                      corr[j]);
    CHECK(fit[j] == doctest::Approx(soft).epsilon(1e-8));
  }
}

TEST_CASE("group lasso knots bracket the support") {
  RngStream rng(6);
  const Matrix z = oracle::gaussian_matrix(40, 6, rng);
  const Matrix x = oracle::gaussian_matrix(40, 3, rng);
  const KnotData knots = compute_knot_data(x, z);

  const GroupLassoFit zero =
      group_lasso_fit(x, z, knots.lambda1 * (1 + 1e-3));
  CHECK(oracle::active_row_count(zero.coefficients) == 0);

  const GroupLassoFit one =
      group_lasso_fit(x, z, knots.lambda1 * (1 - 1e-3));
  CHECK(oracle::active_row_count(one.coefficients) == 1);
  CHECK(one.coefficients.row(knots.m).norm() > 0.0);

  const double mid = 0.5 * (knots.lambda1 + knots.lambda2);
  const GroupLassoFit single = group_lasso_fit(x, z, mid);
  const Vector closed = beta_m(knots.u.col(knots.m), knots.r(knots.m, knots.m),
                               mid, 3);
  CHECK((single.coefficients.row(knots.m).transpose() - closed).norm() <=
        1e-6);
}

TEST_CASE("group lasso reduces to the lasso at d = 1") {
  RngStream rng(7);
  const Matrix z = oracle::gaussian_matrix(45, 9, rng);
  const Matrix x = oracle::gaussian_matrix(45, 1, rng);
  for (double lambda : {0.05, 0.2, 0.6}) {
    const GroupLassoFit group = group_lasso_fit(x, z, lambda);
    const Vector single = lasso_fit_column(x.col(0), z, lambda);
    CHECK((group.coefficients.col(0) - single).norm() <= 1e-6);
  }
}

TEST_CASE("group lasso fits satisfy their reported KKT residual") {
  RngStream rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix z = oracle::gaussian_matrix(40, 12, rng);
    const Matrix x = oracle::gaussian_matrix(40, 3, rng);
    const double top = glasso_lambda_max(x, z);
    for (double frac : {0.8, 0.4, 0.1, 0.01}) {
      GroupLassoOptions opts;
      opts.verify_monotone = true;  // exercises the per-sweep objective check
      const GroupLassoFit fit = group_lasso_fit(x, z, top * frac, opts);
      const double scale =
          std::max(top * frac, glasso_lambda_max(x, z));
      CHECK(fit.kkt_residual <= 1e-7 * std::max(1.0, scale));
      for (int j = 0; j < fit.coefficients.rows(); ++j) {
        const double norm = fit.coefficients.row(j).norm();
        CHECK((norm == 0.0 || norm > 1e-12));
      }
    }
  }
}

TEST_CASE("group lasso support and row norms are rotation equivariant") {
  RngStream rng(9);
  const Matrix z = oracle::gaussian_matrix(50, 10, rng);
  Matrix b = Matrix::Zero(10, 3);
  b.row(2) << 1.0, -0.5, 0.2;
  b.row(7) << -0.3, 0.8, 0.1;
  const Matrix x = z * b + 0.1 * oracle::gaussian_matrix(50, 3, rng);
  const double lambda = 0.4 * glasso_lambda_max(x, z);
  const GroupLassoFit base = group_lasso_fit(x, z, lambda);

  for (int trial = 0; trial < 5; ++trial) {
    const Matrix q = random_orthogonal(3, rng);
    const GroupLassoFit rotated = group_lasso_fit(x * q, z, lambda);
    for (int j = 0; j < 10; ++j) {
      CHECK(std::abs(rotated.coefficients.row(j).norm() -
                     base.coefficients.row(j).norm()) <= 1e-6);
    }
    const Matrix outer_base =
        base.coefficients * base.coefficients.transpose();
    const Matrix outer_rot =
        rotated.coefficients * rotated.coefficients.transpose();
    CHECK((outer_base - outer_rot).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("cross-validation basics") {
  RngStream rng(10);
  const Matrix z = oracle::gaussian_matrix(30, 5, rng);
  const Matrix x = oracle::gaussian_matrix(30, 2, rng);
  RngStream cv_rng(11);
  const CvResult one = cross_validate(FitMethod::GroupLasso, x, z, {0.25}, 5,
                                      cv_rng);
  CHECK(one.lambdas[0] == 0.25);

  CHECK_THROWS_AS(
      cross_validate(FitMethod::Ridge, x, z, {0.1, 0.5}, 5, cv_rng),
      NetdepError);  // ascending grid
  CHECK_THROWS_AS(cross_validate(FitMethod::Ridge, x, z, {0.5, 0.1}, 1, cv_rng),
                  NetdepError);  // too few folds

  // Per-column methods return one penalty per response column.
  const auto grid = log_spaced_grid(lasso_lambda_max(x.col(0), z), 10);
  const CvResult lasso = cross_validate(FitMethod::Lasso, x, z, grid, 5,
                                        cv_rng);
  const CvResult ridge = cross_validate(FitMethod::Ridge, x, z, grid, 5,
                                        cv_rng);
  CHECK(lasso.lambdas.size() == 2);
  CHECK(ridge.lambdas.size() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(lasso.lambdas[k] <= grid.front());
    CHECK(lasso.lambdas[k] >= grid.back());
  }
}

TEST_CASE("cross-validated group lasso keeps pure noise mostly zero") {
  std::vector<double> zero_fractions(20);
  parallel_for(20, 2, [&](int seed) {
    RngStream rng(500 + seed);
    const Matrix z = oracle::gaussian_matrix(100, 200, rng);
    const Matrix x = oracle::gaussian_matrix(100, 4, rng);
    RngStream cv_rng(900 + seed);
    const GroupLassoFit fit = group_lasso_cv_fit(x, z, 10, 25, cv_rng);
    zero_fractions[seed] =
        1.0 - static_cast<double>(oracle::active_row_count(fit.coefficients)) /
                  200.0;
  });
  CHECK(oracle::median(zero_fractions) >= 0.9);
}

TEST_CASE("cross-validated group lasso recovers strong supports") {
  const int trials = 50;
  std::vector<int> hits(trials, 0);
  parallel_for(trials, 2, [&](int seed) {
    ScenarioSpec spec;
    spec.scenario = Scenario::RowwiseSparse;
    spec.n = 100;
    spec.p = 200;
    spec.d = 4;
    spec.s = 2.0;
    spec.seed = 40 + seed;
    RngStream rng(700 + seed, 0);
    const ScenarioDraw draw = generate_scenario(spec, rng);
    const Embedding embedding = ase(draw.graph, spec.d);
    const Matrix xc = center_columns(embedding.positions);
    const Matrix zc = center_columns(draw.covariates);
    RngStream cv_rng(800 + seed);
    const GroupLassoFit fit = group_lasso_cv_fit(xc, zc, 10, 25, cv_rng);
    bool superset = true;
    for (int j = 0; j < spec.p; ++j) {
      if (draw.coefficients.row(j).norm() > 0.0 &&
          fit.coefficients.row(j).norm() == 0.0) {
        superset = false;
      }
    }
    hits[seed] = superset ? 1 : 0;
  });
  int total = 0;
  for (int h : hits) total += h;
  CHECK(total >= 40);
}

TEST_CASE("ridge estimates approach the rotated oracle as n grows") {
  const std::vector<int> sizes{100, 200, 400};
  std::vector<double> medians;
  Vector penalties = Vector::Constant(4, 0.5);
  for (int n : sizes) {
    ScenarioSpec spec;
    spec.scenario = Scenario::NoSparsity;
    spec.n = n;
    spec.p = 50;
    spec.d = 4;
    spec.s = 1.0;
    spec.seed = 55;
    std::vector<double> gaps(10);
    parallel_for(10, 2, [&](int seed) {
      RngStream rng(1500 + seed, 0);
      const ScenarioDraw draw = generate_scenario(spec, rng);
      const Embedding embedding = ase(draw.graph, spec.d);
      const Matrix q =
          oracle::procrustes(draw.latent.values, embedding.positions);
      const RidgeFit hat =
          ridge_fit(embedding.positions, draw.covariates, penalties);
      const RidgeFit tilde =
          ridge_fit(draw.latent.values * q, draw.covariates, penalties);
      gaps[seed] = (hat.coefficients - tilde.coefficients).norm();
    });
    medians.push_back(oracle::median(gaps));
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("group lasso estimation error trend over n") {
  const std::vector<int> sizes{100, 200, 400};
  std::vector<double> medians;
  for (int n : sizes) {
    ScenarioSpec spec;
    spec.scenario = Scenario::RowwiseSparse;
    spec.n = n;
    spec.p = 100;
    spec.d = 4;
    spec.s = 1.0;
    spec.seed = 65;
    std::vector<double> errors(10);
    parallel_for(10, 2, [&](int seed) {
      RngStream rng(2500 + seed, 0);
      const ScenarioDraw draw = generate_scenario(spec, rng);
      const Embedding embedding = ase(draw.graph, spec.d);
      const Matrix xc = center_columns(embedding.positions);
      const Matrix zc = center_columns(draw.covariates);
      RngStream cv_rng(2600 + seed);
      const GroupLassoFit fit = group_lasso_cv_fit(xc, zc, 10, 25, cv_rng);
      const Matrix q =
          oracle::procrustes(draw.latent.values, embedding.positions);
      const Matrix target = draw.coefficients * q;
      double err = 0.0;
      for (int j = 0; j < spec.p; ++j) {
        err += (fit.coefficients.row(j) - target.row(j)).norm();
      }
      errors[seed] = err;
    });
    medians.push_back(oracle::median(errors));
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}
