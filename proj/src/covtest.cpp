#include "netdep/covtest.hpp"

#include <cassert>
#include <cmath>

#include "netdep/linalg.hpp"
#include "netdep/regression.hpp"

namespace netdep {

namespace {

/// Row m stays the only active row down to the largest "minus" root over
/// k != m of the quadratic
///   (A_k^2 - 1) l^2 + (4 A_k B_k / (sqrt(d)|U_m|)) l + 4|U_k - A_k U_m|^2/d,
/// with A_k = R_mk/R_mm and B_k = U_k.U_m - A_k |U_m|^2.
double second_knot(const Matrix& u, const Matrix& r, int m, double lambda1) {
  const int p = static_cast<int>(u.cols());
  const int d = static_cast<int>(u.rows());
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const Vector u_m = u.col(m);
  const double u_m_norm = u_m.norm();
  const double r_mm = r(m, m);

  double lambda2 = 0.0;
  for (int k = 0; k < p; ++k) {
    if (k == m) continue;
    const double a_k = r(m, k) / r_mm;
    const double b_k = u.col(k).dot(u_m) - a_k * u_m_norm * u_m_norm;
    const double qa = a_k * a_k - 1.0;
    const double qb = 4.0 * a_k * b_k / (sqrt_d * u_m_norm);
    const double qc = 4.0 * (u.col(k) - a_k * u_m).squaredNorm() / d;

    double root;
    if (std::abs(qa) <= 1e-14) {
      // Degenerate quadratic; the linear limit binds only for qb < 0.
      root = qb < 0.0 ? -qc / qb : 0.0;
    } else {
      double disc = qb * qb - 4.0 * qa * qc;
      assert(disc >= -1e-10 * std::max({1.0, qb * qb, std::abs(4.0 * qa * qc)}));
      disc = std::max(disc, 0.0);
      // Cancellation-safe variant: q and c/q are the two roots.
      const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      root = qb >= 0.0 ? q / qa : (q != 0.0 ? qc / q : 0.0);
    }
    lambda2 = std::max(lambda2, root);
  }
  return std::clamp(lambda2, 0.0, lambda1);
}

double pooled_variance(const Matrix& values) {
  const int n = static_cast<int>(values.rows());
  const int d = static_cast<int>(values.cols());
  if (n < 2 || d < 1) {
    throw NetdepError(ErrorCode::InvalidDimension,
                      "need at least two rows to estimate a variance");
  }
  const Matrix centered = center_columns(values);
  return centered.squaredNorm() / (static_cast<double>(n) * d - d);
}

}  // namespace

KnotData compute_knot_data_from_moments(const Matrix& u, const Matrix& r) {
  const int p = static_cast<int>(u.cols());
  if (p < 2) {
    throw NetdepError(ErrorCode::InvalidDimension,
                      "knot computation needs p >= 2");
  }
  const int d = static_cast<int>(u.rows());

  Vector norms(p);
  for (int k = 0; k < p; ++k) norms[k] = u.col(k).norm();
  int m = 0;
  for (int k = 1; k < p; ++k) {
    if (norms[k] > norms[m]) m = k;
  }
  double runner_up = -1.0;
  for (int k = 0; k < p; ++k) {
    if (k != m) runner_up = std::max(runner_up, norms[k]);
  }
  if (norms[m] - runner_up <= 1e-10 * norms[m]) {
    throw NetdepError(ErrorCode::NonUniqueMax,
                      "top two |U_k| coincide to 1e-10 relative");
  }
  if (r(m, m) <= 1e-12) {
    throw NetdepError(ErrorCode::DegenerateGram,
                      "R_mm is numerically zero");
  }

  KnotData knots;
  knots.u = u;
  knots.r = r;
  knots.m = m;
  knots.lambda1 = 2.0 / std::sqrt(static_cast<double>(d)) * norms[m];
  knots.lambda2 = second_knot(u, r, m, knots.lambda1);
  return knots;
}

KnotData compute_knot_data(const Matrix& xhat, const Matrix& z) {
  if (xhat.rows() != z.rows()) {
    throw NetdepError(ErrorCode::InvalidDimension,
                      "X and Z row counts differ");
  }
  const int n = static_cast<int>(z.rows());
  const Matrix u = xhat.transpose() * z / n;
  const Matrix r = z.transpose() * z / n;
  return compute_knot_data_from_moments(u, r);
}

Vector beta_m(const Vector& u_m, double r_mm, double lambda, int d) {
  const double norm = u_m.norm();
  if (!(norm > 0.0)) {
    throw NetdepError(ErrorCode::DegenerateGram, "|U_m| must be positive");
  }
  if (!(r_mm > 0.0)) {
    throw NetdepError(ErrorCode::DegenerateGram, "R_mm must be positive");
  }
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const double lambda1 = 2.0 * norm / sqrt_d;
  if (lambda > lambda1 * (1.0 + 1e-12)) {
    throw NetdepError(ErrorCode::OutOfKnotRange,
                      "lambda exceeds the all-zero knot lambda1");
  }
  if (!(lambda > 0.0)) {
    throw NetdepError(ErrorCode::InvalidConfig, "lambda must be positive");
  }
  const double shrink = std::max(0.0, 1.0 - lambda * sqrt_d / (2.0 * norm));
  return shrink / r_mm * u_m;
}

double estimate_sigma2(const Matrix& xhat, const Matrix& z, Sigma2Mode mode,
                       RngStream& rng, int cv_folds, int cv_grid) {
  if (mode == Sigma2Mode::Null) {
    return pooled_variance(xhat);
  }
  const GroupLassoFit fit = group_lasso_cv_fit(xhat, z, cv_folds, cv_grid, rng);
  return pooled_variance(xhat - z * fit.coefficients);
}

CovTestResult cov_test_statistic(const KnotData& knots, double sigma2, int n,
                                 int d) {
  if (!(sigma2 > 0.0)) {
    throw NetdepError(ErrorCode::NonPositiveVariance,
                      "sigma^2 estimate must be positive, got " +
                          std::to_string(sigma2));
  }
  CovTestResult result;
  result.sigma2 = sigma2;
  result.knots = knots;
  result.statistic = static_cast<double>(n) * d * knots.lambda1 *
                     (knots.lambda1 - knots.lambda2) /
                     (4.0 * sigma2 * knots.r(knots.m, knots.m));
#ifndef NDEBUG
  {
    // The simple form must agree with the defining covariance sum evaluated
    // through the closed-form solution at lambda2.
    const Vector u_m = knots.u.col(knots.m);
    const double norm = u_m.norm();
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    const double shrink = 1.0 - knots.lambda2 * sqrt_d / (2.0 * norm);
    const double sum = static_cast<double>(n) * shrink * norm * norm /
                       (knots.r(knots.m, knots.m) * sigma2);
    assert(std::abs(result.statistic - sum) <=
           1e-8 * std::max(1.0, std::abs(result.statistic)));
  }
#endif
  return result;
}

CovTestResult glasso_cov_test(const Matrix& xhat, const Matrix& z,
                              Sigma2Mode mode, RngStream& rng) {
  const KnotData knots = compute_knot_data(xhat, z);
  const double sigma2 = estimate_sigma2(xhat, z, mode, rng);
  return cov_test_statistic(knots, sigma2, static_cast<int>(xhat.rows()),
                            static_cast<int>(xhat.cols()));
}

Vector lasso_cov_test_per_dim(const Matrix& xhat, const Matrix& z,
                              Sigma2Mode mode, RngStream& rng) {
  const int d = static_cast<int>(xhat.cols());
  const int n = static_cast<int>(xhat.rows());
  // One variance estimate shared by all dimensions: the error variance is
  // common across latent dimensions, and a single multitask fit estimates
  // it far more stably than d separate single-response fits.
  const double sigma2 = estimate_sigma2(xhat, z, mode, rng);
  Vector statistics(d);
  for (int k = 0; k < d; ++k) {
    const KnotData knots = compute_knot_data(xhat.col(k), z);
    statistics[k] = cov_test_statistic(knots, sigma2, n, 1).statistic;
  }
  return statistics;
}

}  // namespace netdep
