#pragma once

#include "netdep/rng.hpp"
#include "netdep/types.hpp"

namespace netdep {

/// First-knot data for the group LASSO path on (X, Z): the per-covariate
/// cross moments U_k = X'Z_k/n, the Gram R = Z'Z/n, the maximizing index m,
/// and the two leading knots. lambda1 is the smallest penalty with an
/// all-zero solution; lambda2 is the smallest penalty at which row m is
/// still the only active row.
struct KnotData {
  Matrix u;        // d x p, column k = U_k
  Matrix r;        // p x p
  int m = 0;       // argmax_k |U_k|
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Knots from raw data. Throws NonUniqueMax when the top two |U_k| agree to
/// 1e-10 relative (the closed forms assume a unique maximizer) and
/// DegenerateGram when R_mm is numerically zero. Requires p >= 2.
KnotData compute_knot_data(const Matrix& xhat, const Matrix& z);

/// Same computation starting from precomputed moments; the Gram matrix is
/// unchanged by row permutations of Z, so permutation replicates reuse it.
KnotData compute_knot_data_from_moments(const Matrix& u, const Matrix& r);

/// Closed form for the single active row on the first path segment:
/// beta_m(lambda) = (1/R_mm)(1 - lambda sqrt(d)/(2|U_m|)) U_m.
/// Valid for 0 < lambda <= lambda1; beyond that throws OutOfKnotRange.
Vector beta_m(const Vector& u_m, double r_mm, double lambda, int d);

enum class Sigma2Mode {
  Null,      // pooled variance of the column-centered responses
  Residual,  // pooled variance of residuals from a CV group LASSO fit
};

double estimate_sigma2(const Matrix& xhat, const Matrix& z, Sigma2Mode mode,
                       RngStream& rng, int cv_folds = 10, int cv_grid = 50);

struct CovTestResult {
  double statistic = 0.0;
  double sigma2 = 0.0;
  KnotData knots;
};

/// T_cov = n d lambda1 (lambda1 - lambda2) / (4 sigma2 R_mm). In debug
/// builds the value is checked against the defining covariance sum through
/// beta_m(lambda2).
CovTestResult cov_test_statistic(const KnotData& knots, double sigma2, int n,
                                 int d);

/// Full pipeline on (already centered) data for one statistic evaluation.
CovTestResult glasso_cov_test(const Matrix& xhat, const Matrix& z,
                              Sigma2Mode mode, RngStream& rng);

/// d=1 specialization applied to each column of X separately; returns the
/// d raw statistics. Bonferroni combination happens in the permutation
/// engine. Knot errors propagate per dimension.
Vector lasso_cov_test_per_dim(const Matrix& xhat, const Matrix& z,
                              Sigma2Mode mode, RngStream& rng);

}  // namespace netdep
