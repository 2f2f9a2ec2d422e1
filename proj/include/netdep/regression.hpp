#pragma once

#include <vector>

#include "netdep/rng.hpp"
#include "netdep/types.hpp"

namespace netdep {

// Solvers below operate on their inputs as given. The testing pipeline
// column-centers X-hat and Z before fitting (an unpenalized intercept);
// see permtest.hpp.

struct RidgeFit {
  Matrix coefficients;  // p x d, column k solves (Z'Z/n + l_k I) b = Z'x_k/n
  Vector penalties;     // l_1 .. l_d
};

/// Closed-form ridge, one symmetric positive-definite solve per column.
/// penalties must be > 0, or 0 with Z'Z/n invertible (else SingularSystem).
RidgeFit ridge_fit(const Matrix& xhat, const Matrix& z,
                   const Vector& penalties);

struct LassoOptions {
  int max_sweeps = 100000;
  double tol_factor = 1e-7;  // KKT tolerance = tol_factor * problem scale
  const Vector* warm_start = nullptr;
};

/// Cyclic coordinate descent for (1/n)|x - Zb|^2 + lambda |b|_1.
/// Returns only when the KKT system holds to tolerance; MaxIterations
/// otherwise (never a silent partial fit).
Vector lasso_fit_column(const Vector& xcol, const Matrix& z, double lambda,
                        const LassoOptions& options = {});

struct GroupLassoOptions {
  int max_sweeps = 100000;
  double tol_factor = 1e-7;
  const Matrix* warm_start = nullptr;
#ifdef NDEBUG
  bool verify_monotone = false;
#else
  bool verify_monotone = true;
#endif
};

struct GroupLassoFit {
  Matrix coefficients;  // p x d, rows exactly zero or with norm > 1e-12
  double penalty = 0.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
};

/// Block coordinate descent for (1/nd)|X - Z beta|_F^2 +
/// (lambda/sqrt(d)) sum_j |beta_j|, rows as groups. Each block update is the
/// exact group soft-threshold on the partial residual.
GroupLassoFit group_lasso_fit(const Matrix& xhat, const Matrix& z,
                              double lambda,
                              const GroupLassoOptions& options = {});

double group_lasso_objective(const Matrix& xhat, const Matrix& z,
                             const Matrix& beta, double lambda);

/// Smallest penalty with an all-zero solution: (2/sqrt(d)) max_j |X'Z_j|/n.
double glasso_lambda_max(const Matrix& xhat, const Matrix& z);
/// Same for a single response column: 2 |Z'x/n|_inf.
double lasso_lambda_max(const Vector& xcol, const Matrix& z);

/// Descending log-spaced grid from `top` down to `top * ratio`.
std::vector<double> log_spaced_grid(double top, int count = 50,
                                    double ratio = 1e-3);

enum class FitMethod { Ridge, Lasso, GroupLasso };

/// K-fold cross-validation on rows (contiguous blocks after a seeded
/// shuffle). Returns the penalty minimizing mean held-out squared prediction
/// error per entry, one value per column for ridge/lasso and a single value
/// for the group LASSO; ties resolve to the largest penalty.
struct CvResult {
  Vector lambdas;  // size d for per-column methods, size 1 for GroupLasso
};

CvResult cross_validate(FitMethod method, const Matrix& xhat, const Matrix& z,
                        const std::vector<double>& lambda_grid, int folds,
                        RngStream& rng);

/// CV on the default grid followed by a refit on the full data.
GroupLassoFit group_lasso_cv_fit(const Matrix& xhat, const Matrix& z,
                                 int folds, int grid_size, RngStream& rng);

}  // namespace netdep
