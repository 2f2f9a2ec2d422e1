#include "netdep/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cassert>
#include <cmath>

namespace netdep {

namespace {

constexpr double kRowSnapTol = 1e-12;

// Path fits inside cross-validation only feed held-out errors into the
// lambda choice; differences between grid points dwarf this slack. Final
// refits run at the full default tolerance.
constexpr double kCvPathTolFactor = 1e-4;

void check_shapes(Eigen::Index n_x, Eigen::Index n_z) {
  if (n_x != n_z) {
    throw NetdepError(ErrorCode::InvalidDimension,
                      "X and Z row counts differ");
  }
}

/// Fold membership: contiguous blocks of a seeded shuffle of the row ids.
std::vector<std::vector<int>> make_folds(int n, int k, RngStream& rng) {
  std::vector<int> order = rng.permutation(n);
  std::vector<std::vector<int>> folds(k);
  const int base = n / k;
  const int extra = n % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return folds;
}

Matrix take_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

std::vector<int> complement_rows(int n, const std::vector<int>& rows) {
  std::vector<char> in(n, 0);
  for (int r : rows) in[r] = 1;
  std::vector<int> out;
  out.reserve(n - static_cast<int>(rows.size()));
  for (int i = 0; i < n; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

/// Held-out squared error of ridge over the grid, added into `errors`
/// (one row per lambda, one column per response column). Uses the
/// eigendecomposition of the training Gram on the smaller side, so the cost
/// per lambda is a couple of matrix-vector products.
void accumulate_ridge_cv_errors(const Matrix& x_train, const Matrix& z_train,
                                const Matrix& x_val, const Matrix& z_val,
                                const std::vector<double>& grid,
                                Matrix& errors) {
  const int n_t = static_cast<int>(z_train.rows());
  const int p = static_cast<int>(z_train.cols());
  const int n_lambda = static_cast<int>(grid.size());
  if (p <= n_t) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(z_train.transpose() * z_train /
                                              n_t);
    const Matrix& v = eig.eigenvectors();
    const Vector& mu = eig.eigenvalues();
    const Matrix w = z_train.transpose() * x_train / n_t;  // p x d
    const Matrix c = v.transpose() * w;
    const Matrix zv_v = z_val * v;  // n_val x p
    for (int li = 0; li < n_lambda; ++li) {
      const Vector inv = (mu.array() + grid[li]).inverse().matrix();
      const Matrix pred = zv_v * inv.asDiagonal() * c;
      errors.row(li) += (x_val - pred).colwise().squaredNorm();
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(z_train * z_train.transpose());
    const Matrix& u = eig.eigenvectors();
    const Vector& mu = eig.eigenvalues();
    const Matrix c = u.transpose() * x_train;                 // n_t x d
    const Matrix k_vt_u = (z_val * z_train.transpose()) * u;  // n_val x n_t
    for (int li = 0; li < n_lambda; ++li) {
      const Vector inv =
          (mu.array() / n_t + grid[li]).inverse().matrix() / n_t;
      const Matrix pred = k_vt_u * inv.asDiagonal() * c;
      errors.row(li) += (x_val - pred).colwise().squaredNorm();
    }
  }
}

struct GroupLassoState {
  Matrix beta;      // p x d
  Matrix residual;  // n x d, X - Z beta
};

double kkt_scale(double lambda, int d, const Vector& grad0_norms) {
  return std::max({lambda / std::sqrt(static_cast<double>(d)),
                   grad0_norms.maxCoeff(), 1e-300});
}

/// Max violation of the subdifferential system at beta: for active rows the
/// norm of gradient + penalty direction, for zero rows the excess of the
/// gradient norm over the subgradient ball radius.
double group_lasso_kkt(const Matrix& z, const GroupLassoState& state,
                       double lambda, int n, int d) {
  const double radius = lambda / std::sqrt(static_cast<double>(d));
  const Matrix grad =
      -2.0 / (static_cast<double>(n) * d) * (z.transpose() * state.residual);
  double worst = 0.0;
  for (int j = 0; j < grad.rows(); ++j) {
    const double row_norm = state.beta.row(j).norm();
    if (row_norm > 0.0) {
      const Vector v = grad.row(j).transpose() +
                       radius * state.beta.row(j).transpose() / row_norm;
      worst = std::max(worst, v.norm());
    } else {
      worst = std::max(worst, grad.row(j).norm() - radius);
    }
  }
  return worst;
}

}  // namespace

RidgeFit ridge_fit(const Matrix& xhat, const Matrix& z,
                   const Vector& penalties) {
  check_shapes(xhat.rows(), z.rows());
  const int n = static_cast<int>(z.rows());
  const int p = static_cast<int>(z.cols());
  const int d = static_cast<int>(xhat.cols());
  if (penalties.size() != d) {
    throw NetdepError(ErrorCode::InvalidDimension,
                      "one penalty per response column required");
  }
  for (int k = 0; k < d; ++k) {
    if (!(penalties[k] >= 0.0) || !std::isfinite(penalties[k])) {
      throw NetdepError(ErrorCode::InvalidConfig,
                        "ridge penalties must be finite and >= 0");
    }
  }
  const Matrix gram = z.transpose() * z / n;
  const Matrix rhs = z.transpose() * xhat / n;
  Matrix coef(p, d);
  for (int k = 0; k < d; ++k) {
    Matrix system = gram;
    system.diagonal().array() += penalties[k];
    if (penalties[k] > 0.0) {
      Eigen::LLT<Matrix> llt(system);
      if (llt.info() != Eigen::Success) {
        throw NetdepError(ErrorCode::SingularSystem,
                          "penalized Gram not positive definite");
      }
      coef.col(k) = llt.solve(rhs.col(k));
    } else {
      Eigen::LDLT<Matrix> ldlt(system);
      const Vector diag = ldlt.vectorD();
      const double top = diag.cwiseAbs().maxCoeff();
      if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-12 * top) {
        throw NetdepError(ErrorCode::SingularSystem,
                          "Z'Z/n rank-deficient and penalty is zero");
      }
      coef.col(k) = ldlt.solve(rhs.col(k));
    }
  }
  return RidgeFit{std::move(coef), penalties};
}

Vector lasso_fit_column(const Vector& xcol, const Matrix& z, double lambda,
                        const LassoOptions& options) {
  check_shapes(xcol.size(), z.rows());
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw NetdepError(ErrorCode::InvalidConfig, "lambda must be >= 0");
  }
  const int n = static_cast<int>(z.rows());
  const int p = static_cast<int>(z.cols());
  const Vector col_sq = z.colwise().squaredNorm();
  Vector beta = options.warm_start ? *options.warm_start : Vector::Zero(p);
  Vector residual = xcol - z * beta;

  const double scale =
      std::max({lambda, 2.0 * (z.transpose() * xcol / n).cwiseAbs().maxCoeff(),
                1e-300});
  const double tol = options.tol_factor * scale;
  const double threshold = lambda * n / 2.0;

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (int j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) {
        if (beta[j] != 0.0) {
          residual += z.col(j) * beta[j];
          beta[j] = 0.0;
        }
        continue;
      }
      const double g = z.col(j).dot(residual) + col_sq[j] * beta[j];
      double next = 0.0;
      if (g > threshold) {
        next = (g - threshold) / col_sq[j];
      } else if (g < -threshold) {
        next = (g + threshold) / col_sq[j];
      }
      if (next != beta[j]) {
        residual += z.col(j) * (beta[j] - next);
        beta[j] = next;
      }
    }
    // KKT: active coords sit on the penalty boundary, zero coords inside it.
    const Vector grad = 2.0 * (z.transpose() * residual) / n;
    double worst = 0.0;
    for (int j = 0; j < p; ++j) {
      if (beta[j] != 0.0) {
        worst = std::max(worst,
                         std::abs(grad[j] - lambda * (beta[j] > 0 ? 1 : -1)));
      } else {
        worst = std::max(worst, std::abs(grad[j]) - lambda);
      }
    }
    if (worst <= tol) return beta;
  }
  throw NetdepError(ErrorCode::MaxIterations,
                    "lasso coordinate descent did not meet KKT tolerance");
}

double group_lasso_objective(const Matrix& xhat, const Matrix& z,
                             const Matrix& beta, double lambda) {
  const int n = static_cast<int>(z.rows());
  const int d = static_cast<int>(xhat.cols());
  double penalty = 0.0;
  for (int j = 0; j < beta.rows(); ++j) penalty += beta.row(j).norm();
  return (xhat - z * beta).squaredNorm() / (static_cast<double>(n) * d) +
         lambda / std::sqrt(static_cast<double>(d)) * penalty;
}

GroupLassoFit group_lasso_fit(const Matrix& xhat, const Matrix& z,
                              double lambda,
                              const GroupLassoOptions& options) {
  check_shapes(xhat.rows(), z.rows());
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw NetdepError(ErrorCode::InvalidConfig, "lambda must be >= 0");
  }
  const int n = static_cast<int>(z.rows());
  const int p = static_cast<int>(z.cols());
  const int d = static_cast<int>(xhat.cols());
  const Vector col_sq = z.colwise().squaredNorm();

  GroupLassoState state;
  state.beta = options.warm_start ? *options.warm_start : Matrix::Zero(p, d);
  state.residual = xhat - z * state.beta;

  const Matrix grad0 = 2.0 / (static_cast<double>(n) * d) * (z.transpose() * xhat);
  Vector grad0_norms(p);
  for (int j = 0; j < p; ++j) grad0_norms[j] = grad0.row(j).norm();
  const double tol = options.tol_factor * kkt_scale(lambda, d, grad0_norms);
  const double threshold = lambda * n * std::sqrt(static_cast<double>(d)) / 2.0;

  double prev_objective =
      options.verify_monotone
          ? group_lasso_objective(xhat, z, state.beta, lambda)
          : 0.0;

  // Returned change is on the KKT scale: a block step of size |delta| moves
  // the stationarity residual by about 2 c_j |delta| / (nd).
  Eigen::RowVectorXd g(d), next(d), delta(d);
  const double grad_unit = 2.0 / (static_cast<double>(n) * d);
  auto pass = [&](bool active_only) {
    double worst = 0.0;
    for (int j = 0; j < p; ++j) {
      const bool active = state.beta.row(j).squaredNorm() != 0.0;
      if (active_only && !active) continue;
      if (col_sq[j] == 0.0) {
        if (active) {
          state.residual.noalias() += z.col(j) * state.beta.row(j);
          state.beta.row(j).setZero();
        }
        continue;
      }
      g.noalias() = z.col(j).transpose() * state.residual;
      g += col_sq[j] * state.beta.row(j);
      const double g_norm = g.norm();
      if (g_norm <= threshold || g_norm <= kRowSnapTol) {
        next.setZero();
      } else {
        next = (1.0 - threshold / g_norm) / col_sq[j] * g;
      }
      delta = state.beta.row(j) - next;
      const double delta_norm = delta.norm();
      if (delta_norm != 0.0) {
        state.residual.noalias() += z.col(j) * delta;
        state.beta.row(j) = next;
        worst = std::max(worst, grad_unit * col_sq[j] * delta_norm);
      }
    }
    if (options.verify_monotone) {
      const double objective =
          group_lasso_objective(xhat, z, state.beta, lambda);
      assert(objective <=
             prev_objective + 1e-10 * std::max(1.0, prev_objective));
      prev_objective = objective;
    }
    return worst;
  };

  int sweeps = 0;
  while (sweeps < options.max_sweeps) {
    double change = pass(false);
    ++sweeps;
    // Refine the current active set cheaply before the next full pass.
    int inner = 0;
    while (change > 0.5 * tol && inner < 20 && sweeps < options.max_sweeps) {
      change = pass(true);
      ++sweeps;
      ++inner;
    }
    for (int j = 0; j < p; ++j) {
      const double norm = state.beta.row(j).norm();
      if (norm > 0.0 && norm < kRowSnapTol) {
        state.residual.noalias() += z.col(j) * state.beta.row(j);
        state.beta.row(j).setZero();
      }
    }
    const double kkt = group_lasso_kkt(z, state, lambda, n, d);
    if (kkt <= tol) {
      GroupLassoFit fit;
      fit.coefficients = std::move(state.beta);
      fit.penalty = lambda;
      fit.objective = group_lasso_objective(xhat, z, fit.coefficients, lambda);
      fit.kkt_residual = kkt;
      return fit;
    }
  }
  throw NetdepError(ErrorCode::MaxIterations,
                    "group lasso block descent did not meet KKT tolerance");
}

double glasso_lambda_max(const Matrix& xhat, const Matrix& z) {
  check_shapes(xhat.rows(), z.rows());
  const int n = static_cast<int>(z.rows());
  const int d = static_cast<int>(xhat.cols());
  const Matrix u = xhat.transpose() * z / n;  // d x p
  double best = 0.0;
  for (int j = 0; j < u.cols(); ++j) best = std::max(best, u.col(j).norm());
  return 2.0 / std::sqrt(static_cast<double>(d)) * best;
}

double lasso_lambda_max(const Vector& xcol, const Matrix& z) {
  check_shapes(xcol.size(), z.rows());
  const int n = static_cast<int>(z.rows());
  return 2.0 * (z.transpose() * xcol / n).cwiseAbs().maxCoeff();
}

std::vector<double> log_spaced_grid(double top, int count, double ratio) {
  if (!(top > 0.0) || count < 1 || !(ratio > 0.0) || ratio >= 1.0) {
    throw NetdepError(ErrorCode::InvalidConfig, "bad lambda grid parameters");
  }
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = top;
    return grid;
  }
  const double step = std::log(ratio) / (count - 1);
  for (int i = 0; i < count; ++i) grid[i] = top * std::exp(step * i);
  return grid;
}

CvResult cross_validate(FitMethod method, const Matrix& xhat, const Matrix& z,
                        const std::vector<double>& lambda_grid, int folds,
                        RngStream& rng) {
  check_shapes(xhat.rows(), z.rows());
  if (folds < 2) {
    throw NetdepError(ErrorCode::InvalidConfig, "need at least 2 folds");
  }
  if (lambda_grid.empty()) {
    throw NetdepError(ErrorCode::InvalidConfig, "lambda grid is empty");
  }
  for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
    if (lambda_grid[i] > lambda_grid[i - 1]) {
      throw NetdepError(ErrorCode::InvalidConfig,
                        "lambda grid must be descending");
    }
  }
  const int n = static_cast<int>(z.rows());
  const int d = static_cast<int>(xhat.cols());
  const int n_lambda = static_cast<int>(lambda_grid.size());
  if (folds > n) {
    throw NetdepError(ErrorCode::InvalidConfig, "more folds than rows");
  }
  const auto fold_rows = make_folds(n, folds, rng);

  // errors(li, k): total held-out squared error for lambda li, column k
  // (single column for the group LASSO, where the error pools all of X).
  const int error_cols = method == FitMethod::GroupLasso ? 1 : d;
  Matrix errors = Matrix::Zero(n_lambda, error_cols);

  for (int f = 0; f < folds; ++f) {
    const auto& val_rows = fold_rows[f];
    const auto train_rows = complement_rows(n, val_rows);
    const Matrix z_train = take_rows(z, train_rows);
    const Matrix z_val = take_rows(z, val_rows);
    const Matrix x_train = take_rows(xhat, train_rows);
    const Matrix x_val = take_rows(xhat, val_rows);

    switch (method) {
      case FitMethod::Ridge:
        accumulate_ridge_cv_errors(x_train, z_train, x_val, z_val, lambda_grid,
                                   errors);
        break;
      case FitMethod::Lasso: {
        for (int k = 0; k < d; ++k) {
          Vector warm = Vector::Zero(z.cols());
          for (int li = 0; li < n_lambda; ++li) {
            LassoOptions opts;
            opts.warm_start = &warm;
            opts.tol_factor = kCvPathTolFactor;
            warm = lasso_fit_column(x_train.col(k), z_train, lambda_grid[li],
                                    opts);
            errors(li, k) += (x_val.col(k) - z_val * warm).squaredNorm();
          }
        }
        break;
      }
      case FitMethod::GroupLasso: {
        Matrix warm = Matrix::Zero(z.cols(), d);
        for (int li = 0; li < n_lambda; ++li) {
          GroupLassoOptions opts;
          opts.warm_start = &warm;
          opts.verify_monotone = false;
          opts.tol_factor = kCvPathTolFactor;
          warm = group_lasso_fit(x_train, z_train, lambda_grid[li], opts)
                     .coefficients;
          errors(li, 0) += (x_val - z_val * warm).squaredNorm();
        }
        break;
      }
    }
  }

  // Descending grid, strict improvement: ties resolve to the largest lambda.
  CvResult result;
  result.lambdas.resize(error_cols);
  for (int k = 0; k < error_cols; ++k) {
    int best = 0;
    for (int li = 1; li < n_lambda; ++li) {
      if (errors(li, k) < errors(best, k)) best = li;
    }
    result.lambdas[k] = lambda_grid[best];
  }
  return result;
}

GroupLassoFit group_lasso_cv_fit(const Matrix& xhat, const Matrix& z,
                                 int folds, int grid_size, RngStream& rng) {
  const double top = glasso_lambda_max(xhat, z);
  if (top <= 0.0) {
    // X'Z vanishes; any positive penalty keeps everything at zero.
    GroupLassoFit fit;
    fit.coefficients = Matrix::Zero(z.cols(), xhat.cols());
    fit.penalty = 0.0;
    fit.objective = group_lasso_objective(xhat, z, fit.coefficients, 0.0);
    fit.kkt_residual = 0.0;
    return fit;
  }
  const auto grid = log_spaced_grid(top, grid_size);
  const CvResult cv = cross_validate(FitMethod::GroupLasso, xhat, z, grid,
                                     folds, rng);
  return group_lasso_fit(xhat, z, cv.lambdas[0]);
}

}  // namespace netdep
