#include "netdep/permtest.hpp"

#include <chrono>
#include <memory>

#include <json.hpp>

#include "netdep/cca.hpp"
#include "netdep/covtest.hpp"
#include "netdep/linalg.hpp"
#include "netdep/regression.hpp"
#include "netdep/threads.hpp"

namespace netdep {

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<int>& order) {
  Matrix out(static_cast<Eigen::Index>(order.size()), m.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(order[i]);
  }
  return out;
}

Matrix preprocess_z(const Matrix& z, bool standardize) {
  Matrix zc = center_columns(z);
  if (standardize) {
    const int n = static_cast<int>(zc.rows());
    for (int j = 0; j < zc.cols(); ++j) {
      const double sd = std::sqrt(zc.col(j).squaredNorm() / std::max(1, n - 1));
      if (sd > 0.0) zc.col(j) /= sd;
    }
  }
  return zc;
}

std::vector<int> identity_order(int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

double add_one_p_value(double observed, const std::vector<double>& replicates) {
  int count = 0;
  for (double r : replicates) {
    if (r >= observed) ++count;
  }
  return (1.0 + count) / (static_cast<double>(replicates.size()) + 1.0);
}

template <typename Fn>
void run_replicates(int n_perm, int n_rows, int threads, std::uint64_t seed,
                    const Fn& eval_one) {
  parallel_for(n_perm, threads, [&](int r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r) + 1);
    std::vector<int> order = rng.permutation(n_rows);
    try {
      eval_one(r, order, rng);
    } catch (const NetdepError& err) {
      if (err.code() != ErrorCode::NonUniqueMax) {
        throw NetdepError(err.code(), "replicate " + std::to_string(r) + ": " +
                                          err.what());
      }
      // Ties are measure-zero with continuous data; redraw once, then abort.
      std::vector<int> retry = rng.permutation(n_rows);
      try {
        eval_one(r, retry, rng);
      } catch (const NetdepError& again) {
        throw NetdepError(again.code(),
                          "replicate " + std::to_string(r) +
                              " failed after one redraw: " + again.what());
      }
    }
  });
}

}  // namespace

const char* test_method_name(TestMethod method) {
  switch (method) {
    case TestMethod::Ridge: return "ridge";
    case TestMethod::Lasso: return "lasso";
    case TestMethod::GroupLasso: return "glasso";
    case TestMethod::Cca: return "cca";
    case TestMethod::NetCca: return "netcca";
  }
  return "unknown";
}

TestMethod parse_test_method(const std::string& text) {
  if (text == "ridge") return TestMethod::Ridge;
  if (text == "lasso") return TestMethod::Lasso;
  if (text == "glasso") return TestMethod::GroupLasso;
  if (text == "cca") return TestMethod::Cca;
  if (text == "netcca") return TestMethod::NetCca;
  throw NetdepError(ErrorCode::InvalidConfig, "unknown method '" + text + "'");
}

double bonferroni_combine(const Vector& p_values) {
  if (p_values.size() < 1) {
    throw NetdepError(ErrorCode::InvalidDimension, "no p-values to combine");
  }
  return static_cast<double>(p_values.size()) * p_values.minCoeff();
}

TestOutcome permutation_test(TestMethod method, const ScalarStatistic& stat,
                             int n_rows, const PermutationOptions& options) {
  if (options.n_perm < 1) {
    throw NetdepError(ErrorCode::InvalidConfig, "n_perm must be >= 1");
  }
  TestOutcome out;
  out.method = method;
  out.n_perm = options.n_perm;
  out.seed = options.seed;
  out.config_echo = options.config_echo;

  RngStream observed_rng(options.seed, 0);
  const auto start = std::chrono::steady_clock::now();
  out.observed = stat(identity_order(n_rows), true, observed_rng);
  out.observed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  out.replicates.assign(options.n_perm, 0.0);
  run_replicates(options.n_perm, n_rows, options.threads, options.seed,
                 [&](int r, const std::vector<int>& order, RngStream& rng) {
                   out.replicates[r] = stat(order, false, rng);
                 });
  out.p_value = add_one_p_value(out.observed, out.replicates);
  return out;
}

TestOutcome permutation_test_per_dim(TestMethod method,
                                     const MultiStatistic& stat, int n_rows,
                                     const PermutationOptions& options) {
  if (options.n_perm < 1) {
    throw NetdepError(ErrorCode::InvalidConfig, "n_perm must be >= 1");
  }
  TestOutcome out;
  out.method = method;
  out.n_perm = options.n_perm;
  out.seed = options.seed;
  out.config_echo = options.config_echo;

  RngStream observed_rng(options.seed, 0);
  const auto start = std::chrono::steady_clock::now();
  const Vector observed = stat(identity_order(n_rows), true, observed_rng);
  out.observed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const int d = static_cast<int>(observed.size());

  Matrix replicate_stats(options.n_perm, d);
  run_replicates(options.n_perm, n_rows, options.threads, options.seed,
                 [&](int r, const std::vector<int>& order, RngStream& rng) {
                   replicate_stats.row(r) = stat(order, false, rng).transpose();
                 });

  Vector p_values(d);
  for (int k = 0; k < d; ++k) {
    int count = 0;
    for (int r = 0; r < options.n_perm; ++r) {
      if (replicate_stats(r, k) >= observed[k]) ++count;
    }
    p_values[k] = (1.0 + count) / (options.n_perm + 1.0);
  }

  out.per_dim_observed = observed;
  out.per_dim_p_values = p_values;
  out.p_value = bonferroni_combine(p_values);
  out.observed = observed.maxCoeff();
  out.replicates.assign(options.n_perm, 0.0);
  for (int r = 0; r < options.n_perm; ++r) {
    out.replicates[r] = replicate_stats.row(r).maxCoeff();
  }
  return out;
}

ScalarStatistic make_ridge_statistic(const Matrix& xhat, const Matrix& z,
                                     const StatOptions& options) {
  struct Context {
    Matrix xc, zc;
    std::vector<double> grid;
    StatOptions options;
    // Set during the observed evaluation when rerun_cv is off; the engine
    // evaluates the observed statistic before any replicate runs.
    std::optional<Vector> frozen_lambdas;
  };
  auto ctx = std::make_shared<Context>();
  ctx->xc = center_columns(xhat);
  ctx->zc = preprocess_z(z, options.standardize_z);
  ctx->options = options;
  const double top = std::max(glasso_lambda_max(ctx->xc, ctx->zc), 1e-12);
  ctx->grid = log_spaced_grid(top, options.cv_grid);

  return [ctx](const std::vector<int>& order, bool observed,
               RngStream& rng) -> double {
    const Matrix zs = gather_rows(ctx->zc, order);
    Vector lambdas;
    if (ctx->options.rerun_cv || !ctx->frozen_lambdas.has_value()) {
      lambdas = cross_validate(FitMethod::Ridge, ctx->xc, zs, ctx->grid,
                               ctx->options.cv_folds, rng)
                    .lambdas;
      if (!ctx->options.rerun_cv && observed) ctx->frozen_lambdas = lambdas;
    } else {
      lambdas = *ctx->frozen_lambdas;
    }
    return ridge_fit(ctx->xc, zs, lambdas).coefficients.norm();
  };
}

ScalarStatistic make_glasso_statistic(const Matrix& xhat, const Matrix& z,
                                      const StatOptions& options) {
  struct Context {
    Matrix xc, zc, r;
    double sigma2_null = 0.0;
    int n = 0, d = 0;
    StatOptions options;
  };
  auto ctx = std::make_shared<Context>();
  ctx->xc = center_columns(xhat);
  ctx->zc = preprocess_z(z, options.standardize_z);
  ctx->n = static_cast<int>(xhat.rows());
  ctx->d = static_cast<int>(xhat.cols());
  ctx->r = ctx->zc.transpose() * ctx->zc / ctx->n;
  RngStream unused(0);
  ctx->sigma2_null = estimate_sigma2(ctx->xc, ctx->zc, Sigma2Mode::Null, unused);
  ctx->options = options;

  return [ctx](const std::vector<int>& order, bool observed,
               RngStream& rng) -> double {
    const Matrix zs = gather_rows(ctx->zc, order);
    const Matrix u = ctx->xc.transpose() * zs / ctx->n;
    const KnotData knots = compute_knot_data_from_moments(u, ctx->r);
    const double sigma2 =
        observed ? estimate_sigma2(ctx->xc, zs, Sigma2Mode::Residual, rng,
                                   ctx->options.cv_folds, ctx->options.cv_grid)
                 : ctx->sigma2_null;
    const CovTestResult result =
        cov_test_statistic(knots, sigma2, ctx->n, ctx->d);
    if (observed && ctx->options.observed_details) {
      nlohmann::json details;
      details["lambda1"] = knots.lambda1;
      details["lambda2"] = knots.lambda2;
      details["selected_covariate"] = knots.m;
      details["sigma2"] = sigma2;
      *ctx->options.observed_details = details.dump();
    }
    return result.statistic;
  };
}

MultiStatistic make_lasso_statistic(const Matrix& xhat, const Matrix& z,
                                    const StatOptions& options) {
  struct Context {
    Matrix xc, zc, r;
    double sigma2_null = 0.0;  // pooled across dimensions
    int n = 0, d = 0;
    StatOptions options;
  };
  auto ctx = std::make_shared<Context>();
  ctx->xc = center_columns(xhat);
  ctx->zc = preprocess_z(z, options.standardize_z);
  ctx->n = static_cast<int>(xhat.rows());
  ctx->d = static_cast<int>(xhat.cols());
  ctx->r = ctx->zc.transpose() * ctx->zc / ctx->n;
  RngStream unused(0);
  ctx->sigma2_null = estimate_sigma2(ctx->xc, ctx->zc, Sigma2Mode::Null, unused);
  ctx->options = options;

  return [ctx](const std::vector<int>& order, bool observed,
               RngStream& rng) -> Vector {
    const Matrix zs = gather_rows(ctx->zc, order);
    const Matrix u_all = ctx->xc.transpose() * zs / ctx->n;
    // One variance estimate for all dimensions (the error variance is
    // shared across latent dimensions); the per-dimension specialization
    // applies to the knots only.
    const double sigma2 =
        observed ? estimate_sigma2(ctx->xc, zs, Sigma2Mode::Residual, rng,
                                   ctx->options.cv_folds, ctx->options.cv_grid)
                 : ctx->sigma2_null;
    Vector statistics(ctx->d);
    nlohmann::json details = nlohmann::json::array();
    for (int k = 0; k < ctx->d; ++k) {
      const KnotData knots =
          compute_knot_data_from_moments(u_all.row(k), ctx->r);
      statistics[k] = cov_test_statistic(knots, sigma2, ctx->n, 1).statistic;
      if (observed && ctx->options.observed_details) {
        details.push_back({{"dimension", k},
                           {"lambda1", knots.lambda1},
                           {"lambda2", knots.lambda2},
                           {"selected_covariate", knots.m}});
      }
    }
    if (observed && ctx->options.observed_details) {
      *ctx->options.observed_details =
          nlohmann::json{{"per_dimension", details}, {"sigma2", sigma2}}
              .dump();
    }
    return statistics;
  };
}

ScalarStatistic make_cca_statistic(const Matrix& xhat, const Matrix& z,
                                   const StatOptions& options) {
  struct Context {
    Matrix xw, zw;  // whitened blocks; rho = |xw' P zw| / n
    int n = 0;
  };
  auto ctx = std::make_shared<Context>();
  const Matrix xc = center_columns(xhat);
  const Matrix zc = preprocess_z(z, options.standardize_z);
  const int n = static_cast<int>(xhat.rows());
  const int p = static_cast<int>(z.cols());
  const Matrix sigma_x = xc.transpose() * xc / n;
  const Matrix sigma_z = zc.transpose() * zc / n;
  const double gamma = options.gamma >= 0.0
                           ? options.gamma
                           : default_cca_gamma(sigma_z, n, p);
  ctx->xw = xc * inv_sqrt_psd(sigma_x, gamma, WhitenMode::Strict);
  ctx->zw = zc * inv_sqrt_psd(sigma_z, gamma, WhitenMode::Strict);
  ctx->n = n;

  return [ctx](const std::vector<int>& order, bool, RngStream&) -> double {
    const Matrix zs = gather_rows(ctx->zw, order);
    const Matrix cross = ctx->xw.transpose() * zs / ctx->n;
    return std::clamp(largest_singular_value(cross), 0.0, 1.0);
  };
}

ScalarStatistic make_netcca_statistic(const Graph& a, const Matrix& z,
                                      const StatOptions& options) {
  const Matrix zc = preprocess_z(z, options.standardize_z);
  const int n = a.n();
  const int p = static_cast<int>(z.cols());
  const Matrix sigma_z = zc.transpose() * zc / n;
  const double gamma = options.gamma >= 0.0
                           ? options.gamma
                           : default_cca_gamma(sigma_z, n, p);
  const double tau = options.tau > 0.0 ? options.tau : default_network_tau(n);
  auto ctx = std::make_shared<NetworkCcaContext>(
      make_network_cca_context(a, zc, tau, gamma));

  return [ctx](const std::vector<int>& order, bool, RngStream&) -> double {
    return network_cca_rho(*ctx, order);
  };
}

}  // namespace netdep
