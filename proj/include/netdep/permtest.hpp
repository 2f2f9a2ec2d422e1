#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netdep/rng.hpp"
#include "netdep/types.hpp"

namespace netdep {

enum class TestMethod { Ridge, Lasso, GroupLasso, Cca, NetCca };

const char* test_method_name(TestMethod method);
TestMethod parse_test_method(const std::string& text);

struct TestOutcome {
  TestMethod method = TestMethod::Cca;
  double observed = 0.0;
  std::vector<double> replicates;
  double p_value = 1.0;
  int n_perm = 0;
  std::uint64_t seed = 0;
  std::string config_echo;  // JSON text describing the resolved run
  double observed_seconds = 0.0;

  // Per-dimension results, present only for the per-column LASSO test whose
  // reported p-value is the (possibly > 1) Bonferroni combination.
  std::optional<Vector> per_dim_observed;
  std::optional<Vector> per_dim_p_values;

  // JSON blob from the observed evaluation (knots and variance estimate for
  // the covariance tests); filled by the caller from StatOptions.
  std::optional<std::string> observed_details_json;
};

/// A statistic evaluated against a row order of Z: replicate data pairs row
/// i of X (or A) with row order[i] of Z. `observed` distinguishes the real
/// data from permutation replicates (the covariance tests switch their
/// variance estimator on it); rng supplies any internal randomness such as
/// cross-validation fold shuffles.
using ScalarStatistic = std::function<double(
    const std::vector<int>& order, bool observed, RngStream& rng)>;
using MultiStatistic = std::function<Vector(
    const std::vector<int>& order, bool observed, RngStream& rng)>;

struct PermutationOptions {
  int n_perm = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string config_echo;
};

/// Permutation test with the add-one estimator
/// p = (1 + #{replicates >= observed}) / (n_perm + 1). Replicate r draws its
/// permutation from stream (seed, r + 1); a replicate failing with
/// NonUniqueMax is redrawn once from the same stream, then the run aborts.
TestOutcome permutation_test(TestMethod method, const ScalarStatistic& stat,
                             int n_rows, const PermutationOptions& options);

/// Per-dimension variant: one permutation p-value per entry of the statistic
/// vector, combined by Bonferroni into the reported p-value.
TestOutcome permutation_test_per_dim(TestMethod method,
                                     const MultiStatistic& stat, int n_rows,
                                     const PermutationOptions& options);

/// d * min(p); deliberately not clipped at 1.
double bonferroni_combine(const Vector& p_values);

struct StatOptions {
  int cv_folds = 10;
  int cv_grid = 50;
  bool rerun_cv = true;     // ridge: redo cross-validation in every replicate
  double gamma = -1.0;      // CCA ridge; < 0 selects the default heuristic
  double tau = -1.0;        // network CCA; < 0 selects sqrt(n)
  bool standardize_z = false;
  // When set, the covariance-test statistics store a JSON description of
  // their observed evaluation (knots, sigma^2) here.
  std::shared_ptr<std::string> observed_details;
};

/// Statistic factories. Each centers its inputs (an unpenalized intercept)
/// and precomputes whatever is invariant under row permutations of Z.
ScalarStatistic make_ridge_statistic(const Matrix& xhat, const Matrix& z,
                                     const StatOptions& options = {});
ScalarStatistic make_glasso_statistic(const Matrix& xhat, const Matrix& z,
                                      const StatOptions& options = {});
MultiStatistic make_lasso_statistic(const Matrix& xhat, const Matrix& z,
                                    const StatOptions& options = {});
ScalarStatistic make_cca_statistic(const Matrix& xhat, const Matrix& z,
                                   const StatOptions& options = {});
ScalarStatistic make_netcca_statistic(const Graph& a, const Matrix& z,
                                      const StatOptions& options = {});

}  // namespace netdep
