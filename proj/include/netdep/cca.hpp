#pragma once

#include "netdep/types.hpp"

namespace netdep {

struct CovarianceBlocks {
  Matrix sigma_x;   // d x d
  Matrix sigma_z;   // p x p
  Matrix sigma_xz;  // d x p
  int n = 0;
};

/// Sample covariance blocks of (X, Z), computed by centering columns and
/// multiplying; the centering matrix is never materialized.
CovarianceBlocks covariance_blocks(const Matrix& x, const Matrix& z);

enum class WhitenMode { Strict, Pseudo };

/// (M + ridge I)^{-1/2} through the eigendecomposition. Strict mode requires
/// all eigenvalues of M + ridge I to exceed 1e-12 (NotPositiveDefinite
/// otherwise); pseudo mode maps eigenvalues at or below 1e-10 * lambda_max
/// to zero.
Matrix inv_sqrt_psd(const Matrix& m, double ridge, WhitenMode mode);

enum class CcaRegularization { None, Ridge, Network };

struct CcaResult {
  double rho = 0.0;
  Vector direction_u;  // d entries (n for the full-network variant)
  Vector direction_v;  // p entries
  CcaRegularization regularization = CcaRegularization::None;
  double gamma = 0.0;
  double tau = 0.0;
};

/// First canonical correlation between X-hat and Z: the top singular value
/// of (Sigma_X + g I)^{-1/2} Sigma_XZ (Sigma_Z + g I)^{-1/2}. With gamma = 0
/// a condition number above 1e12 on either block raises SingularCovariance.
CcaResult cca_coefficient(const Matrix& xhat, const Matrix& z, double gamma);

/// Regularized full-network CCA between adjacency rows and covariates. The
/// n x n whitening is applied through one symmetric eigendecomposition of
/// Sigma_A = A M_n A / n; no n x n inverse square root is formed.
CcaResult network_cca_coefficient(const Graph& a, const Matrix& z, double tau,
                                  double gamma_z);

/// Heuristic ridge for the Z block: 0 while p < n/2, otherwise
/// 1e-3 trace(Sigma_Z)/p.
double default_cca_gamma(const Matrix& sigma_z, int n, int p);

inline double default_network_tau(int n) {
  return std::sqrt(static_cast<double>(n));
}

/// Shared read-only A-side factorization for permutation replicates:
/// permuting rows of Z changes neither Sigma_A nor Sigma_Z, so the map
/// rho(order) = |F . rows(ZW, order)| needs one n^2 p product per replicate.
struct NetworkCcaContext {
  Matrix f;        // n x n: diag((nu+tau)^{-1/2}) W' (A M_n) / n
  Matrix zw;       // n x p: centered Z times (Sigma_Z + gamma I)^{-1/2}
  Matrix w;        // n x n eigenvectors of Sigma_A (for directions)
  Vector nu;       // eigenvalues of Sigma_A
  double tau = 0.0;
  double gamma = 0.0;
};

NetworkCcaContext make_network_cca_context(const Graph& a, const Matrix& z,
                                           double tau, double gamma_z);

/// rho for the dataset with Z rows reordered as zw.row(order[i]).
double network_cca_rho(const NetworkCcaContext& ctx,
                       const std::vector<int>& order);

}  // namespace netdep
