#include "netdep/cca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "netdep/linalg.hpp"

namespace netdep {

namespace {

void require_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw NetdepError(ErrorCode::InvalidDimension, "matrix must be square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (max_asymmetry(m) > 1e-10 * scale) {
    throw NetdepError(ErrorCode::AsymmetricInput,
                      "matrix is not symmetric to 1e-10");
  }
}

void require_well_conditioned(const Matrix& sigma, const char* which) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw NetdepError(ErrorCode::SingularCovariance,
                      std::string(which) +
                          " block is rank-deficient; pass gamma > 0");
  }
}

/// Top singular triple of a d x p matrix via the d x d Gram side.
void top_singular_triple(const Matrix& c, double& sigma, Vector& left,
                         Vector& right) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c * c.transpose());
  const int d = static_cast<int>(c.rows());
  sigma = std::sqrt(std::max(0.0, eig.eigenvalues()[d - 1]));
  left = eig.eigenvectors().col(d - 1);
  if (sigma > 0.0) {
    right = c.transpose() * left / sigma;
  } else {
    right = Vector::Zero(c.cols());
    if (c.cols() > 0) right[0] = 1.0;
  }
}

}  // namespace

CovarianceBlocks covariance_blocks(const Matrix& x, const Matrix& z) {
  if (x.rows() != z.rows()) {
    throw NetdepError(ErrorCode::InvalidDimension,
                      "X and Z row counts differ");
  }
  const int n = static_cast<int>(x.rows());
  if (n < 2) {
    throw NetdepError(ErrorCode::InvalidDimension, "need n >= 2");
  }
  const Matrix xc = center_columns(x);
  const Matrix zc = center_columns(z);
  CovarianceBlocks blocks;
  blocks.sigma_x = xc.transpose() * xc / n;
  blocks.sigma_z = zc.transpose() * zc / n;
  blocks.sigma_xz = xc.transpose() * zc / n;
  blocks.n = n;
  return blocks;
}

Matrix inv_sqrt_psd(const Matrix& m, double ridge, WhitenMode mode) {
  require_symmetric(m);
  if (!(ridge >= 0.0)) {
    throw NetdepError(ErrorCode::InvalidConfig, "ridge must be >= 0");
  }
  Matrix shifted = (m + m.transpose()) / 2.0;
  shifted.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(shifted);
  const Vector& values = eig.eigenvalues();
  Vector scaled(values.size());
  if (mode == WhitenMode::Strict) {
    for (int i = 0; i < values.size(); ++i) {
      if (!(values[i] > 1e-12)) {
        throw NetdepError(ErrorCode::NotPositiveDefinite,
                          "eigenvalue " + std::to_string(values[i]) +
                              " too small for strict inverse square root");
      }
      scaled[i] = 1.0 / std::sqrt(values[i]);
    }
  } else {
    const double top = values.maxCoeff();
    for (int i = 0; i < values.size(); ++i) {
      scaled[i] = values[i] > 1e-10 * std::max(top, 0.0)
                      ? 1.0 / std::sqrt(values[i])
                      : 0.0;
    }
  }
  return eig.eigenvectors() * scaled.asDiagonal() *
         eig.eigenvectors().transpose();
}

CcaResult cca_coefficient(const Matrix& xhat, const Matrix& z, double gamma) {
  if (!(gamma >= 0.0)) {
    throw NetdepError(ErrorCode::InvalidConfig, "gamma must be >= 0");
  }
  const CovarianceBlocks blocks = covariance_blocks(xhat, z);
  if (gamma == 0.0) {
    require_well_conditioned(blocks.sigma_x, "X covariance");
    require_well_conditioned(blocks.sigma_z, "Z covariance");
  }
  const Matrix wx = inv_sqrt_psd(blocks.sigma_x, gamma, WhitenMode::Strict);
  const Matrix wz = inv_sqrt_psd(blocks.sigma_z, gamma, WhitenMode::Strict);
  const Matrix c = wx * blocks.sigma_xz * wz;

  CcaResult result;
  result.regularization =
      gamma > 0.0 ? CcaRegularization::Ridge : CcaRegularization::None;
  result.gamma = gamma;
  double sigma;
  Vector left, right;
  top_singular_triple(c, sigma, left, right);
  result.rho = std::clamp(sigma, 0.0, 1.0);
  result.direction_u = (wx * left).normalized();
  result.direction_v = (wz * right).normalized();
  return result;
}

double default_cca_gamma(const Matrix& sigma_z, int n, int p) {
  if (p < n / 2) return 0.0;
  return 1e-3 * sigma_z.trace() / p;
}

NetworkCcaContext make_network_cca_context(const Graph& a, const Matrix& z,
                                           double tau, double gamma_z) {
  if (!(tau > 0.0)) {
    throw NetdepError(ErrorCode::InvalidConfig, "tau must be > 0");
  }
  if (a.n() != z.rows()) {
    throw NetdepError(ErrorCode::InvalidDimension,
                      "graph and covariate row counts differ");
  }
  const int n = a.n();
  Matrix am = a.adjacency;  // A M_n: subtract row means
  const Vector row_means = am.rowwise().mean();
  am.colwise() -= row_means;

  const Matrix zc = center_columns(z);
  const Matrix sigma_z = zc.transpose() * zc / n;
  const Matrix wz = inv_sqrt_psd(sigma_z, gamma_z, WhitenMode::Strict);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(am * am.transpose() / n);
  NetworkCcaContext ctx;
  ctx.nu = eig.eigenvalues().cwiseMax(0.0);
  ctx.w = eig.eigenvectors();
  const Vector scale = (ctx.nu.array() + tau).rsqrt().matrix();
  ctx.f = scale.asDiagonal() * (ctx.w.transpose() * am) / n;
  ctx.zw = zc * wz;
  ctx.tau = tau;
  ctx.gamma = gamma_z;
  return ctx;
}

double network_cca_rho(const NetworkCcaContext& ctx,
                       const std::vector<int>& order) {
  const int n = static_cast<int>(ctx.zw.rows());
  Matrix permuted(n, ctx.zw.cols());
  for (int i = 0; i < n; ++i) permuted.row(i) = ctx.zw.row(order[i]);
  return std::clamp(largest_singular_value(ctx.f * permuted), 0.0, 1.0);
}

CcaResult network_cca_coefficient(const Graph& a, const Matrix& z, double tau,
                                  double gamma_z) {
  const NetworkCcaContext ctx = make_network_cca_context(a, z, tau, gamma_z);
  const Matrix g = ctx.f * ctx.zw;

  CcaResult result;
  result.regularization = CcaRegularization::Network;
  result.tau = tau;
  result.gamma = gamma_z;

  // g is n x p; take the top triple through the smaller Gram side.
  Matrix gram = g.rows() <= g.cols() ? Matrix(g * g.transpose())
                                     : Matrix(g.transpose() * g);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const int last = static_cast<int>(gram.rows()) - 1;
  const double sigma = std::sqrt(std::max(0.0, eig.eigenvalues()[last]));
  result.rho = std::clamp(sigma, 0.0, 1.0);

  Vector left, right;
  if (g.rows() <= g.cols()) {
    left = eig.eigenvectors().col(last);
    right = sigma > 0.0 ? Vector(g.transpose() * left / sigma)
                        : Vector::Zero(g.cols());
  } else {
    right = eig.eigenvectors().col(last);
    left = sigma > 0.0 ? Vector(g * right / sigma) : Vector::Zero(g.rows());
  }
  // Map back out of the whitened bases.
  result.direction_u = (ctx.w * left).normalized();
  const Matrix zc = center_columns(z);
  const Matrix sigma_z = zc.transpose() * zc / static_cast<double>(a.n());
  result.direction_v =
      (inv_sqrt_psd(sigma_z, gamma_z, WhitenMode::Strict) * right).normalized();
  return result;
}

}  // namespace netdep
