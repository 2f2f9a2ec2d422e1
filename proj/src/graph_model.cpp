#include "netdep/graph_model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace netdep {

namespace {

constexpr double kProbTol = 1e-12;

// Stream ids carved out of the spec seed: id 1 draws the frozen quantities
// (B, sparse supports), keeping them disjoint from replicate streams.
constexpr std::uint64_t kSpecStream = 0x5350454331ULL;

Matrix draw_dense_coefficients(int p, int d, RngStream& rng) {
  // B_kr ~ N(1/k, 1/(9 k^2)), rows indexed from 1.
  Matrix b(p, d);
  for (int k = 0; k < p; ++k) {
    const double mean = 1.0 / (k + 1);
    const double sd = 1.0 / (3.0 * (k + 1));
    for (int r = 0; r < d; ++r) {
      b(k, r) = rng.normal(mean, sd);
    }
  }
  return b;
}

void rescale_columns_to_unit(Matrix& b) {
  for (int r = 0; r < b.cols(); ++r) {
    const double norm = b.col(r).norm();
    if (norm > 0.0) b.col(r) /= norm;
  }
}

Matrix draw_normal_matrix(int rows, int cols, double sd, RngStream& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = rng.normal(0.0, sd);
    }
  }
  return m;
}

/// Z with rows i.i.d. N(0, Sigma_Z), via the lower Cholesky factor.
Matrix draw_covariates(int n, const Matrix& sigma_chol_l, RngStream& rng) {
  const int p = static_cast<int>(sigma_chol_l.rows());
  Matrix z(n, p);
  Vector xi(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) xi[j] = rng.normal();
    z.row(i) = (sigma_chol_l * xi).transpose();
  }
  return z;
}

int entrywise_support_size(int n, int d) {
  // floor((log n) / 2 * d): entry-count parity with the row-wise case,
  // which zeroes all but floor((log n)/2) rows of d entries each.
  return static_cast<int>(std::floor(std::log(static_cast<double>(n)) / 2.0 *
                                     static_cast<double>(d)));
}

int rowwise_support_size(int n) {
  return static_cast<int>(std::floor(std::log(static_cast<double>(n)) / 2.0));
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::NoSparsity: return "no_sparsity";
    case Scenario::EntrywiseSparse: return "entrywise_sparse";
    case Scenario::RowwiseSparse: return "rowwise_sparse";
    case Scenario::HighCorrelation: return "high_correlation";
    case Scenario::Network: return "network";
    case Scenario::AssortativeMixing: return "assortative_mixing";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& text) {
  if (text == "i" || text == "no_sparsity") return Scenario::NoSparsity;
  if (text == "ii" || text == "entrywise_sparse") return Scenario::EntrywiseSparse;
  if (text == "iii" || text == "rowwise_sparse") return Scenario::RowwiseSparse;
  if (text == "iv" || text == "high_correlation") return Scenario::HighCorrelation;
  if (text == "v" || text == "network") return Scenario::Network;
  if (text == "vi" || text == "assortative_mixing") return Scenario::AssortativeMixing;
  throw NetdepError(ErrorCode::InvalidConfig, "unknown scenario '" + text + "'");
}

void ScenarioSpec::validate() const {
  if (n < 2) throw NetdepError(ErrorCode::InvalidConfig, "n must be >= 2");
  if (p < 1) throw NetdepError(ErrorCode::InvalidConfig, "p must be >= 1");
  if (d < 1) throw NetdepError(ErrorCode::InvalidConfig, "d must be >= 1");
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw NetdepError(ErrorCode::InvalidConfig, "s must be finite and >= 0");
  }
  if (scenario == Scenario::AssortativeMixing && d != 4) {
    throw NetdepError(ErrorCode::InvalidConfig,
                      "assortative mixing uses four Dirichlet groups: d must be 4");
  }
}

Graph sample_rdpg_binary(const LatentPositions& x, RngStream& rng) {
  const int n = x.n();
  const Matrix p = x.values * x.values.transpose();
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double prob = p(i, j);
      if (prob < -kProbTol || prob > 1.0 + kProbTol) {
        throw NetdepError(ErrorCode::OutOfRangeProbability,
                          "X_i.X_j = " + std::to_string(prob) +
                              " outside [0,1] for pair (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
      prob = std::clamp(prob, 0.0, 1.0);
      const double edge = rng.uniform() < prob ? 1.0 : 0.0;
      a(i, j) = edge;
      a(j, i) = edge;
    }
  }
  return Graph::make(std::move(a), GraphKind::Binary);
}

Graph sample_rdpg_weighted(const LatentPositions& x, double noise_sd,
                           RngStream& rng) {
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw NetdepError(ErrorCode::InvalidConfig,
                      "noise sd must be finite and >= 0");
  }
  const int n = x.n();
  Matrix a = x.values * x.values.transpose();
  // A from X X^T is symmetric up to rounding; enforce it bitwise before
  // adding the symmetric noise so Graph::make's exactness check holds.
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double eps = noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0;
      const double value = a(i, j) + eps;
      a(i, j) = value;
      a(j, i) = value;
    }
  }
  return Graph::make(std::move(a), GraphKind::Weighted);
}

Matrix build_sigma_z(SigmaZKind kind, int p, bool* near_singular) {
  if (near_singular) *near_singular = false;
  if (kind == SigmaZKind::Equicorrelation) {
    if (p < 2) {
      throw NetdepError(ErrorCode::InvalidDimension,
                        "equicorrelation needs p >= 2 (nu = 1/(p-1))");
    }
    const double nu = 1.0 / (p - 1);
    Matrix sigma = Matrix::Constant(p, p, nu);
    sigma.diagonal().setOnes();
    // Eigenvalues are 1 - nu (p-1 times) and 2; rank drops exactly at p = 2.
    if (near_singular && 1.0 - nu <= 1e-12) *near_singular = true;
    return sigma;
  }
  if (p < 1) {
    throw NetdepError(ErrorCode::InvalidDimension, "p must be >= 1");
  }
  const double nu = 0.95;
  Matrix sigma(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      sigma(i, j) = std::pow(nu, std::abs(i - j));
    }
  }
  double lambda_max = 1.0;
  if (p > 1) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
    lambda_max = eig.eigenvalues().maxCoeff();
  }
  sigma *= 2.0 / lambda_max;
  return sigma;
}

Matrix scenario_coefficients(const ScenarioSpec& spec) {
  spec.validate();
  RngStream rng(spec.seed, kSpecStream);
  Matrix b = Matrix::Zero(spec.p, spec.d);
  switch (spec.scenario) {
    case Scenario::NoSparsity:
      b = draw_dense_coefficients(spec.p, spec.d, rng);
      break;
    case Scenario::EntrywiseSparse: {
      const int count =
          std::min(entrywise_support_size(spec.n, spec.d), spec.p * spec.d);
      const auto cells = rng.sample_without_replacement(spec.p * spec.d, count);
      for (int cell : cells) {
        b(cell % spec.p, cell / spec.p) = rng.normal();
      }
      break;
    }
    case Scenario::RowwiseSparse:
    case Scenario::HighCorrelation:
    case Scenario::Network: {
      const int count = std::min(rowwise_support_size(spec.n), spec.p);
      const auto rows = rng.sample_without_replacement(spec.p, count);
      for (int row : rows) {
        for (int r = 0; r < spec.d; ++r) b(row, r) = rng.normal();
      }
      break;
    }
    case Scenario::AssortativeMixing:
      return b;  // covariates derive from groups, not from a linear map
  }
  rescale_columns_to_unit(b);
  return b;
}

ScenarioDraw generate_scenario(const ScenarioSpec& spec, RngStream& rng) {
  spec.validate();
  const int n = spec.n;
  const int p = spec.p;
  const int d = spec.d;
  const Matrix b = scenario_coefficients(spec);

  if (spec.scenario == Scenario::AssortativeMixing) {
    std::vector<int> groups(n);
    Matrix x(n, 4);
    for (int i = 0; i < n; ++i) {
      groups[i] = 1 + static_cast<int>(rng.uniform_int(4));
      Vector alpha = Vector::Ones(4);
      alpha[groups[i] - 1] = 100.0;
      x.row(i) = sample_dirichlet(alpha, rng).transpose();
    }
    Matrix z(n, p);
    for (int i = 0; i < n; ++i) {
      z(i, 0) = spec.s * (groups[i] - 2.5) + rng.normal(0.0, std::sqrt(5.0 / 4.0));
      for (int j = 1; j < p; ++j) {
        z(i, j) = rng.normal(0.0, std::sqrt(5.0 / 2.0));
      }
    }
    LatentPositions latent{std::move(x)};
    ScenarioDraw draw{sample_rdpg_binary(latent, rng), std::move(z),
                      std::move(latent), b, std::move(groups)};
    return draw;
  }

  const SigmaZKind sigma_kind = spec.scenario == Scenario::HighCorrelation
                                    ? SigmaZKind::ArDecay
                                    : SigmaZKind::Equicorrelation;
  const Matrix sigma_z = build_sigma_z(sigma_kind, p);
  Eigen::LLT<Matrix> chol(sigma_z);
  Matrix sigma_l;
  if (chol.info() == Eigen::Success) {
    sigma_l = chol.matrixL();
  } else {
    // Equicorrelation at p = 2 is PSD but singular; take the square root
    // through the eigendecomposition instead.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_z);
    sigma_l = eig.eigenvectors() *
              eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  Matrix z = draw_covariates(n, sigma_l, rng);

  if (spec.scenario == Scenario::Network) {
    Matrix x(n, d);
    for (int i = 0; i < n; ++i) {
      Vector alpha(d);
      for (int r = 0; r < d; ++r) {
        const double e_ir = rng.normal(0.0, std::sqrt(2.0));
        alpha[r] = std::exp(spec.s * z.row(i).dot(b.col(r)) + e_ir);
      }
      x.row(i) = sample_dirichlet(alpha, rng).transpose();
    }
    LatentPositions latent{std::move(x)};
    ScenarioDraw draw{sample_rdpg_binary(latent, rng), std::move(z),
                      std::move(latent), b, std::nullopt};
    return draw;
  }

  const Matrix e = draw_normal_matrix(n, d, std::sqrt(2.0), rng);
  Matrix x = spec.s * (z * b) + e;
  LatentPositions latent{std::move(x)};
  const double noise_sd = spec.s * spec.s + 1.0;
  ScenarioDraw draw{sample_rdpg_weighted(latent, noise_sd, rng), std::move(z),
                    std::move(latent), b, std::nullopt};
  return draw;
}

}  // namespace netdep
