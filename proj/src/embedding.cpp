#include "netdep/embedding.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace netdep {

Embedding ase(const Graph& a, int d) {
  const int n = a.n();
  if (d < 1 || d > n) {
    throw NetdepError(ErrorCode::InvalidDimension,
                      "embedding dimension must be in [1, n]");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.adjacency);
  if (eig.info() != Eigen::Success) {
    throw NetdepError(ErrorCode::SingularSystem, "eigendecomposition failed");
  }
  // Eigen returns ascending order.
  Vector full = eig.eigenvalues().reverse();
  Vector retained = full.head(d);
  for (int k = 0; k < d; ++k) {
    if (!(retained[k] > 0.0)) {
      throw NetdepError(
          ErrorCode::NonPositiveEigenvalue,
          "eigenvalue " + std::to_string(k + 1) + " of requested " +
              std::to_string(d) + " is " + std::to_string(retained[k]));
    }
  }
  Matrix positions(n, d);
  for (int k = 0; k < d; ++k) {
    Vector v = eig.eigenvectors().col(n - 1 - k);
    int lead = 0;
    double best = std::abs(v[0]);
    for (int i = 1; i < n; ++i) {
      const double mag = std::abs(v[i]);
      if (mag > best) {
        best = mag;
        lead = i;
      }
    }
    if (v[lead] < 0.0) v = -v;
    positions.col(k) = std::sqrt(retained[k]) * v;
  }
  return Embedding{std::move(positions), std::move(retained), std::move(full)};
}

int select_dimension(const Vector& spectrum_descending, int d_max) {
  if (d_max < 1) {
    throw NetdepError(ErrorCode::InvalidDimension, "d_max must be >= 1");
  }
  const int n = static_cast<int>(spectrum_descending.size());
  if (n <= 1 || d_max == 1) return 1;

  std::vector<double> mags(n);
  for (int i = 0; i < n; ++i) mags[i] = std::abs(spectrum_descending[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());

  std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + mags[i];
    prefix_sq[i + 1] = prefix_sq[i] + mags[i] * mags[i];
  }

  const int q_max = std::min(d_max, n - 1);
  int best_q = 1;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int q = 1; q <= q_max; ++q) {
    const double n1 = q;
    const double n2 = n - q;
    const double mu1 = prefix[q] / n1;
    const double mu2 = (prefix[n] - prefix[q]) / n2;
    const double ss1 = prefix_sq[q] - n1 * mu1 * mu1;
    const double ss2 = (prefix_sq[n] - prefix_sq[q]) - n2 * mu2 * mu2;
    // Pooled common variance across the two segments.
    const double denom = std::max(1.0, static_cast<double>(n - 2));
    const double var = std::max((ss1 + ss2) / denom, 1e-300);
    const double ll = -0.5 * n * std::log(2.0 * M_PI * var) -
                      (ss1 + ss2) / (2.0 * var);
    if (ll > best_ll + 1e-12) {
      best_ll = ll;
      best_q = q;
    }
  }
  return best_q;
}

}  // namespace netdep
