#include "netdep/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "netdep/rng.hpp"

namespace netdep {

Matrix center_columns(const Matrix& m) {
  return m.rowwise() - m.colwise().mean();
}

double largest_eigenvalue_psd(const Matrix& h, double rel_tol, int max_iters) {
  const int k = static_cast<int>(h.rows());
  if (k == 0) return 0.0;
  if (k == 1) return h(0, 0);
  Vector v = Vector::Ones(k);
  for (int i = 0; i < k; ++i) {
    v[i] += 1e-3 * static_cast<double>(i % 7);
  }
  v.normalize();
  double lambda = 0.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    Vector w = h * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    const double next = w.dot(h * w);
    const bool settled = std::abs(next - lambda) <= rel_tol * std::max(1.0, std::abs(next));
    lambda = next;
    v = w;
    if (settled && iter > 2) return lambda;
  }
  // Slow spectral gap; get the exact answer instead of a stale iterate.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double largest_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Matrix gram;
  if (m.rows() <= m.cols()) {
    gram = m * m.transpose();
  } else {
    gram = m.transpose() * m;
  }
  return std::sqrt(std::max(0.0, largest_eigenvalue_psd(gram)));
}

double max_asymmetry(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

Matrix random_orthogonal(int k, RngStream& rng) {
  Matrix g(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      g(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace netdep
