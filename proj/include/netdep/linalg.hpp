#pragma once

#include "netdep/types.hpp"

namespace netdep {

/// Subtract each column's mean. Equivalent to left-multiplying by the
/// centering matrix I - J/n, which is never materialized.
Matrix center_columns(const Matrix& m);

/// Largest eigenvalue of a symmetric PSD matrix, by power iteration with a
/// deterministic start vector; falls back to a full eigensolve if the
/// iteration has not locked in after max_iters.
double largest_eigenvalue_psd(const Matrix& h, double rel_tol = 1e-13,
                              int max_iters = 20000);

/// Largest singular value, computed from the Gram matrix on the smaller side.
double largest_singular_value(const Matrix& m);

/// Max absolute asymmetry |M - M^T|.
double max_asymmetry(const Matrix& m);

/// Haar-ish random orthogonal matrix via QR of a Gaussian matrix, with the
/// sign fix that makes the distribution uniform.
Matrix random_orthogonal(int k, class RngStream& rng);

}  // namespace netdep
