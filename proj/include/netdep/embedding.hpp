#pragma once

#include "netdep/types.hpp"

namespace netdep {

struct Embedding {
  Matrix positions;       // n x d, U_d S_d^{1/2}
  Vector eigenvalues;     // retained d eigenvalues, descending
  Vector full_spectrum;   // all n eigenvalues, descending
};

/// Adjacency spectral embedding: eigenvectors of the d algebraically largest
/// eigenvalues, scaled by sqrt(eigenvalue). Each eigenvector is flipped so
/// its largest-magnitude entry (lowest index on ties) is positive, which
/// pins down an otherwise arbitrary sign. Throws NonPositiveEigenvalue if
/// any retained eigenvalue is <= 0.
Embedding ase(const Graph& a, int d);

/// Profile-likelihood elbow (Zhu-Ghodsi style) over eigenvalue magnitudes:
/// the split maximizing a two-segment common-variance Gaussian likelihood,
/// capped at d_max. Flat spectra fall back to 1.
int select_dimension(const Vector& spectrum_descending, int d_max);

}  // namespace netdep
