#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netdep/rng.hpp"
#include "netdep/types.hpp"

namespace netdep {

/// The six synthetic data-generating processes used for power and level
/// studies. (i)-(iv) couple covariates to latent positions through a linear
/// model and emit weighted graphs; (v) and (vi) emit binary RDPGs.
enum class Scenario {
  NoSparsity,        // (i)
  EntrywiseSparse,   // (ii)
  RowwiseSparse,     // (iii)
  HighCorrelation,   // (iv)
  Network,           // (v)
  AssortativeMixing, // (vi)
};

const char* scenario_name(Scenario s);
/// Accepts roman numerals ("i".."vi") or the long names above.
Scenario parse_scenario(const std::string& text);

struct ScenarioSpec {
  Scenario scenario = Scenario::NoSparsity;
  int n = 100;
  int p = 200;
  int d = 4;
  double s = 0.0;  // root signal-to-noise ratio
  std::uint64_t seed = 0;

  /// Throws InvalidConfig on out-of-range sizes or d != 4 for scenario (vi).
  void validate() const;
};

struct ScenarioDraw {
  Graph graph;
  Matrix covariates;        // n x p
  LatentPositions latent;   // ground truth X
  Matrix coefficients;      // p x d (zero matrix for scenario vi)
  std::optional<std::vector<int>> groups;  // scenario vi only, 1-based labels
};

/// Binary RDPG: A_ij ~ Bernoulli(X_i . X_j) independently for i < j, zero
/// diagonal. Inner products may stray from [0,1] by at most 1e-12 (they are
/// clamped); larger violations throw OutOfRangeProbability naming the pair.
Graph sample_rdpg_binary(const LatentPositions& x, RngStream& rng);

/// Weighted model: A = X X^T + eps with eps_ij ~ N(0, noise_sd^2) for
/// i <= j and eps_ji = eps_ij. The diagonal is noised as well.
Graph sample_rdpg_weighted(const LatentPositions& x, double noise_sd,
                           RngStream& rng);

enum class SigmaZKind { Equicorrelation, ArDecay };

/// Covariate covariance used by the scenarios. Equicorrelation has unit
/// diagonal and 1/(p-1) off-diagonal; ar_decay has entries 0.95^|i-j| scaled
/// so the top eigenvalue equals 2. Both have top eigenvalue 2 by design.
/// near_singular, when non-null, is set when the smallest eigenvalue is
/// numerically zero (equicorrelation at p = 2).
Matrix build_sigma_z(SigmaZKind kind, int p, bool* near_singular = nullptr);

/// Full scenario draw. The coefficient matrix B (and, for scenario (iv), the
/// Sigma_Z scaling) is derived from spec.seed alone so that all Monte Carlo
/// replicates sharing a spec see the same B; per-replicate randomness comes
/// from `rng`.
ScenarioDraw generate_scenario(const ScenarioSpec& spec, RngStream& rng);

/// The frozen coefficient matrix for a spec (columns rescaled to norm 0 or
/// 1 in scenarios (i)-(v); zero matrix for (vi)). Exposed for tests.
Matrix scenario_coefficients(const ScenarioSpec& spec);

}  // namespace netdep
