#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "netdep/types.hpp"

namespace netdep {

/// Deterministic random stream. Streams are identified by (seed, stream_id);
/// replicate k of a run always draws from stream (master_seed, k), which makes
/// results independent of thread scheduling. All samplers are implemented
/// here rather than with std::*_distribution so that a given (seed, stream)
/// produces the same values on every standard library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : engine_(mix(seed, stream_id)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), bound >= 1. Rejection-free modulo bias is
  /// negligible for the bounds used here but we reject anyway to keep draws
  /// exactly uniform.
  std::uint64_t uniform_int(std::uint64_t bound);

  double normal() {
    // Box-Muller, cosine branch only; stateless by construction.
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// log of a Gamma(alpha, 1) draw. Working in log space keeps tiny-alpha
  /// draws usable (the linear-scale value underflows for alpha << 1).
  double log_gamma_draw(double alpha);

  double gamma_draw(double alpha) { return std::exp(log_gamma_draw(alpha)); }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// Uniformly random permutation of {0, ..., n-1}.
  std::vector<int> permutation(int n) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order);
    return order;
  }

  /// k distinct indices drawn uniformly from {0, ..., n-1}, in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id);

  std::mt19937_64 engine_;
};

/// Dirichlet(alpha) draw via normalized Gamma variables, computed in log
/// space. Entries are nonnegative and sum to one exactly up to rounding.
Vector sample_dirichlet(const Vector& alpha, RngStream& rng);

}  // namespace netdep
