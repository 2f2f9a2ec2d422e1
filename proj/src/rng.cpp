#include "netdep/rng.hpp"

#include <cmath>

namespace netdep {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngStream::mix(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t state = seed;
  std::uint64_t a = splitmix64(state);
  state ^= stream_id * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL;
  std::uint64_t b = splitmix64(state);
  return a ^ (b + 0x9e3779b97f4a7c15ULL);
}

std::uint64_t RngStream::uniform_int(std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % bound;
}

double RngStream::log_gamma_draw(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw NetdepError(ErrorCode::InvalidAlpha,
                      "gamma shape must be positive and finite, got " +
                          std::to_string(alpha));
  }
  // Marsaglia-Tsang for alpha >= 1; for alpha < 1 boost a Gamma(alpha + 1)
  // draw by U^{1/alpha}, applied in log space.
  double boost = 0.0;
  double a = alpha;
  if (a < 1.0) {
    boost = std::log(uniform_pos()) / a;
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost;
    }
  }
}

std::vector<int> RngStream::sample_without_replacement(int n, int k) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> picked;
  picked.reserve(k);
  for (int i = 0; i < k; ++i) {
    std::size_t j = static_cast<std::size_t>(uniform_int(n - i));
    picked.push_back(pool[j]);
    std::swap(pool[j], pool[n - i - 1]);
  }
  return picked;
}

Vector sample_dirichlet(const Vector& alpha, RngStream& rng) {
  const int d = static_cast<int>(alpha.size());
  if (d < 1) {
    throw NetdepError(ErrorCode::InvalidAlpha, "alpha must be nonempty");
  }
  for (int r = 0; r < d; ++r) {
    if (!(alpha[r] > 0.0) || !std::isfinite(alpha[r])) {
      throw NetdepError(ErrorCode::InvalidAlpha,
                        "alpha[" + std::to_string(r) + "] = " +
                            std::to_string(alpha[r]) + " is not positive");
    }
  }
  Vector log_draws(d);
  for (int r = 0; r < d; ++r) {
    log_draws[r] = rng.log_gamma_draw(alpha[r]);
  }
  const double shift = log_draws.maxCoeff();
  Vector out(d);
  for (int r = 0; r < d; ++r) {
    out[r] = std::exp(log_draws[r] - shift);
  }
  out /= out.sum();
  return out;
}

}  // namespace netdep
