#pragma once
// Deterministic sampling helpers. Every distribution is derived from raw
// mt19937_64 output with no retained sampler state, so serializing the engine
// alone captures the full random stream (required for exact training resume).

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsgan {

using RngEngine = std::mt19937_64;

// splitmix64 mix; decorrelates per-purpose streams drawn from one user seed.
inline std::uint64_t seed_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// 53-bit uniform in [0, 1).
inline double uniform01(RngEngine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n); modulo bias is negligible against a 64-bit stream.
inline std::size_t uniform_index(RngEngine& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  return static_cast<std::size_t>(rng() % n);
}

// Standard normal via Box-Muller, cosine branch only: a fresh pair of
// uniforms per call, no cached spare.
inline double normal_sample(RngEngine& rng) {
  constexpr double two_pi = 6.28318530717958647692;
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Marsaglia-Tsang gamma sampler (shape alpha, unit scale).
inline double gamma_sample(RngEngine& rng, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gamma_sample: alpha must be > 0");
  if (alpha < 1.0) {
    double u = uniform01(rng);
    while (u <= 0.0) u = uniform01(rng);
    return gamma_sample(rng, alpha + 1.0) * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal_sample(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

// n draws from a symmetric Dirichlet(alpha), normalized to sum exactly to
// the floating-point sum of its parts.
inline std::vector<double> dirichlet_sample(RngEngine& rng, std::size_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("dirichlet_sample: n must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("dirichlet_sample: alpha must be > 0");
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = gamma_sample(rng, alpha);
    total += w[i];
  }
  if (total <= 0.0) {  // astronomically unlikely underflow; fall back to uniform
    for (auto& v : w) v = 1.0 / static_cast<double>(n);
    return w;
  }
  for (auto& v : w) v /= total;
  return w;
}

inline std::string rng_state_to_string(const RngEngine& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

inline void rng_state_from_string(RngEngine& rng, const std::string& text) {
  std::istringstream is(text);
  is >> rng;
  if (is.fail()) throw std::runtime_error("rng_state_from_string: malformed engine state");
}

}  // namespace gsgan
