#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace coda {

// mt19937_64 output is fixed by the standard; std:: distributions are not, so
// every draw below goes through these helpers to stay bit-reproducible.
using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Purpose tags keep solver, restart and data streams disjoint.
enum class StreamKind : std::uint64_t {
  solver = 1,
  restart = 2,
  shard = 3,
  synth = 4,
  rebalance = 5,
  init = 6,
};

constexpr std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t stage,
                                    std::uint64_t worker, StreamKind kind) {
  std::uint64_t h = splitmix64(global_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  h = splitmix64(h ^ stage);
  return splitmix64(h ^ worker);
}

// Uniform integer in [0, n) by rejection, unbiased.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = eng();
  } while (r >= limit);
  return r % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Box-Muller; consumes two engine outputs per call.
inline double standard_normal(Engine& eng) {
  double u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename Vec>
void fisher_yates(Vec& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace coda
