#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "coda/data.hpp"

namespace testing {

// Pairwise Mann-Whitney count, ties as one half.
inline double brute_force_auc(std::span<const double> s, std::span<const int> y) {
  double wins = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] == 1) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Long double keeps rounding noise in f well below the 1e-8 resolution the
// comparisons need.
inline double golden_max(const std::function<long double(long double)>& f, long double lo, long double hi,
                         long double tol = 1e-13L) {
  const long double r = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  long double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

inline double ternary_min(const std::function<double(double)>& f, double lo, double hi, int iters = 300) {
  for (int i = 0; i < iters; ++i) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2)) hi = m2;
    else lo = m1;
  }
  return 0.5 * (lo + hi);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

inline std::vector<double> random_vector(std::mt19937_64& eng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(eng);
  return v;
}

inline coda::Dataset small_dataset(std::size_t n, std::size_t d, double p, std::uint64_t seed) {
  return coda::synth_gaussians(n, d, p, 1.0, seed);
}

}  // namespace testing
