#pragma once

// Shared oracles and generators for the unit and acceptance tests. Everything
// here is deliberately naive: direct loops, no chunking, no library calls that
// the code under test also relies on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "sofa/core.hpp"
#include "sofa/datagen.hpp"
#include "sofa/quantizer.hpp"

namespace sofa::test {

/// Raw Gaussian white noise, `count` x `length`.
inline std::vector<float> gaussian_values(std::size_t count, std::size_t length, std::uint64_t seed,
                                          double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<float> out(count * length);
  for (auto& v : out) v = static_cast<float>(dist(rng));
  return out;
}

inline Dataset random_dataset(std::size_t count, std::size_t length, std::uint64_t seed) {
  return Dataset::normalize(gaussian_values(count, length, seed), length);
}

inline Dataset profile_dataset(Profile profile, std::size_t count, std::size_t length,
                               std::uint64_t seed) {
  return Dataset::normalize(generate_series(profile, count, length, seed), length);
}

/// Sequential left-to-right squared distance.
inline double naive_squared_distance(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum;
}

/// O(n^2) DFT with 1/sqrt(n) scaling, interleaved re/im for k = 0..n/2.
inline std::vector<double> naive_dft(std::span<const float> x) {
  const std::size_t n = x.size();
  std::vector<double> out(2 * (n / 2 + 1));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k <= n / 2; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t t = 0; t < n; ++t) {
      // Reduce k*t mod n first so the angle stays small and exact.
      const long double angle = -2.0L * std::numbers::pi_v<long double> *
                                static_cast<long double>((k * t) % n) / static_cast<long double>(n);
      re += static_cast<long double>(x[t]) * std::cos(angle);
      im += static_cast<long double>(x[t]) * std::sin(angle);
    }
    out[2 * k] = static_cast<double>(re) * scale;
    out[2 * k + 1] = static_cast<double>(im) * scale;
  }
  return out;
}

/// Linear-scan quantization: count breakpoints <= value.
inline std::uint8_t linear_symbol(std::span<const double> row, double value) {
  std::size_t s = 0;
  for (double b : row) s += b <= value ? 1 : 0;
  return static_cast<std::uint8_t>(s);
}

/// Unchunked, branchy lower bound: sum of weight * mind^2 left to right.
inline double naive_lower_bound(std::span<const double> query, std::span<const std::uint8_t> word,
                                const QuantizationTable& table) {
  double sum = 0.0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    const auto row = table.row(i);
    const std::size_t sym = word[i];
    const double lo = sym == 0 ? -INFINITY : row[sym - 1];
    const double hi = sym == row.size() ? INFINITY : row[sym];
    double gap = 0.0;
    if (query[i] < lo) gap = lo - query[i];
    if (query[i] > hi) gap = query[i] - hi;
    sum += table.weights()[i] * gap * gap;
  }
  return sum;
}

inline double relative_error(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

}  // namespace sofa::test
