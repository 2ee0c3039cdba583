#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>

namespace sofa {

/// Number of positions evaluated per block by the chunked distance kernels.
/// Early abandoning is only checked at block boundaries.
inline constexpr std::size_t kChunkWidth = 8;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

/// Fixed pairwise reduction of one block. Keeps the summation order identical
/// for every caller so that distances are bitwise reproducible.
inline double chunk_sum(const std::array<double, kChunkWidth>& lane) {
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) +
         ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

}  // namespace detail

/// Squared Euclidean distance with early abandoning.
///
/// Differences are accumulated in blocks of kChunkWidth lanes; after each
/// block the running total is compared with `bsf` and returned as soon as it
/// reaches it. If the full distance is below `bsf` the exact value is
/// returned, and that value does not depend on `bsf`. Lengths must match.
inline double euclidean_early_abandon(std::span<const float> a,
                                      std::span<const float> b,
                                      double bsf = kInfinity) {
  const std::size_t n = a.size();
  double total = 0.0;
  for (std::size_t begin = 0; begin < n; begin += kChunkWidth) {
    std::array<double, kChunkWidth> lane{};
    const std::size_t width = n - begin < kChunkWidth ? n - begin : kChunkWidth;
    for (std::size_t j = 0; j < width; ++j) {
      const double d = static_cast<double>(a[begin + j]) - static_cast<double>(b[begin + j]);
      lane[j] = d * d;
    }
    total += detail::chunk_sum(lane);
    if (total >= bsf) return total;
  }
  return total;
}

}  // namespace sofa
