#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sofa {

/// Per-series normalization statistics, kept for reporting.
struct NormStats {
  double mu = 0.0;
  double sigma = 0.0;
  /// Set when the source series was constant (sigma below kDegenerateSigma).
  bool degenerate = false;
};

inline constexpr double kDegenerateSigma = 1e-12;

struct NormalizedSeries {
  std::vector<float> values;
  NormStats stats;
};

/// Z-normalizes a series using the population standard deviation. A constant
/// series maps to all zeros with `stats.degenerate` set and sigma = 0.
/// Throws std::invalid_argument for series shorter than 2.
NormalizedSeries z_normalize(std::span<const float> series);

/// Plain Euclidean distance (64-bit accumulation). Throws on length mismatch.
double euclidean_distance(std::span<const float> a, std::span<const float> b);

/// A collection of equal-length series stored contiguously, series-major.
/// Immutable after construction.
class Dataset {
 public:
  Dataset() = default;

  /// Z-normalizes every series of `raw` (N x length values).
  static Dataset normalize(std::span<const float> raw, std::size_t length);

  /// Wraps values that are already normalized; no statistics are computed.
  static Dataset from_normalized(std::vector<float> values, std::size_t length);

  std::size_t size() const { return count_; }
  std::size_t length() const { return length_; }
  bool empty() const { return count_ == 0; }

  std::span<const float> series(std::size_t i) const {
    return {values_.data() + i * length_, length_};
  }
  std::span<const float> values() const { return values_; }

  /// Empty for datasets built with from_normalized().
  std::span<const NormStats> stats() const { return stats_; }

  std::size_t degenerate_count() const;

  /// Copies the listed series (in order) into a new dataset.
  Dataset subset(std::span<const std::size_t> ids) const;

 private:
  Dataset(std::vector<float> values, std::size_t length, std::vector<NormStats> stats);

  std::vector<float> values_;
  std::vector<NormStats> stats_;
  std::size_t length_ = 0;
  std::size_t count_ = 0;
};

}  // namespace sofa
