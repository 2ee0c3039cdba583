#include "sofa/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sofa/distance.hpp"

namespace sofa {

NormalizedSeries z_normalize(std::span<const float> series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("z_normalize: series length must be at least 2");

  double sum = 0.0;
  for (float v : series) sum += v;
  const double mu = sum / static_cast<double>(n);

  double ss = 0.0;
  for (float v : series) {
    const double d = v - mu;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss / static_cast<double>(n));

  NormalizedSeries out;
  out.values.resize(n);
  out.stats.mu = mu;
  if (sigma < kDegenerateSigma) {
    out.stats.sigma = 0.0;
    out.stats.degenerate = true;
    std::fill(out.values.begin(), out.values.end(), 0.0f);
    return out;
  }
  out.stats.sigma = sigma;
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = static_cast<float>((series[i] - mu) / sigma);
  }
  return out;
}

double euclidean_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("euclidean_distance: length mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  return std::sqrt(euclidean_early_abandon(a, b));
}

Dataset::Dataset(std::vector<float> values, std::size_t length, std::vector<NormStats> stats)
    : values_(std::move(values)),
      stats_(std::move(stats)),
      length_(length),
      count_(length == 0 ? 0 : values_.size() / length) {}

Dataset Dataset::normalize(std::span<const float> raw, std::size_t length) {
  if (length < 2) throw std::invalid_argument("Dataset: series length must be at least 2");
  if (raw.size() % length != 0) {
    throw std::invalid_argument("Dataset: value count " + std::to_string(raw.size()) +
                                " is not a multiple of series length " + std::to_string(length));
  }
  const std::size_t count = raw.size() / length;
  std::vector<float> values(raw.size());
  std::vector<NormStats> stats(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto norm = z_normalize(raw.subspan(i * length, length));
    std::copy(norm.values.begin(), norm.values.end(), values.begin() + i * length);
    stats[i] = norm.stats;
  }
  return Dataset(std::move(values), length, std::move(stats));
}

Dataset Dataset::from_normalized(std::vector<float> values, std::size_t length) {
  if (length == 0 || values.size() % length != 0) {
    throw std::invalid_argument("Dataset: value count is not a multiple of series length");
  }
  return Dataset(std::move(values), length, {});
}

std::size_t Dataset::degenerate_count() const {
  return static_cast<std::size_t>(
      std::count_if(stats_.begin(), stats_.end(), [](const NormStats& s) { return s.degenerate; }));
}

Dataset Dataset::subset(std::span<const std::size_t> ids) const {
  std::vector<float> values;
  values.reserve(ids.size() * length_);
  std::vector<NormStats> stats;
  for (std::size_t id : ids) {
    if (id >= count_) throw std::out_of_range("Dataset::subset: id out of range");
    auto s = series(id);
    values.insert(values.end(), s.begin(), s.end());
    if (!stats_.empty()) stats.push_back(stats_[id]);
  }
  return Dataset(std::move(values), length_, std::move(stats));
}

}  // namespace sofa
