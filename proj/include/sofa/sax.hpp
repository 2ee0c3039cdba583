#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sofa/quantizer.hpp"

namespace sofa {

/// Start offsets of the l PAA segments of a length-n series. Segments have
/// length n/l; the last one absorbs the remainder.
std::vector<std::size_t> paa_segments(std::size_t series_length, std::size_t word_length);

/// Piecewise aggregate approximation: the mean of each segment.
/// Throws std::invalid_argument when l is 0 or exceeds n.
std::vector<double> paa(std::span<const float> series, std::size_t word_length);

/// The a-1 quantiles of N(0,1) at i/a. `a` must be a power of two >= 2.
std::vector<double> gaussian_breakpoints(std::size_t alphabet_size);

/// iSAX summarization: PAA values quantized against one shared Gaussian row.
/// The LBD weight of a segment is its length, which gives the classical
/// (n/l) * sum(mind^2) mindist for equal segments.
class SaxModel {
 public:
  SaxModel(std::size_t series_length, std::size_t word_length, std::size_t alphabet_size);

  std::size_t series_length() const { return series_length_; }
  std::size_t word_length() const { return table_.word_length(); }
  std::size_t alphabet_size() const { return table_.alphabet_size(); }
  const QuantizationTable& table() const { return table_; }
  std::span<const std::size_t> segment_starts() const { return starts_; }

  void project(std::span<const float> series, std::span<double> out) const;
  std::vector<double> project(std::span<const float> series) const;

 private:
  std::vector<std::size_t> starts_;
  QuantizationTable table_;
  std::size_t series_length_ = 0;
};

SymbolicWord isax_transform(std::span<const float> series, const SaxModel& model);

/// Squared iSAX mindist between a query's PAA and a word; same chunked
/// early-abandoning contract as lower_bound().
double sax_mindist(std::span<const double> query_paa, const SymbolicWord& word,
                   const SaxModel& model, double bsf = kInfinity);

}  // namespace sofa
