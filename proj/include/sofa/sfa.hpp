#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sofa/core.hpp"
#include "sofa/quantizer.hpp"
#include "sofa/spectral.hpp"

namespace sofa {

enum class BinningMode : std::uint8_t { equi_width = 0, equi_depth = 1 };

std::string to_string(BinningMode mode);
BinningMode parse_binning(const std::string& text);

/// Raised when a sampled dimension has no spread and cannot be binned.
class DegenerateDimension : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct BinningResult {
  std::vector<double> breakpoints;
  /// Set when duplicate values collapsed breakpoints and some were nudged
  /// upward to keep the row strictly increasing.
  bool adjusted = false;
};

/// a-1 breakpoints at min + i*(max-min)/a. Throws DegenerateDimension when
/// all sample values are equal, std::invalid_argument for fewer than 2 values.
BinningResult equi_width_bins(std::span<const double> values, std::size_t alphabet_size);

/// a-1 breakpoints at the sorted sample ranks ceil(i*S/a). Throws
/// std::invalid_argument when the sample is smaller than the alphabet.
BinningResult equi_depth_bins(std::span<const double> values, std::size_t alphabet_size);

struct SfaOptions {
  std::size_t word_length = 16;
  std::size_t alphabet_size = 256;
  double sampling_ratio = 0.01;
  BinningMode binning = BinningMode::equi_width;
  std::size_t candidate_limit = 16;
  std::uint64_t seed = 0;
};

/// Learned SFA summarization: selected spectrum positions plus one
/// breakpoint row per selected position. Immutable; safe to share.
class SfaModel {
 public:
  SfaModel(std::size_t series_length, SelectedIndices selected, BinningMode binning,
           std::size_t candidate_limit, QuantizationTable table);

  std::size_t series_length() const { return series_length_; }
  std::size_t word_length() const { return table_.word_length(); }
  std::size_t alphabet_size() const { return table_.alphabet_size(); }
  std::size_t candidate_limit() const { return candidate_limit_; }
  BinningMode binning() const { return binning_; }
  const SelectedIndices& selected() const { return selected_; }
  const QuantizationTable& table() const { return table_; }
  /// True when equi-depth learning had to nudge collapsed breakpoints.
  bool adjusted() const { return adjusted_; }
  void set_adjusted(bool v) { adjusted_ = v; }

  /// Selected spectrum values of `series`, in selection order.
  void project(std::span<const float> series, std::span<double> out) const;
  std::vector<double> project(std::span<const float> series) const;

 private:
  SelectedIndices selected_;
  QuantizationTable table_;
  std::size_t series_length_ = 0;
  std::size_t candidate_limit_ = 0;
  BinningMode binning_ = BinningMode::equi_width;
  bool adjusted_ = false;
};

/// Multiple coefficient binning: sample, transform, select positions by
/// variance and learn one breakpoint row per selected position. Positions
/// whose sample has no spread are skipped in favour of the next-ranked ones;
/// DegenerateDimension is thrown when too few usable positions remain.
/// Deterministic for a given seed.
SfaModel learn_mcb(const Dataset& dataset, const SfaOptions& options);

/// Full-cardinality SFA word of a series.
SymbolicWord sfa_transform(std::span<const float> series, const SfaModel& model);

/// Squared SFA lower bound between a query projection and a word, with the
/// chunked early-abandoning contract of lower_bound().
double sfa_lower_bound(std::span<const double> query_projection, const SymbolicWord& word,
                       const SfaModel& model, double bsf = kInfinity);

}  // namespace sofa
