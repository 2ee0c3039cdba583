#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace sofa {

/// Shape of a one-sided real spectrum. Complex coefficient k occupies the
/// interleaved positions 2k (real) and 2k+1 (imaginary).
struct SpectrumLayout {
  std::size_t series_length = 0;
  /// Number of leading complex coefficients eligible for selection.
  std::size_t candidate_limit = 16;

  std::size_t coefficient_count() const { return series_length / 2 + 1; }
  std::size_t candidate_positions() const { return 2 * candidate_limit; }

  /// LBD multiplier of an interleaved position: 1 for the DC term and, for
  /// even lengths, the Nyquist term; 2 for every conjugate-paired coefficient.
  double weight(std::size_t position) const;

  /// Throws std::invalid_argument unless 4 <= n and 1 <= limit <= n/2 + 1.
  void validate() const;
};

/// Interleaved spectrum positions chosen for summarization, in priority order.
struct SelectedIndices {
  std::vector<std::uint32_t> positions;
  std::vector<double> weights;

  std::size_t size() const { return positions.size(); }
};

/// Orthonormal real DFT of a fixed length, backed by an FFTW plan.
/// Instances are not thread-safe; use one per thread.
class RealDft {
 public:
  explicit RealDft(std::size_t length);
  ~RealDft();
  RealDft(RealDft&&) noexcept;
  RealDft& operator=(RealDft&&) noexcept;
  RealDft(const RealDft&) = delete;
  RealDft& operator=(const RealDft&) = delete;

  std::size_t length() const { return length_; }

  /// Writes 2*(n/2+1) interleaved values scaled by 1/sqrt(n).
  void transform(std::span<const float> series, std::span<double> spectrum);

 private:
  struct Plan;
  std::unique_ptr<Plan> plan_;
  std::size_t length_ = 0;
};

/// Thread-local cached transform for the given length.
RealDft& thread_local_dft(std::size_t length);

/// Full interleaved spectrum (2*(n/2+1) values, scaling 1/sqrt(n)).
/// Throws std::invalid_argument for n < 4.
std::vector<double> real_dft(std::span<const float> series);

/// Sum of weighted squared magnitudes over the whole symmetric spectrum; equals
/// the energy of the time-domain series by Parseval.
double spectral_energy(std::span<const double> spectrum, std::size_t series_length);

/// Ranks candidate positions by sample variance (n-1 denominator) across the
/// rows of `spectra` (row-major, `rows` x layout.candidate_positions()),
/// highest first, ties by lower position.
std::vector<std::uint32_t> rank_by_variance(std::span<const double> spectra, std::size_t rows,
                                            const SpectrumLayout& layout);

/// Picks the `count` highest-variance positions and attaches their weights.
/// Requires rows >= 2 and count <= layout.candidate_positions().
SelectedIndices select_by_variance(std::span<const double> spectra, std::size_t rows,
                                   std::size_t count, const SpectrumLayout& layout);

/// Attaches layout weights to an explicit list of positions. Throws for
/// duplicates or positions outside the candidate range.
SelectedIndices make_selection(std::vector<std::uint32_t> positions, const SpectrumLayout& layout);

/// Mean complex-coefficient index (position / 2) of a non-empty selection.
double mean_selected_index(const SelectedIndices& selection);

}  // namespace sofa
