#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sofa/distance.hpp"

namespace sofa {

inline constexpr int kMaxSymbolBits = 8;
inline constexpr std::size_t kMaxAlphabet = 256;

/// A discrete summary: one symbol per position, each using `cardinality[i]`
/// bits. A word at cardinality c is the c-bit prefix of the full-resolution
/// word of the same series.
struct SymbolicWord {
  std::vector<std::uint8_t> symbols;
  std::vector<std::uint8_t> cardinality;

  std::size_t size() const { return symbols.size(); }

  /// Keeps the top `bits` bits of every symbol. `full_bits` is the symbol
  /// resolution the word was produced at.
  SymbolicWord truncated(int bits, int full_bits) const;
};

/// Per-position breakpoint rows plus the LBD weight of each position.
///
/// Row j holds a-1 strictly increasing breakpoints; bin s of row j is the
/// half-open interval [row[s-1], row[s]) with -inf/+inf as outer edges. At a
/// reduced cardinality c the bins are merged in aligned groups of 2^(bits-c),
/// so the edges are every 2^(bits-c)-th breakpoint of the full row.
class QuantizationTable {
 public:
  QuantizationTable() = default;
  QuantizationTable(std::size_t word_length, std::size_t alphabet_size,
                    std::vector<double> breakpoints, std::vector<double> weights);

  std::size_t word_length() const { return word_length_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  /// log2(alphabet_size): bits per symbol at full cardinality.
  int bits() const { return bits_; }

  std::span<const double> row(std::size_t position) const {
    return {breakpoints_.data() + position * (alphabet_size_ - 1), alphabet_size_ - 1};
  }
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> weights() const { return weights_; }

  /// Symbol of `value` in row `position`: the number of breakpoints <= value.
  std::uint8_t quantize(std::size_t position, double value) const;
  void quantize(std::span<const double> projection, std::span<std::uint8_t> out) const;

  /// Interval edges of `symbol` (a `cardinality`-bit prefix) at `position`.
  double lower_edge(std::size_t position, std::uint8_t symbol, int cardinality) const;
  double upper_edge(std::size_t position, std::uint8_t symbol, int cardinality) const;

  /// Full-cardinality edge tables, word_length x alphabet_size, row-major.
  std::span<const double> lower_edges() const { return lower_; }
  std::span<const double> upper_edges() const { return upper_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> weights_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::size_t word_length_ = 0;
  std::size_t alphabet_size_ = 0;
  int bits_ = 0;
};

/// Distance from `value` to the interval [lower, upper]: 0 inside, otherwise
/// the gap to the violated edge.
inline double mind(double value, double lower, double upper) {
  if (value < lower) return lower - value;
  if (value > upper) return value - upper;
  return 0.0;
}

/// mind against a symbol's interval at the given cardinality.
double mind(double value, std::uint8_t symbol, std::span<const double> row, int full_bits,
            int cardinality);

namespace detail {

inline std::uint64_t lane_mask(bool on) { return std::uint64_t{0} - static_cast<std::uint64_t>(on); }

/// Branch-free interval distance. The LOWER and UPPER masks select the
/// matching gap bitwise; ZERO is their complement and contributes nothing.
/// Masking the bit pattern (rather than multiplying) keeps infinite outer
/// edges from turning into NaN.
inline double masked_gap(double value, double lower, double upper) {
  const std::uint64_t below = std::bit_cast<std::uint64_t>(lower - value) & lane_mask(value < lower);
  const std::uint64_t above = std::bit_cast<std::uint64_t>(value - upper) & lane_mask(value > upper);
  return std::bit_cast<double>(below | above);
}

}  // namespace detail

/// Lower-bounding distance (squared) between a query projection and a
/// full-cardinality word: sum of weight_i * mind_i^2, evaluated in blocks of
/// kChunkWidth with an early return once the running sum reaches `bsf`.
inline double lower_bound(std::span<const double> query, const std::uint8_t* word,
                          const QuantizationTable& table, double bsf = kInfinity) {
  const std::size_t l = table.word_length();
  const std::size_t a = table.alphabet_size();
  const double* lower = table.lower_edges().data();
  const double* upper = table.upper_edges().data();
  const double* weight = table.weights().data();
  double total = 0.0;
  for (std::size_t begin = 0; begin < l; begin += kChunkWidth) {
    std::array<double, kChunkWidth> lane{};
    const std::size_t width = l - begin < kChunkWidth ? l - begin : kChunkWidth;
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t i = begin + j;
      const std::size_t slot = i * a + word[i];
      const double gap = detail::masked_gap(query[i], lower[slot], upper[slot]);
      lane[j] = weight[i] * gap * gap;
    }
    total += detail::chunk_sum(lane);
    if (total >= bsf) return total;
  }
  return total;
}

inline double lower_bound(std::span<const double> query, std::span<const std::uint8_t> word,
                          const QuantizationTable& table, double bsf = kInfinity) {
  return lower_bound(query, word.data(), table, bsf);
}

/// Same contract for a word whose positions carry individual cardinalities
/// (index node signatures).
double lower_bound(std::span<const double> query, std::span<const std::uint8_t> symbols,
                   std::span<const std::uint8_t> cardinality, const QuantizationTable& table,
                   double bsf = kInfinity);

}  // namespace sofa
