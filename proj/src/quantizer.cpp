#include "sofa/quantizer.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace sofa {

SymbolicWord SymbolicWord::truncated(int bits, int full_bits) const {
  SymbolicWord out;
  out.symbols.resize(symbols.size());
  out.cardinality.assign(symbols.size(), static_cast<std::uint8_t>(bits));
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    out.symbols[i] = static_cast<std::uint8_t>(symbols[i] >> (full_bits - bits));
  }
  return out;
}

QuantizationTable::QuantizationTable(std::size_t word_length, std::size_t alphabet_size,
                                     std::vector<double> breakpoints, std::vector<double> weights)
    : breakpoints_(std::move(breakpoints)),
      weights_(std::move(weights)),
      word_length_(word_length),
      alphabet_size_(alphabet_size) {
  if (word_length == 0) throw std::invalid_argument("quantizer: word length must be positive");
  if (alphabet_size < 2 || alphabet_size > kMaxAlphabet || !std::has_single_bit(alphabet_size)) {
    throw std::invalid_argument("quantizer: alphabet size must be a power of two in [2, 256], got " +
                                std::to_string(alphabet_size));
  }
  if (breakpoints_.size() != word_length * (alphabet_size - 1)) {
    throw std::invalid_argument("quantizer: breakpoint table has the wrong size");
  }
  if (weights_.size() != word_length) {
    throw std::invalid_argument("quantizer: need one weight per position");
  }
  bits_ = std::countr_zero(alphabet_size);

  for (std::size_t j = 0; j < word_length; ++j) {
    auto r = row(j);
    for (std::size_t s = 1; s < r.size(); ++s) {
      if (!(r[s - 1] < r[s])) {
        throw std::invalid_argument("quantizer: breakpoints of row " + std::to_string(j) +
                                    " are not strictly increasing");
      }
    }
  }

  lower_.resize(word_length * alphabet_size);
  upper_.resize(word_length * alphabet_size);
  for (std::size_t j = 0; j < word_length; ++j) {
    for (std::size_t s = 0; s < alphabet_size; ++s) {
      lower_[j * alphabet_size + s] = lower_edge(j, static_cast<std::uint8_t>(s), bits_);
      upper_[j * alphabet_size + s] = upper_edge(j, static_cast<std::uint8_t>(s), bits_);
    }
  }
}

std::uint8_t QuantizationTable::quantize(std::size_t position, double value) const {
  auto r = row(position);
  return static_cast<std::uint8_t>(std::upper_bound(r.begin(), r.end(), value) - r.begin());
}

void QuantizationTable::quantize(std::span<const double> projection,
                                 std::span<std::uint8_t> out) const {
  for (std::size_t j = 0; j < word_length_; ++j) out[j] = quantize(j, projection[j]);
}

double QuantizationTable::lower_edge(std::size_t position, std::uint8_t symbol,
                                     int cardinality) const {
  const std::size_t first = static_cast<std::size_t>(symbol) << (bits_ - cardinality);
  return first == 0 ? -kInfinity : row(position)[first - 1];
}

double QuantizationTable::upper_edge(std::size_t position, std::uint8_t symbol,
                                     int cardinality) const {
  const std::size_t last = ((static_cast<std::size_t>(symbol) + 1) << (bits_ - cardinality)) - 1;
  return last >= alphabet_size_ - 1 ? kInfinity : row(position)[last];
}

double mind(double value, std::uint8_t symbol, std::span<const double> row, int full_bits,
            int cardinality) {
  const std::size_t alphabet = row.size() + 1;
  const std::size_t first = static_cast<std::size_t>(symbol) << (full_bits - cardinality);
  const std::size_t last = ((static_cast<std::size_t>(symbol) + 1) << (full_bits - cardinality)) - 1;
  const double lower = first == 0 ? -kInfinity : row[first - 1];
  const double upper = last >= alphabet - 1 ? kInfinity : row[last];
  return mind(value, lower, upper);
}

double lower_bound(std::span<const double> query, std::span<const std::uint8_t> symbols,
                   std::span<const std::uint8_t> cardinality, const QuantizationTable& table,
                   double bsf) {
  const std::size_t l = table.word_length();
  const double* weight = table.weights().data();
  double total = 0.0;
  for (std::size_t begin = 0; begin < l; begin += kChunkWidth) {
    std::array<double, kChunkWidth> lane{};
    const std::size_t width = l - begin < kChunkWidth ? l - begin : kChunkWidth;
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t i = begin + j;
      const double lo = table.lower_edge(i, symbols[i], cardinality[i]);
      const double hi = table.upper_edge(i, symbols[i], cardinality[i]);
      const double gap = detail::masked_gap(query[i], lo, hi);
      lane[j] = weight[i] * gap * gap;
    }
    total += detail::chunk_sum(lane);
    if (total >= bsf) return total;
  }
  return total;
}

}  // namespace sofa
