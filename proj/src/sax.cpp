#include "sofa/sax.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/distributions/normal.hpp>
#include <stdexcept>
#include <string>

namespace sofa {

std::vector<std::size_t> paa_segments(std::size_t series_length, std::size_t word_length) {
  if (word_length == 0 || word_length > series_length) {
    throw std::invalid_argument("paa: word length " + std::to_string(word_length) +
                                " must be in [1, " + std::to_string(series_length) + "]");
  }
  const std::size_t width = series_length / word_length;
  std::vector<std::size_t> starts(word_length + 1);
  for (std::size_t s = 0; s < word_length; ++s) starts[s] = s * width;
  starts[word_length] = series_length;
  return starts;
}

std::vector<double> paa(std::span<const float> series, std::size_t word_length) {
  const auto starts = paa_segments(series.size(), word_length);
  std::vector<double> out(word_length);
  for (std::size_t s = 0; s < word_length; ++s) {
    double sum = 0.0;
    for (std::size_t t = starts[s]; t < starts[s + 1]; ++t) sum += series[t];
    out[s] = sum / static_cast<double>(starts[s + 1] - starts[s]);
  }
  return out;
}

std::vector<double> gaussian_breakpoints(std::size_t alphabet_size) {
  if (alphabet_size < 2 || !std::has_single_bit(alphabet_size)) {
    throw std::invalid_argument("gaussian_breakpoints: alphabet size must be a power of two >= 2");
  }
  const boost::math::normal_distribution<double> standard;
  std::vector<double> out(alphabet_size - 1);
  const std::size_t half = alphabet_size / 2;
  out[half - 1] = 0.0;
  // Lower half from the quantile function, upper half mirrored so the row is
  // exactly symmetric.
  for (std::size_t i = 1; i < half; ++i) {
    const double q = boost::math::quantile(standard, static_cast<double>(i) /
                                                         static_cast<double>(alphabet_size));
    out[i - 1] = q;
    out[alphabet_size - 1 - i] = -q;
  }
  return out;
}

SaxModel::SaxModel(std::size_t series_length, std::size_t word_length, std::size_t alphabet_size)
    : starts_(paa_segments(series_length, word_length)), series_length_(series_length) {
  const auto row = gaussian_breakpoints(alphabet_size);
  std::vector<double> breakpoints;
  breakpoints.reserve(word_length * row.size());
  std::vector<double> weights(word_length);
  for (std::size_t s = 0; s < word_length; ++s) {
    breakpoints.insert(breakpoints.end(), row.begin(), row.end());
    weights[s] = static_cast<double>(starts_[s + 1] - starts_[s]);
  }
  table_ = QuantizationTable(word_length, alphabet_size, std::move(breakpoints), std::move(weights));
}

void SaxModel::project(std::span<const float> series, std::span<double> out) const {
  if (series.size() != series_length_) {
    throw std::invalid_argument("sax: series length " + std::to_string(series.size()) +
                                " does not match model length " + std::to_string(series_length_));
  }
  const std::size_t l = word_length();
  for (std::size_t s = 0; s < l; ++s) {
    double sum = 0.0;
    for (std::size_t t = starts_[s]; t < starts_[s + 1]; ++t) sum += series[t];
    out[s] = sum / static_cast<double>(starts_[s + 1] - starts_[s]);
  }
}

std::vector<double> SaxModel::project(std::span<const float> series) const {
  std::vector<double> out(word_length());
  project(series, out);
  return out;
}

SymbolicWord isax_transform(std::span<const float> series, const SaxModel& model) {
  const auto values = model.project(series);
  SymbolicWord word;
  word.symbols.resize(model.word_length());
  word.cardinality.assign(model.word_length(), static_cast<std::uint8_t>(model.table().bits()));
  model.table().quantize(values, word.symbols);
  return word;
}

double sax_mindist(std::span<const double> query_paa, const SymbolicWord& word,
                   const SaxModel& model, double bsf) {
  if (query_paa.size() != model.word_length() || word.size() != model.word_length()) {
    throw std::invalid_argument("sax_mindist: length mismatch");
  }
  const auto& table = model.table();
  const bool full = std::all_of(word.cardinality.begin(), word.cardinality.end(),
                                [&](std::uint8_t c) { return c == table.bits(); });
  if (full) return lower_bound(query_paa, word.symbols.data(), table, bsf);
  return lower_bound(query_paa, word.symbols, word.cardinality, table, bsf);
}

}  // namespace sofa
