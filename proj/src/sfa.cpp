#include "sofa/sfa.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <numeric>

namespace sofa {

std::string to_string(BinningMode mode) {
  return mode == BinningMode::equi_width ? "ew" : "ed";
}

BinningMode parse_binning(const std::string& text) {
  if (text == "ew" || text == "equi-width") return BinningMode::equi_width;
  if (text == "ed" || text == "equi-depth") return BinningMode::equi_depth;
  throw std::invalid_argument("unknown binning mode '" + text + "' (expected ew or ed)");
}

namespace {

// Forces a row to be strictly increasing by moving collapsed entries to the
// next representable value above their predecessor.
bool make_strictly_increasing(std::vector<double>& row) {
  bool adjusted = false;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (!(row[i] > row[i - 1])) {
      row[i] = std::nextafter(row[i - 1], kInfinity);
      adjusted = true;
    }
  }
  return adjusted;
}

}  // namespace

BinningResult equi_width_bins(std::span<const double> values, std::size_t alphabet_size) {
  if (alphabet_size == 0) throw std::invalid_argument("equi_width_bins: alphabet size must be positive");
  if (values.size() < 2) throw std::invalid_argument("equi_width_bins: need at least 2 values");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(lo < hi)) throw DegenerateDimension("equi_width_bins: all sample values are equal");

  BinningResult out;
  out.breakpoints.resize(alphabet_size - 1);
  const double width = (hi - lo) / static_cast<double>(alphabet_size);
  for (std::size_t i = 1; i < alphabet_size; ++i) {
    out.breakpoints[i - 1] = lo + static_cast<double>(i) * width;
  }
  out.adjusted = make_strictly_increasing(out.breakpoints);
  return out;
}

BinningResult equi_depth_bins(std::span<const double> values, std::size_t alphabet_size) {
  if (alphabet_size == 0) throw std::invalid_argument("equi_depth_bins: alphabet size must be positive");
  if (values.size() < alphabet_size) {
    throw std::invalid_argument("equi_depth_bins: sample of " + std::to_string(values.size()) +
                                " values is smaller than the alphabet (" +
                                std::to_string(alphabet_size) + ")");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t s = sorted.size();

  BinningResult out;
  out.breakpoints.resize(alphabet_size - 1);
  for (std::size_t i = 1; i < alphabet_size; ++i) {
    const std::size_t rank = (i * s + alphabet_size - 1) / alphabet_size;
    out.breakpoints[i - 1] = sorted[rank];
  }
  out.adjusted = make_strictly_increasing(out.breakpoints);
  return out;
}

SfaModel::SfaModel(std::size_t series_length, SelectedIndices selected, BinningMode binning,
                   std::size_t candidate_limit, QuantizationTable table)
    : selected_(std::move(selected)),
      table_(std::move(table)),
      series_length_(series_length),
      candidate_limit_(candidate_limit),
      binning_(binning) {
  SpectrumLayout{series_length, candidate_limit}.validate();
  if (selected_.positions.size() != table_.word_length() ||
      selected_.weights.size() != table_.word_length()) {
    throw std::invalid_argument("SfaModel: selection does not match word length");
  }
  for (auto p : selected_.positions) {
    if (p >= 2 * candidate_limit) throw std::invalid_argument("SfaModel: selected position out of range");
  }
}

void SfaModel::project(std::span<const float> series, std::span<double> out) const {
  if (series.size() != series_length_) {
    throw std::invalid_argument("sfa: series length " + std::to_string(series.size()) +
                                " does not match model length " + std::to_string(series_length_));
  }
  thread_local std::vector<double> spectrum;
  spectrum.resize(2 * (series_length_ / 2 + 1));
  thread_local_dft(series_length_).transform(series, spectrum);
  for (std::size_t j = 0; j < selected_.positions.size(); ++j) {
    out[j] = spectrum[selected_.positions[j]];
  }
}

std::vector<double> SfaModel::project(std::span<const float> series) const {
  std::vector<double> out(word_length());
  project(series, out);
  return out;
}

SfaModel learn_mcb(const Dataset& dataset, const SfaOptions& options) {
  const SpectrumLayout layout{dataset.length(), options.candidate_limit};
  layout.validate();
  if (!(options.sampling_ratio > 0.0 && options.sampling_ratio <= 1.0)) {
    throw std::invalid_argument("learn_mcb: sampling ratio must be in (0, 1]");
  }
  const std::size_t n_series = dataset.size();
  const std::size_t sample_size = std::min<std::size_t>(
      n_series,
      static_cast<std::size_t>(std::ceil(options.sampling_ratio * static_cast<double>(n_series))));
  const std::size_t minimum =
      options.binning == BinningMode::equi_depth ? std::max<std::size_t>(options.alphabet_size, 2) : 2;
  if (sample_size < minimum) {
    throw std::invalid_argument("learn_mcb: sample of " + std::to_string(sample_size) +
                                " series is too small (need " + std::to_string(minimum) + ")");
  }
  if (options.word_length > layout.candidate_positions()) {
    throw std::invalid_argument("learn_mcb: word length exceeds candidate positions");
  }

  std::vector<std::size_t> sample(sample_size);
  if (sample_size == n_series) {
    std::iota(sample.begin(), sample.end(), std::size_t{0});
  } else {
    std::vector<std::size_t> all(n_series);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::mt19937_64 rng(options.seed);
    std::sample(all.begin(), all.end(), sample.begin(), sample_size, rng);
  }

  // Sampled spectra restricted to the candidate positions, row-major.
  const std::size_t cols = layout.candidate_positions();
  std::vector<double> spectra(sample_size * cols);
  std::vector<double> spectrum(2 * layout.coefficient_count());
  RealDft& dft = thread_local_dft(dataset.length());
  for (std::size_t r = 0; r < sample_size; ++r) {
    dft.transform(dataset.series(sample[r]), spectrum);
    std::copy_n(spectrum.begin(), cols, spectra.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }

  const auto ranking = rank_by_variance(spectra, sample_size, layout);
  std::vector<std::uint32_t> chosen;
  std::vector<double> column(sample_size);
  std::vector<double> breakpoints;
  breakpoints.reserve(options.word_length * (options.alphabet_size - 1));
  bool adjusted = false;
  for (auto position : ranking) {
    if (chosen.size() == options.word_length) break;
    for (std::size_t r = 0; r < sample_size; ++r) column[r] = spectra[r * cols + position];
    const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
    if (!(*lo < *hi)) continue;  // no spread: re-select without this position
    auto bins = options.binning == BinningMode::equi_width
                    ? equi_width_bins(column, options.alphabet_size)
                    : equi_depth_bins(column, options.alphabet_size);
    adjusted = adjusted || bins.adjusted;
    breakpoints.insert(breakpoints.end(), bins.breakpoints.begin(), bins.breakpoints.end());
    chosen.push_back(position);
  }
  if (chosen.size() < options.word_length) {
    throw DegenerateDimension("learn_mcb: only " + std::to_string(chosen.size()) +
                              " spectrum positions have spread in the sample, need " +
                              std::to_string(options.word_length));
  }

  auto selection = make_selection(std::move(chosen), layout);
  QuantizationTable table(options.word_length, options.alphabet_size, std::move(breakpoints),
                          selection.weights);
  SfaModel model(dataset.length(), std::move(selection), options.binning, options.candidate_limit,
                 std::move(table));
  model.set_adjusted(adjusted);
  return model;
}

SymbolicWord sfa_transform(std::span<const float> series, const SfaModel& model) {
  const auto projection = model.project(series);
  SymbolicWord word;
  word.symbols.resize(model.word_length());
  word.cardinality.assign(model.word_length(), static_cast<std::uint8_t>(model.table().bits()));
  model.table().quantize(projection, word.symbols);
  return word;
}

double sfa_lower_bound(std::span<const double> query_projection, const SymbolicWord& word,
                       const SfaModel& model, double bsf) {
  const auto& table = model.table();
  const bool full = std::all_of(word.cardinality.begin(), word.cardinality.end(),
                                [&](std::uint8_t c) { return c == table.bits(); });
  if (full) return lower_bound(query_projection, word.symbols.data(), table, bsf);
  return lower_bound(query_projection, word.symbols, word.cardinality, table, bsf);
}

}  // namespace sofa
