#include "sofa/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace sofa {

namespace {

// The FFTW planner is not re-entrant; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

double SpectrumLayout::weight(std::size_t position) const {
  const std::size_t k = position / 2;
  if (k == 0) return 1.0;
  if (series_length % 2 == 0 && k == series_length / 2) return 1.0;
  return 2.0;
}

void SpectrumLayout::validate() const {
  if (series_length < 4) {
    throw std::invalid_argument("spectrum: series length must be at least 4");
  }
  if (candidate_limit == 0 || candidate_limit > coefficient_count()) {
    throw std::invalid_argument("spectrum: candidate limit " + std::to_string(candidate_limit) +
                                " outside [1, " + std::to_string(coefficient_count()) + "]");
  }
}

struct RealDft::Plan {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit Plan(std::size_t n) {
    std::lock_guard lock(planner_mutex());
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    if (!plan || !in || !out) throw std::runtime_error("RealDft: FFTW planning failed");
  }

  ~Plan() {
    std::lock_guard lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

RealDft::RealDft(std::size_t length) : length_(length) {
  if (length < 4) throw std::invalid_argument("real_dft: series length must be at least 4");
  plan_ = std::make_unique<Plan>(length);
}

RealDft::~RealDft() = default;
RealDft::RealDft(RealDft&&) noexcept = default;
RealDft& RealDft::operator=(RealDft&&) noexcept = default;

void RealDft::transform(std::span<const float> series, std::span<double> spectrum) {
  if (series.size() != length_) throw std::invalid_argument("real_dft: length mismatch");
  const std::size_t coefficients = length_ / 2 + 1;
  if (spectrum.size() < 2 * coefficients) {
    throw std::invalid_argument("real_dft: output span too small");
  }
  std::copy(series.begin(), series.end(), plan_->in);
  fftw_execute(plan_->plan);
  const double scale = 1.0 / std::sqrt(static_cast<double>(length_));
  for (std::size_t k = 0; k < coefficients; ++k) {
    spectrum[2 * k] = plan_->out[k][0] * scale;
    spectrum[2 * k + 1] = plan_->out[k][1] * scale;
  }
}

RealDft& thread_local_dft(std::size_t length) {
  thread_local std::unordered_map<std::size_t, RealDft> cache;
  auto it = cache.find(length);
  if (it == cache.end()) it = cache.emplace(length, RealDft(length)).first;
  return it->second;
}

std::vector<double> real_dft(std::span<const float> series) {
  if (series.size() < 4) throw std::invalid_argument("real_dft: series length must be at least 4");
  std::vector<double> spectrum(2 * (series.size() / 2 + 1));
  thread_local_dft(series.size()).transform(series, spectrum);
  return spectrum;
}

double spectral_energy(std::span<const double> spectrum, std::size_t series_length) {
  const SpectrumLayout layout{series_length, series_length / 2 + 1};
  double energy = 0.0;
  for (std::size_t p = 0; p < spectrum.size(); ++p) {
    energy += layout.weight(p) * spectrum[p] * spectrum[p];
  }
  return energy;
}

std::vector<std::uint32_t> rank_by_variance(std::span<const double> spectra, std::size_t rows,
                                            const SpectrumLayout& layout) {
  const std::size_t cols = layout.candidate_positions();
  if (rows < 2) throw std::invalid_argument("select_by_variance: need at least 2 spectra");
  if (spectra.size() != rows * cols) {
    throw std::invalid_argument("select_by_variance: matrix size does not match layout");
  }

  std::vector<double> mean(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) mean[c] += spectra[r * cols + c];
  }
  for (double& m : mean) m /= static_cast<double>(rows);

  std::vector<double> variance(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = spectra[r * cols + c] - mean[c];
      variance[c] += d * d;
    }
  }
  for (double& v : variance) v /= static_cast<double>(rows - 1);

  std::vector<std::uint32_t> order(cols);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return variance[a] > variance[b]; });
  return order;
}

SelectedIndices make_selection(std::vector<std::uint32_t> positions, const SpectrumLayout& layout) {
  std::vector<bool> seen(layout.candidate_positions(), false);
  for (auto p : positions) {
    if (p >= seen.size()) {
      throw std::invalid_argument("selection: position " + std::to_string(p) +
                                  " is outside the candidate range");
    }
    if (seen[p]) throw std::invalid_argument("selection: duplicate position " + std::to_string(p));
    seen[p] = true;
  }
  SelectedIndices sel;
  sel.weights.reserve(positions.size());
  for (auto p : positions) sel.weights.push_back(layout.weight(p));
  sel.positions = std::move(positions);
  return sel;
}

SelectedIndices select_by_variance(std::span<const double> spectra, std::size_t rows,
                                   std::size_t count, const SpectrumLayout& layout) {
  if (count > layout.candidate_positions()) {
    throw std::invalid_argument("select_by_variance: requested " + std::to_string(count) +
                                " positions but only " +
                                std::to_string(layout.candidate_positions()) + " are available");
  }
  auto order = rank_by_variance(spectra, rows, layout);
  order.resize(count);
  return make_selection(std::move(order), layout);
}

double mean_selected_index(const SelectedIndices& selection) {
  if (selection.positions.empty()) {
    throw std::invalid_argument("mean_selected_index: empty selection");
  }
  double sum = 0.0;
  for (auto p : selection.positions) sum += static_cast<double>(p / 2);
  return sum / static_cast<double>(selection.positions.size());
}

}  // namespace sofa
