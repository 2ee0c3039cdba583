#include <doctest.h>

#include <algorithm>
#include <array>
#include <numeric>

#include "sofa/spectral.hpp"
#include "support.hpp"

using namespace sofa;

namespace {

// Sample variance per column by the textbook two-pass formula.
std::vector<double> column_variance(const std::vector<double>& m, std::size_t rows, std::size_t cols) {
  std::vector<double> out(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < rows; ++r) mean += m[r * cols + c];
    mean /= static_cast<double>(rows);
    double ss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) ss += (m[r * cols + c] - mean) * (m[r * cols + c] - mean);
    out[c] = ss / static_cast<double>(rows - 1);
  }
  return out;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("alternating series has all its energy at Nyquist") {
    const std::array<float, 4> x{1, -1, 1, -1};
    const auto s = real_dft(x);
    REQUIRE(s.size() == 6);
    CHECK(std::abs(s[0]) < 1e-12);
    CHECK(std::abs(s[2]) < 1e-12);
    CHECK(std::abs(s[3]) < 1e-12);
    CHECK(s[4] == doctest::Approx(2.0));
    CHECK(std::abs(s[1]) < 1e-12);
    CHECK(std::abs(s[5]) < 1e-12);
  }

  TEST_CASE("short series are rejected") {
    const std::array<float, 3> x{1, 2, 3};
    CHECK_THROWS_AS(real_dft(x), std::invalid_argument);
  }

  TEST_CASE("matches the naive DFT and preserves energy") {
    for (std::size_t n : {64u, 100u, 128u, 255u, 256u}) {
      const auto data = test::random_dataset(20, n, n);
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = data.series(i);
        const auto fast = real_dft(x);
        const auto slow = test::naive_dft(x);
        REQUIRE(fast.size() == slow.size());
        double norm = 0.0, diff = 0.0;
        for (std::size_t j = 0; j < fast.size(); ++j) {
          norm += slow[j] * slow[j];
          diff += (fast[j] - slow[j]) * (fast[j] - slow[j]);
        }
        CHECK(std::sqrt(diff / norm) <= 1e-5);
        double energy = 0.0;
        for (float v : x) energy += static_cast<double>(v) * v;
        CHECK(test::relative_error(spectral_energy(fast, n), energy) <= 1e-4);
        CHECK(std::abs(fast[0]) < 1e-5);
      }
    }
  }

  TEST_CASE("linearity") {
    const auto raw = test::gaussian_values(1, 128, 4);
    std::vector<float> scaled(raw.size());
    std::transform(raw.begin(), raw.end(), scaled.begin(), [](float v) { return 2.5f * v; });
    const auto a = real_dft(raw);
    const auto b = real_dft(scaled);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(b[j] - 2.5 * a[j]) <= 1e-5 * (1 + std::abs(b[j])));
  }

  TEST_CASE("layout weights") {
    const SpectrumLayout even{64, 33};
    CHECK(even.weight(0) == 1.0);
    CHECK(even.weight(1) == 1.0);
    CHECK(even.weight(2) == 2.0);
    CHECK(even.weight(63) == 2.0);
    CHECK(even.weight(64) == 1.0);
    CHECK(even.weight(65) == 1.0);
    const SpectrumLayout odd{63, 32};
    CHECK(odd.weight(62) == 2.0);
    CHECK(odd.weight(63) == 2.0);
    CHECK_THROWS(SpectrumLayout{64, 34}.validate());
    CHECK_THROWS(SpectrumLayout{3, 1}.validate());
  }

  TEST_CASE("full-spectrum weighted distance equals squared ED") {
    for (std::size_t n : {64u, 65u, 128u}) {
      const auto data = test::random_dataset(40, n, 17);
      const SpectrumLayout layout{n, n / 2 + 1};
      for (std::size_t p = 0; p < 20; ++p) {
        const auto a = real_dft(data.series(2 * p));
        const auto b = real_dft(data.series(2 * p + 1));
        double d = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) d += layout.weight(j) * (a[j] - b[j]) * (a[j] - b[j]);
        const double ed = test::naive_squared_distance(data.series(2 * p), data.series(2 * p + 1));
        CHECK(test::relative_error(d, ed) <= 1e-4);
      }
    }
  }

  TEST_CASE("any truncated selection lower-bounds the squared distance") {
    const std::size_t n = 64;
    const auto data = test::random_dataset(2000, n, 23);
    const SpectrumLayout layout{n, 16};
    std::mt19937_64 rng(3);
    std::vector<std::uint32_t> all(layout.candidate_positions());
    std::iota(all.begin(), all.end(), 0u);
    std::vector<std::vector<double>> spectra;
    for (std::size_t i = 0; i < data.size(); ++i) spectra.push_back(real_dft(data.series(i)));
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    for (int trial = 0; trial < 10000; ++trial) {
      std::shuffle(all.begin(), all.end(), rng);
      const std::vector<std::uint32_t> chosen(all.begin(), all.begin() + 16);
      const auto sel = make_selection(chosen, layout);
      const auto i = pick(rng), j = pick(rng);
      double d = 0.0;
      for (std::size_t s = 0; s < sel.size(); ++s) {
        const double diff = spectra[i][sel.positions[s]] - spectra[j][sel.positions[s]];
        d += sel.weights[s] * diff * diff;
      }
      CHECK(d <= test::naive_squared_distance(data.series(i), data.series(j)) + 1e-5);
    }
  }

  TEST_CASE("variance selection with a unique maximum") {
    const SpectrumLayout layout{64, 16};
    std::vector<double> m(3 * 32, 1.0);
    m[0 * 32 + 5] = 0.0;
    m[1 * 32 + 5] = 5.0;
    m[2 * 32 + 5] = -4.0;
    const auto sel = select_by_variance(m, 3, 1, layout);
    REQUIRE(sel.size() == 1);
    CHECK(sel.positions[0] == 5);
    CHECK(sel.weights[0] == 2.0);
  }

  TEST_CASE("equal variances break ties by lower position") {
    const SpectrumLayout layout{64, 16};
    std::vector<double> m(2 * 32);
    for (std::size_t c = 0; c < 32; ++c) {
      m[c] = 1.0;
      m[32 + c] = -1.0;
    }
    const auto sel = select_by_variance(m, 2, 3, layout);
    CHECK(sel.positions == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(sel.weights == std::vector<double>{1.0, 1.0, 2.0});
  }

  TEST_CASE("variance selection matches a full-sort oracle") {
    const SpectrumLayout layout{64, 16};
    std::mt19937_64 rng(8);
    std::normal_distribution<double> dist;
    std::uniform_real_distribution<double> scale(0.1, 3.0);
    std::vector<double> col_scale(32);
    for (auto& s : col_scale) s = scale(rng);
    std::vector<double> m(100 * 32);
    for (std::size_t r = 0; r < 100; ++r) {
      for (std::size_t c = 0; c < 32; ++c) m[r * 32 + c] = col_scale[c] * dist(rng);
    }
    const auto var = column_variance(m, 100, 32);
    std::vector<std::uint32_t> order(32);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return var[a] > var[b]; });
    const auto sel = select_by_variance(m, 100, 16, layout);
    CHECK(sel.positions == std::vector<std::uint32_t>(order.begin(), order.begin() + 16));
    CHECK_THROWS(select_by_variance(m, 100, 33, layout));
    CHECK_THROWS(select_by_variance(m, 1, 4, layout));
  }

  TEST_CASE("mean selected index") {
    const SpectrumLayout layout{256, 16};
    std::vector<std::uint32_t> pos;
    for (std::uint32_t k = 8; k < 16; ++k) pos.push_back(2 * k);
    CHECK(mean_selected_index(make_selection(pos, layout)) == doctest::Approx(11.5));
    CHECK(mean_selected_index(make_selection({0}, layout)) == 0.0);
    CHECK(mean_selected_index(make_selection({1, 3}, layout)) == doctest::Approx(0.5));
    // Coefficient 32 is eligible only when 33 coefficients are candidates.
    const SpectrumLayout wide{256, 33};
    CHECK(mean_selected_index(make_selection({0, 64}, wide)) == doctest::Approx(16.0));
    CHECK_THROWS(make_selection({64}, layout));
    CHECK_THROWS(mean_selected_index(SelectedIndices{}));
  }
}
