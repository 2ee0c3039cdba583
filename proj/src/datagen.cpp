#include "sofa/datagen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sofa {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

void add_sinusoids(std::mt19937_64& rng, float* out, std::size_t length, int count,
                   double min_cycles, double max_cycles) {
  std::uniform_real_distribution<double> cycles(min_cycles, max_cycles);
  std::uniform_real_distribution<double> amplitude(0.5, 1.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (int s = 0; s < count; ++s) {
    const double f = cycles(rng);
    const double a = amplitude(rng);
    const double p = phase(rng);
    for (std::size_t t = 0; t < length; ++t) {
      out[t] += static_cast<float>(
          a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / static_cast<double>(length) + p));
    }
  }
}

void add_noise(std::mt19937_64& rng, float* out, std::size_t length, double sigma) {
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t t = 0; t < length; ++t) out[t] += static_cast<float>(noise(rng));
}

}  // namespace

std::string to_string(Profile profile) {
  switch (profile) {
    case Profile::smooth: return "smooth";
    case Profile::noisy: return "noisy";
    case Profile::square_wave: return "square-wave";
    case Profile::random_walk: return "random-walk";
  }
  return "unknown";
}

Profile parse_profile(const std::string& text) {
  if (text == "smooth") return Profile::smooth;
  if (text == "noisy") return Profile::noisy;
  if (text == "square-wave" || text == "square_wave") return Profile::square_wave;
  if (text == "random-walk" || text == "random_walk") return Profile::random_walk;
  throw std::invalid_argument("unknown profile '" + text +
                              "' (expected smooth, noisy, square-wave or random-walk)");
}

std::vector<float> generate_series(Profile profile, std::size_t count, std::size_t length,
                                   std::uint64_t seed) {
  if (length < 2) throw std::invalid_argument("generate_series: length must be at least 2");
  std::vector<float> values(count * length, 0.0f);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(i)));
    float* out = values.data() + i * length;
    switch (profile) {
      case Profile::smooth:
        add_sinusoids(rng, out, length, 3, 1.0, 6.0);
        add_noise(rng, out, length, 0.05);
        break;
      case Profile::noisy:
        add_sinusoids(rng, out, length, 2, 1.0, 15.0);
        add_noise(rng, out, length, 0.5);
        break;
      case Profile::square_wave: {
        std::uniform_real_distribution<double> cycles(6.0, 15.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        const double f = cycles(rng);
        const double p = phase(rng);
        for (std::size_t t = 0; t < length; ++t) {
          const double s = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) /
                                        static_cast<double>(length) + p);
          out[t] = s >= 0.0 ? 1.0f : -1.0f;
        }
        add_noise(rng, out, length, 0.1);
        break;
      }
      case Profile::random_walk: {
        std::normal_distribution<double> step(0.0, 1.0);
        double level = 0.0;
        for (std::size_t t = 0; t < length; ++t) {
          level += step(rng);
          out[t] = static_cast<float>(level);
        }
        break;
      }
    }
  }
  return values;
}

}  // namespace sofa
