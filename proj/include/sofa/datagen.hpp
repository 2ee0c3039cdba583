#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sofa {

/// Synthetic corpus shapes.
///  - smooth: a few low-frequency sinusoids with light noise
///  - noisy: mid-frequency sinusoids buried in strong white noise
///  - square_wave: fast square waves (6-15 cycles per series) with light noise
///  - random_walk: cumulative Gaussian steps
enum class Profile { smooth, noisy, square_wave, random_walk };

std::string to_string(Profile profile);
Profile parse_profile(const std::string& text);

/// `count` raw (not normalized) series of `length` values, series-major.
/// Series i depends only on (profile, length, seed, i).
std::vector<float> generate_series(Profile profile, std::size_t count, std::size_t length,
                                   std::uint64_t seed);

}  // namespace sofa
