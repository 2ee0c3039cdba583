#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace sofa {

/// Reads a headerless file of 32-bit little-endian reals, series-major.
/// With `count` = 0 the number of series is inferred from the file size;
/// otherwise the size must equal count x length x 4 bytes exactly.
std::vector<float> read_raw_f32(const std::filesystem::path& path, std::size_t length,
                                std::size_t count = 0);

void write_raw_f32(const std::filesystem::path& path, std::span<const float> values);

}  // namespace sofa
