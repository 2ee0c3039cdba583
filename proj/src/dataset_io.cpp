#include "sofa/dataset_io.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>
#include <string>

namespace sofa {

static_assert(std::endian::native == std::endian::little, "raw f32 I/O assumes a little-endian host");

std::vector<float> read_raw_f32(const std::filesystem::path& path, std::size_t length,
                                std::size_t count) {
  if (length == 0) throw std::invalid_argument("series length must be positive");
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw std::runtime_error("cannot stat " + path.string() + ": " + ec.message());
  const std::size_t row = length * sizeof(float);
  if (count == 0) {
    if (bytes % row != 0) {
      throw std::runtime_error(path.string() + ": size " + std::to_string(bytes) +
                               " is not a multiple of " + std::to_string(row) +
                               " bytes (series length " + std::to_string(length) + ")");
    }
    count = bytes / row;
  } else if (bytes != count * row) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(count * row) +
                             " bytes for " + std::to_string(count) + " series, found " +
                             std::to_string(bytes));
  }
  std::vector<float> values(count * length);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (!values.empty() &&
      !in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * row))) {
    throw std::runtime_error("failed reading " + path.string());
  }
  return values;
}

void write_raw_f32(const std::filesystem::path& path, std::span<const float> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace sofa
