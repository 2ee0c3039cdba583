#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sofa/index.hpp"
#include "sofa/summarizer.hpp"

namespace sofa {

/// Malformed, truncated or version-incompatible binary input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr std::uint32_t kIndexFormatVersion = 1;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

struct DatasetFingerprint {
  std::uint64_t count = 0;
  std::uint64_t length = 0;
  std::uint64_t hash = 0;

  friend bool operator==(const DatasetFingerprint&, const DatasetFingerprint&) = default;
};

/// Fingerprint of N x length 32-bit values (hash over their little-endian bytes).
DatasetFingerprint fingerprint(std::span<const float> values, std::size_t length);

/// Model blob: magic, version, type tag, n, l, a, then for SFA the binning
/// mode, candidate limit, selected positions and weights; breakpoint rows as
/// 64-bit little-endian reals.
std::vector<std::uint8_t> serialize_model(const Summarizer& summarizer);
Summarizer deserialize_model(std::span<const std::uint8_t> bytes);

struct IndexSnapshot {
  IndexTree tree;
  Summarizer summarizer;
  DatasetFingerprint data;
  std::uint64_t model_hash = 0;
};

/// Index snapshot: config, embedded model blob and its hash, dataset
/// fingerprint, then a pre-order node stream per root child. Leaves carry
/// (64-bit series id, word bytes) pairs.
std::vector<std::uint8_t> serialize_index(const IndexTree& tree, const Summarizer& summarizer,
                                          const DatasetFingerprint& data);
IndexSnapshot deserialize_index(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace sofa
