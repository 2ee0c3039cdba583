#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sofa/core.hpp"
#include "sofa/summarizer.hpp"

namespace sofa {

struct IndexConfig {
  std::size_t leaf_capacity = 20000;
  /// Bits per position used to key the root's children.
  int initial_cardinality = 1;
  std::size_t workers = 1;
  SummarizerKind summarizer = SummarizerKind::sfa;

  /// Throws std::invalid_argument for a capacity of 0 or a root cardinality
  /// outside [1, symbol_bits].
  void validate(int symbol_bits) const;
};

/// A tree node. Every node carries a signature: one symbol prefix and one
/// cardinality per word position. Inner nodes have exactly two children that
/// differ from the parent in one position by one promoted bit. Leaves store
/// series ids together with their full-cardinality words.
struct Node {
  std::vector<std::uint8_t> symbols;
  std::vector<std::uint8_t> cardinality;
  int split_position = -1;
  std::array<std::unique_ptr<Node>, 2> children;

  std::vector<std::uint64_t> ids;
  std::vector<std::uint8_t> words;  // ids.size() x word_length
  /// Leaf allowed to exceed capacity because its payload cannot be split.
  bool overflow = false;

  bool is_leaf() const { return !children[0]; }
  std::size_t leaf_size() const { return ids.size(); }
  std::span<const std::uint8_t> word(std::size_t i) const {
    const std::size_t l = symbols.size();
    return {words.data() + i * l, l};
  }
};

struct SplitParams {
  std::size_t word_length = 0;
  int bits = 0;
  std::size_t leaf_capacity = 0;
};

/// Position whose next bit divides the leaf payload most evenly (minimum
/// |left - right|, ties to the lowest position), or -1 when every position is
/// already at full cardinality.
int choose_split_position(const Node& leaf, const SplitParams& params);

/// Turns an over-capacity leaf into an inner node with two leaves, splitting
/// the children again while they stay over capacity. A leaf whose words are
/// all identical, or whose positions are all at full cardinality, is marked
/// as an overflow leaf instead.
void split_leaf(Node& leaf, const SplitParams& params);

/// Routes (id, word) below `node` and splits on overflow.
void insert_into(Node& node, std::uint64_t id, std::span<const std::uint8_t> word,
                 const SplitParams& params);

/// The summarization-agnostic tree: a sparse root keyed by the
/// initial-cardinality prefix of each word, binary inner nodes and leaves.
class IndexTree {
 public:
  using RootMap = std::map<std::string, std::unique_ptr<Node>>;

  IndexTree(std::size_t word_length, int bits, IndexConfig config);

  std::size_t word_length() const { return params_.word_length; }
  int bits() const { return params_.bits; }
  const IndexConfig& config() const { return config_; }
  const SplitParams& split_params() const { return params_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const RootMap& root() const { return root_; }

  std::string root_key(std::span<const std::uint8_t> word) const;
  /// A fresh root child leaf for `key`.
  std::unique_ptr<Node> make_root_child(const std::string& key) const;

  void insert(std::uint64_t id, std::span<const std::uint8_t> word);

  /// Installs a prebuilt subtree under `key` (used by the bulk builder and
  /// the snapshot loader). Throws if the key is already present.
  void adopt(std::string key, std::unique_ptr<Node> subtree, std::size_t entries);

 private:
  RootMap root_;
  IndexConfig config_;
  SplitParams params_;
  std::size_t size_ = 0;
};

struct BuildTimings {
  double transform_seconds = 0.0;
  double build_seconds = 0.0;
};

/// Bulk construction. Workers summarize contiguous chunks of the dataset and
/// bucket ids by root key; buckets are concatenated per key in chunk order and
/// every root subtree is then built by a single worker from its ids in
/// ascending order. The resulting tree is identical for every worker count.
IndexTree build_index(const Dataset& dataset, const Summarizer& summarizer,
                      const IndexConfig& config, BuildTimings* timings = nullptr);

/// Lower bound between a query projection and a node signature.
inline double node_lower_bound(std::span<const double> query_projection, const Node& node,
                               const QuantizationTable& table, double bsf = kInfinity) {
  return lower_bound(query_projection, node.symbols, node.cardinality, table, bsf);
}

/// Visits every leaf with its root-to-leaf path (path.back() is the leaf).
void for_each_leaf(const IndexTree& tree,
                   const std::function<void(std::span<const Node* const> path)>& visit);

/// Series ids per root key, sorted. Equal for trees with the same content.
std::map<std::string, std::vector<std::uint64_t>> root_contents(const IndexTree& tree);

struct AuditReport {
  std::vector<std::string> errors;
  std::size_t entries = 0;
  std::size_t leaves = 0;
  std::size_t overflow_leaves = 0;
  std::size_t chains_checked = 0;

  bool ok() const { return errors.empty(); }
};

/// Structural audit: prefix containment at every node, binary split shape,
/// leaf capacity for non-overflow leaves, and completeness (ids 0..N-1 each
/// exactly once).
AuditReport audit(const IndexTree& tree, std::size_t expected_count);

/// Checks LBD(ancestor) <= LBD(descendant) <= LBD(series word) <= squared ED
/// (+ tolerance) along `samples` random (query, indexed series) chains.
AuditReport audit_lower_bounds(const IndexTree& tree, const Summarizer& summarizer,
                               const Dataset& data, const Dataset& queries, std::size_t samples,
                               std::uint64_t seed, double tolerance = 1e-5);

}  // namespace sofa
