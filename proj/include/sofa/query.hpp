#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sofa/core.hpp"
#include "sofa/distance.hpp"
#include "sofa/index.hpp"
#include "sofa/summarizer.hpp"

namespace sofa {

struct Neighbor {
  std::uint64_t id = 0;
  double squared_distance = 0.0;

  double distance() const { return std::sqrt(squared_distance); }

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    if (a.squared_distance != b.squared_distance) return a.squared_distance < b.squared_distance;
    return a.id < b.id;
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// The k best (squared distance, id) pairs seen so far. The k-th distance is
/// the pruning threshold (BSF); it is +inf until k candidates are held.
class TopK {
 public:
  explicit TopK(std::size_t k);

  /// Accepts the candidate if it is strictly closer than the current
  /// threshold. Returns true when the set changed.
  bool offer(double squared_distance, std::uint64_t id);
  double threshold() const;
  std::size_t size() const { return heap_.size(); }
  /// Ascending by (distance, id).
  std::vector<Neighbor> sorted() const;

 private:
  std::vector<Neighbor> heap_;  // max-heap
  std::size_t k_;
};

struct PruneEvent {
  double lower_bound = 0.0;
  double bsf = 0.0;
};

struct QueryStats {
  std::size_t exact_distance_count = 0;
  std::size_t series_lower_bounds = 0;
  std::size_t leaves_visited = 0;
  std::size_t leaves_pruned = 0;
  std::size_t nodes_pruned = 0;
  double approximate_bsf = kInfinity;
  /// Filled only when QueryOptions::record_trace is set.
  std::vector<PruneEvent> prune_log;
  std::vector<double> bsf_trace;
};

struct QueryOptions {
  std::size_t k = 1;
  std::size_t workers = 1;
  bool record_trace = false;
};

/// Common surface of the index engine and the scan baseline.
class KnnSearcher {
 public:
  virtual ~KnnSearcher() = default;
  /// k nearest neighbours of a z-normalized query, ascending.
  virtual std::vector<Neighbor> search(std::span<const float> query, const QueryOptions& options,
                                       QueryStats* stats = nullptr) const = 0;
  virtual std::size_t size() const = 0;
  virtual std::string name() const = 0;
};

/// Parallel linear scan: each worker scans one contiguous segment with its own
/// heap and threshold; the partial results are merged at the end.
std::vector<Neighbor> parallel_scan_knn(const Dataset& data, std::span<const float> query,
                                        std::size_t k, std::size_t workers,
                                        QueryStats* stats = nullptr);

class ScanSearcher final : public KnnSearcher {
 public:
  explicit ScanSearcher(const Dataset& data) : data_(data) {}
  std::vector<Neighbor> search(std::span<const float> query, const QueryOptions& options,
                               QueryStats* stats = nullptr) const override {
    return parallel_scan_knn(data_, query, options.k, options.workers, stats);
  }
  std::size_t size() const override { return data_.size(); }
  std::string name() const override { return "scan"; }

 private:
  const Dataset& data_;
};

struct ApproximateResult {
  std::vector<Neighbor> neighbors;
  double bsf = kInfinity;
  const Node* leaf = nullptr;
};

/// Exact k-NN over an index tree. Holds references to the dataset, tree and
/// summarizer, which must outlive it. One query at a time per instance.
class IndexSearcher final : public KnnSearcher {
 public:
  IndexSearcher(const Dataset& data, const IndexTree& tree, const Summarizer& summarizer);

  /// Descends to the single leaf matching the query's word (or the root child
  /// with the smallest lower bound when no child matches) and computes exact
  /// distances inside it.
  ApproximateResult approximate_search(std::span<const float> query, std::size_t k = 1) const;

  /// Approximate descent for an initial BSF, parallel subtree pruning into
  /// per-worker priority queues, then leaf processing with per-series lower
  /// bounds and early-abandoning exact distances.
  std::vector<Neighbor> exact_knn(std::span<const float> query, const QueryOptions& options,
                                  QueryStats* stats = nullptr) const;

  std::vector<Neighbor> search(std::span<const float> query, const QueryOptions& options,
                               QueryStats* stats = nullptr) const override {
    return exact_knn(query, options, stats);
  }
  std::size_t size() const override { return tree_.size(); }
  std::string name() const override { return to_string(summarizer_.kind()); }

 private:
  const Node* descend(std::span<const double> projection) const;

  const Dataset& data_;
  const IndexTree& tree_;
  const Summarizer& summarizer_;
};

}  // namespace sofa
