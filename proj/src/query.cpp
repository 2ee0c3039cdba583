#include "sofa/query.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <stdexcept>

#include "sofa/parallel.hpp"

namespace sofa {

TopK::TopK(std::size_t k) : k_(k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  heap_.reserve(k);
}

bool TopK::offer(double squared_distance, std::uint64_t id) {
  if (heap_.size() < k_) {
    heap_.push_back({id, squared_distance});
    std::push_heap(heap_.begin(), heap_.end());
    return true;
  }
  if (!(squared_distance < heap_.front().squared_distance)) return false;
  std::pop_heap(heap_.begin(), heap_.end());
  heap_.back() = {id, squared_distance};
  std::push_heap(heap_.begin(), heap_.end());
  return true;
}

double TopK::threshold() const {
  return heap_.size() < k_ ? kInfinity : heap_.front().squared_distance;
}

std::vector<Neighbor> TopK::sorted() const {
  auto out = heap_;
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void check_query(std::size_t k, std::size_t count, std::size_t query_length, std::size_t length) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (k > count) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the number of series (" +
                                std::to_string(count) + ")");
  }
  if (query_length != length) {
    throw std::invalid_argument("query length " + std::to_string(query_length) +
                                " does not match series length " + std::to_string(length));
  }
}

void atomic_min(std::atomic<double>& target, double value) {
  double current = target.load(std::memory_order_relaxed);
  while (value < current &&
         !target.compare_exchange_weak(current, value, std::memory_order_release,
                                       std::memory_order_relaxed)) {
  }
}

}  // namespace

std::vector<Neighbor> parallel_scan_knn(const Dataset& data, std::span<const float> query,
                                        std::size_t k, std::size_t workers, QueryStats* stats) {
  check_query(k, data.size(), query.size(), data.length());
  workers = std::clamp<std::size_t>(workers, 1, data.size());

  std::vector<std::vector<Neighbor>> partial(workers);
  run_workers(workers, [&](std::size_t w) {
    const auto [begin, end] = chunk_bounds(data.size(), workers, w);
    TopK best(k);
    for (std::size_t i = begin; i < end; ++i) {
      const double bsf = best.threshold();
      const double d = euclidean_early_abandon(query, data.series(i), bsf);
      if (d < bsf) best.offer(d, i);
    }
    partial[w] = best.sorted();
  });

  std::vector<Neighbor> merged;
  for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
  std::sort(merged.begin(), merged.end());
  merged.resize(k);
  if (stats) {
    *stats = QueryStats{};
    stats->exact_distance_count = data.size();
  }
  return merged;
}

IndexSearcher::IndexSearcher(const Dataset& data, const IndexTree& tree,
                             const Summarizer& summarizer)
    : data_(data), tree_(tree), summarizer_(summarizer) {
  if (data.length() != summarizer.series_length()) {
    throw std::invalid_argument("IndexSearcher: dataset length does not match the summarizer");
  }
  if (tree.word_length() != summarizer.word_length() || tree.bits() != summarizer.bits()) {
    throw std::invalid_argument("IndexSearcher: index shape does not match the summarizer");
  }
}

const Node* IndexSearcher::descend(std::span<const double> projection) const {
  if (tree_.empty()) return nullptr;
  const auto& table = summarizer_.table();
  std::vector<std::uint8_t> word(summarizer_.word_length());
  summarizer_.encode(projection, word);

  const Node* node = nullptr;
  if (auto it = tree_.root().find(tree_.root_key(word)); it != tree_.root().end()) {
    node = it->second.get();
  } else {
    double best = kInfinity;
    for (const auto& [key, child] : tree_.root()) {
      const double lb = node_lower_bound(projection, *child, table);
      if (!node || lb < best) {
        node = child.get();
        best = lb;
      }
    }
  }

  const int bits = tree_.bits();
  while (!node->is_leaf()) {
    const int p = node->split_position;
    const int card = node->children[0]->cardinality[p];
    const Node* next = node->children[(word[p] >> (bits - card)) & 1u].get();
    // Skip the empty sibling left behind by a one-sided split.
    if (next->is_leaf() && next->leaf_size() == 0) {
      next = node->children[((word[p] >> (bits - card)) & 1u) ^ 1u].get();
    }
    node = next;
  }
  return node;
}

ApproximateResult IndexSearcher::approximate_search(std::span<const float> query,
                                                    std::size_t k) const {
  ApproximateResult result;
  if (tree_.empty()) return result;
  check_query(k, tree_.size(), query.size(), data_.length());
  const auto projection = summarizer_.project(query);
  result.leaf = descend(projection);
  if (!result.leaf) return result;
  TopK best(k);
  for (std::size_t e = 0; e < result.leaf->leaf_size(); ++e) {
    const double bsf = best.threshold();
    const double d = euclidean_early_abandon(query, data_.series(result.leaf->ids[e]), bsf);
    if (d < bsf) best.offer(d, result.leaf->ids[e]);
  }
  result.neighbors = best.sorted();
  result.bsf = best.threshold();
  return result;
}

namespace {

struct LeafEntry {
  double lower_bound;
  const Node* leaf;
  // Min-heap through std::push_heap's max-heap convention.
  friend bool operator<(const LeafEntry& a, const LeafEntry& b) {
    return a.lower_bound > b.lower_bound;
  }
};

struct LeafQueue {
  std::mutex mu;
  std::vector<LeafEntry> heap;
  bool abandoned = false;
};

}  // namespace

std::vector<Neighbor> IndexSearcher::exact_knn(std::span<const float> query,
                                               const QueryOptions& options,
                                               QueryStats* stats) const {
  check_query(options.k, tree_.size(), query.size(), data_.length());
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  const bool trace = options.record_trace && stats != nullptr;
  const auto& table = summarizer_.table();
  const auto projection = summarizer_.project(query);

  std::atomic<double> bsf{kInfinity};
  std::mutex result_mu;
  TopK best(options.k);
  std::vector<double> bsf_trace;
  std::vector<PruneEvent> prune_log;
  std::mutex log_mu;
  std::atomic<std::size_t> exact_count{0}, series_lbs{0}, leaves_visited{0}, leaves_pruned{0},
      nodes_pruned{0};

  auto log_prune = [&](double lb, double threshold) {
    if (!trace) return;
    std::lock_guard lock(log_mu);
    prune_log.push_back({lb, threshold});
  };

  auto process_leaf = [&](const Node& leaf, bool filter) {
    leaves_visited.fetch_add(1, std::memory_order_relaxed);
    std::size_t local_exact = 0, local_lbs = 0;
    for (std::size_t e = 0; e < leaf.leaf_size(); ++e) {
      const double current = bsf.load(std::memory_order_acquire);
      if (filter) {
        ++local_lbs;
        if (lower_bound(projection, leaf.word(e).data(), table, current) >= current) continue;
      }
      ++local_exact;
      const double d = euclidean_early_abandon(query, data_.series(leaf.ids[e]), current);
      if (!(d < current)) continue;
      std::lock_guard lock(result_mu);
      const double before = best.threshold();
      if (best.offer(d, leaf.ids[e])) {
        const double after = best.threshold();
        atomic_min(bsf, after);
        if (trace && after < before) bsf_trace.push_back(after);
      }
    }
    exact_count.fetch_add(local_exact, std::memory_order_relaxed);
    series_lbs.fetch_add(local_lbs, std::memory_order_relaxed);
  };

  // Approximate answer seeds the BSF.
  const Node* seed_leaf = descend(projection);
  if (seed_leaf) process_leaf(*seed_leaf, false);
  const double approximate_bsf = bsf.load();

  // Parallel subtree traversal: each root subtree is owned by one worker;
  // surviving leaves go round-robin into the priority queues.
  std::vector<const Node*> subtrees;
  subtrees.reserve(tree_.root().size());
  for (const auto& [key, child] : tree_.root()) subtrees.push_back(child.get());
  std::vector<LeafQueue> queues(workers);
  std::atomic<std::size_t> next_subtree{0}, next_queue{0};

  run_workers(workers, [&](std::size_t) {
    std::vector<const Node*> stack;
    for (std::size_t s = next_subtree.fetch_add(1); s < subtrees.size();
         s = next_subtree.fetch_add(1)) {
      stack.push_back(subtrees[s]);
      while (!stack.empty()) {
        const Node* node = stack.back();
        stack.pop_back();
        if (node->is_leaf() && (node == seed_leaf || node->leaf_size() == 0)) continue;
        const double current = bsf.load(std::memory_order_acquire);
        const double lb = node_lower_bound(projection, *node, table, current);
        if (lb >= current) {
          nodes_pruned.fetch_add(1, std::memory_order_relaxed);
          if (node->is_leaf()) {
            leaves_pruned.fetch_add(1, std::memory_order_relaxed);
            log_prune(lb, current);
          }
          continue;
        }
        if (node->is_leaf()) {
          auto& q = queues[next_queue.fetch_add(1, std::memory_order_relaxed) % workers];
          std::lock_guard lock(q.mu);
          q.heap.push_back({lb, node});
          std::push_heap(q.heap.begin(), q.heap.end());
        } else {
          stack.push_back(node->children[1].get());
          stack.push_back(node->children[0].get());
        }
      }
    }
  });

  // Each worker drains its own queue first, then moves on to the others. A
  // queue whose head is no closer than the BSF is abandoned as a whole.
  run_workers(workers, [&](std::size_t w) {
    for (std::size_t step = 0; step < workers; ++step) {
      LeafQueue& q = queues[(w + step) % workers];
      while (true) {
        LeafEntry entry{};
        {
          std::lock_guard lock(q.mu);
          if (q.abandoned || q.heap.empty()) break;
          std::pop_heap(q.heap.begin(), q.heap.end());
          entry = q.heap.back();
          q.heap.pop_back();
          const double current = bsf.load(std::memory_order_acquire);
          if (entry.lower_bound >= current) {
            q.abandoned = true;
            leaves_pruned.fetch_add(1 + q.heap.size(), std::memory_order_relaxed);
            log_prune(entry.lower_bound, current);
            for (const auto& rest : q.heap) log_prune(rest.lower_bound, current);
            q.heap.clear();
            break;
          }
        }
        process_leaf(*entry.leaf, true);
      }
    }
  });

  if (stats) {
    *stats = QueryStats{};
    stats->exact_distance_count = exact_count.load();
    stats->series_lower_bounds = series_lbs.load();
    stats->leaves_visited = leaves_visited.load();
    stats->leaves_pruned = leaves_pruned.load();
    stats->nodes_pruned = nodes_pruned.load();
    stats->approximate_bsf = approximate_bsf;
    stats->prune_log = std::move(prune_log);
    stats->bsf_trace = std::move(bsf_trace);
  }
  return best.sorted();
}

}  // namespace sofa
