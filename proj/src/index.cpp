#include "sofa/index.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "sofa/distance.hpp"
#include "sofa/parallel.hpp"

namespace sofa {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool all_words_identical(const Node& leaf) {
  if (leaf.leaf_size() < 2) return true;
  const auto first = leaf.word(0);
  for (std::size_t i = 1; i < leaf.leaf_size(); ++i) {
    if (!std::equal(first.begin(), first.end(), leaf.word(i).begin())) return false;
  }
  return true;
}

bool has_spare_cardinality(const Node& node, int bits) {
  return std::any_of(node.cardinality.begin(), node.cardinality.end(),
                     [bits](std::uint8_t c) { return c < bits; });
}

std::unique_ptr<Node> make_child(const Node& parent, int position, int bit) {
  auto child = std::make_unique<Node>();
  child->symbols = parent.symbols;
  child->cardinality = parent.cardinality;
  child->symbols[position] = static_cast<std::uint8_t>((parent.symbols[position] << 1) | bit);
  child->cardinality[position] = static_cast<std::uint8_t>(parent.cardinality[position] + 1);
  return child;
}

bool matches_signature(std::span<const std::uint8_t> word, const Node& node, int bits) {
  for (std::size_t i = 0; i < word.size(); ++i) {
    if ((word[i] >> (bits - node.cardinality[i])) != node.symbols[i]) return false;
  }
  return true;
}

}  // namespace

void IndexConfig::validate(int symbol_bits) const {
  if (leaf_capacity == 0) throw std::invalid_argument("index: leaf capacity must be at least 1");
  if (initial_cardinality < 1 || initial_cardinality > symbol_bits) {
    throw std::invalid_argument("index: initial cardinality " + std::to_string(initial_cardinality) +
                                " outside [1, " + std::to_string(symbol_bits) + "]");
  }
}

int choose_split_position(const Node& leaf, const SplitParams& params) {
  const std::size_t total = leaf.leaf_size();
  int best = -1;
  std::size_t best_imbalance = 0;
  for (std::size_t p = 0; p < params.word_length; ++p) {
    const int card = leaf.cardinality[p];
    if (card >= params.bits) continue;
    const int shift = params.bits - card - 1;
    std::size_t ones = 0;
    for (std::size_t i = 0; i < total; ++i) ones += (leaf.words[i * params.word_length + p] >> shift) & 1u;
    const std::size_t zeros = total - ones;
    const std::size_t imbalance = ones > zeros ? ones - zeros : zeros - ones;
    if (best < 0 || imbalance < best_imbalance) {
      best = static_cast<int>(p);
      best_imbalance = imbalance;
    }
  }
  return best;
}

void split_leaf(Node& leaf, const SplitParams& params) {
  if (!leaf.is_leaf()) throw std::logic_error("split_leaf: node is not a leaf");
  const int position = choose_split_position(leaf, params);
  if (position < 0 || all_words_identical(leaf)) {
    leaf.overflow = true;
    return;
  }

  std::array<std::unique_ptr<Node>, 2> children{make_child(leaf, position, 0),
                                                make_child(leaf, position, 1)};
  const int shift = params.bits - children[0]->cardinality[position];
  const std::size_t l = params.word_length;
  for (std::size_t i = 0; i < leaf.leaf_size(); ++i) {
    const auto word = leaf.word(i);
    Node& target = *children[(word[position] >> shift) & 1u];
    target.ids.push_back(leaf.ids[i]);
    target.words.insert(target.words.end(), word.begin(), word.begin() + static_cast<std::ptrdiff_t>(l));
  }

  leaf.ids = {};
  leaf.words = {};
  leaf.overflow = false;
  leaf.split_position = position;
  leaf.children = std::move(children);

  for (auto& child : leaf.children) {
    if (child->leaf_size() > params.leaf_capacity) split_leaf(*child, params);
  }
}

void insert_into(Node& node, std::uint64_t id, std::span<const std::uint8_t> word,
                 const SplitParams& params) {
  Node* cur = &node;
  while (!cur->is_leaf()) {
    const int p = cur->split_position;
    const int card = cur->children[0]->cardinality[p];
    cur = cur->children[(word[p] >> (params.bits - card)) & 1u].get();
  }
  cur->ids.push_back(id);
  cur->words.insert(cur->words.end(), word.begin(), word.end());
  if (cur->leaf_size() <= params.leaf_capacity) return;
  if (!cur->overflow) {
    split_leaf(*cur, params);
  } else if (has_spare_cardinality(*cur, params.bits) &&
             !std::equal(word.begin(), word.end(), cur->word(0).begin())) {
    // A distinct word arrived in a leaf that overflowed on identical words.
    cur->overflow = false;
    split_leaf(*cur, params);
  }
}

IndexTree::IndexTree(std::size_t word_length, int bits, IndexConfig config)
    : config_(config), params_{word_length, bits, config.leaf_capacity} {
  if (word_length == 0) throw std::invalid_argument("index: word length must be positive");
  config_.validate(bits);
}

std::string IndexTree::root_key(std::span<const std::uint8_t> word) const {
  std::string key(params_.word_length, '\0');
  const int shift = params_.bits - config_.initial_cardinality;
  for (std::size_t i = 0; i < params_.word_length; ++i) {
    key[i] = static_cast<char>(word[i] >> shift);
  }
  return key;
}

std::unique_ptr<Node> IndexTree::make_root_child(const std::string& key) const {
  auto node = std::make_unique<Node>();
  node->symbols.assign(key.begin(), key.end());
  node->cardinality.assign(params_.word_length, static_cast<std::uint8_t>(config_.initial_cardinality));
  return node;
}

void IndexTree::insert(std::uint64_t id, std::span<const std::uint8_t> word) {
  if (word.size() != params_.word_length) throw std::invalid_argument("index: word length mismatch");
  auto key = root_key(word);
  auto it = root_.find(key);
  if (it == root_.end()) it = root_.emplace(key, make_root_child(key)).first;
  insert_into(*it->second, id, word, params_);
  ++size_;
}

void IndexTree::adopt(std::string key, std::unique_ptr<Node> subtree, std::size_t entries) {
  if (!root_.emplace(std::move(key), std::move(subtree)).second) {
    throw std::logic_error("index: duplicate root key");
  }
  size_ += entries;
}

IndexTree build_index(const Dataset& dataset, const Summarizer& summarizer,
                      const IndexConfig& config, BuildTimings* timings) {
  if (dataset.length() != summarizer.series_length()) {
    throw std::invalid_argument("build_index: dataset length does not match the summarizer");
  }
  IndexTree tree(summarizer.word_length(), summarizer.bits(), config);
  const std::size_t n_series = dataset.size();
  const std::size_t l = summarizer.word_length();
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, std::max<std::size_t>(n_series, 1)));

  // Summarize chunks and bucket ids by root key.
  auto start = Clock::now();
  std::vector<std::uint8_t> words(n_series * l);
  std::vector<std::unordered_map<std::string, std::vector<std::uint64_t>>> buckets(workers);
  run_workers(workers, [&](std::size_t w) {
    const auto [begin, end] = chunk_bounds(n_series, workers, w);
    std::vector<double> projection(l);
    for (std::size_t i = begin; i < end; ++i) {
      std::span<std::uint8_t> word(words.data() + i * l, l);
      summarizer.project(dataset.series(i), projection);
      summarizer.encode(projection, word);
      buckets[w][tree.root_key(word)].push_back(i);
    }
  });
  if (timings) timings->transform_seconds = seconds_since(start);

  // Merge buckets per key in chunk order, so ids stay ascending.
  start = Clock::now();
  std::map<std::string, std::vector<std::uint64_t>> merged;
  for (auto& chunk : buckets) {
    for (auto& [key, ids] : chunk) {
      auto& dst = merged[key];
      dst.insert(dst.end(), ids.begin(), ids.end());
    }
    chunk.clear();
  }
  std::vector<const std::string*> keys;
  std::vector<std::vector<std::uint64_t>*> lists;
  for (auto& [key, ids] : merged) {
    std::sort(ids.begin(), ids.end());
    keys.push_back(&key);
    lists.push_back(&ids);
  }

  // Each root subtree is owned by exactly one worker.
  std::vector<std::unique_ptr<Node>> subtrees(keys.size());
  std::atomic<std::size_t> next{0};
  run_workers(std::min(workers, std::max<std::size_t>(keys.size(), 1)), [&](std::size_t) {
    for (std::size_t k = next.fetch_add(1); k < keys.size(); k = next.fetch_add(1)) {
      auto node = tree.make_root_child(*keys[k]);
      for (auto id : *lists[k]) {
        insert_into(*node, id, std::span<const std::uint8_t>(words.data() + id * l, l),
                    tree.split_params());
      }
      subtrees[k] = std::move(node);
    }
  });
  for (std::size_t k = 0; k < keys.size(); ++k) {
    tree.adopt(*keys[k], std::move(subtrees[k]), lists[k]->size());
  }
  if (timings) timings->build_seconds = seconds_since(start);
  return tree;
}

void for_each_leaf(const IndexTree& tree,
                   const std::function<void(std::span<const Node* const> path)>& visit) {
  std::vector<const Node*> path;
  std::function<void(const Node&)> walk = [&](const Node& node) {
    path.push_back(&node);
    if (node.is_leaf()) {
      visit(path);
    } else {
      walk(*node.children[0]);
      walk(*node.children[1]);
    }
    path.pop_back();
  };
  for (const auto& [key, child] : tree.root()) walk(*child);
}

std::map<std::string, std::vector<std::uint64_t>> root_contents(const IndexTree& tree) {
  std::map<std::string, std::vector<std::uint64_t>> out;
  for_each_leaf(tree, [&](std::span<const Node* const> path) {
    const Node& leaf = *path.back();
    if (leaf.leaf_size() == 0) return;
    // A root child's signature is its key.
    auto& ids = out[std::string(path.front()->symbols.begin(), path.front()->symbols.end())];
    ids.insert(ids.end(), leaf.ids.begin(), leaf.ids.end());
  });
  for (auto& [key, ids] : out) std::sort(ids.begin(), ids.end());
  return out;
}

AuditReport audit(const IndexTree& tree, std::size_t expected_count) {
  AuditReport report;
  constexpr std::size_t kMaxErrors = 32;
  auto fail = [&](std::string message) {
    if (report.errors.size() < kMaxErrors) report.errors.push_back(std::move(message));
  };
  const std::size_t l = tree.word_length();
  const int bits = tree.bits();
  std::vector<std::uint8_t> seen(expected_count, 0);

  for (const auto& [key, child] : tree.root()) {
    if (child->symbols.size() != l || child->cardinality.size() != l) {
      fail("root child signature has the wrong length");
      continue;
    }
    for (std::size_t i = 0; i < l; ++i) {
      if (child->cardinality[i] != tree.config().initial_cardinality ||
          child->symbols[i] != static_cast<std::uint8_t>(key[i])) {
        fail("root child signature does not match its key");
        break;
      }
    }
  }

  std::function<void(const Node&, std::vector<const Node*>&)> walk =
      [&](const Node& node, std::vector<const Node*>& path) {
        path.push_back(&node);
        if (!node.is_leaf()) {
          const int p = node.split_position;
          if (!node.children[1] || p < 0 || static_cast<std::size_t>(p) >= l) {
            fail("inner node without two children or a valid split position");
          } else {
            for (int b = 0; b < 2; ++b) {
              const Node& c = *node.children[b];
              std::size_t differing = 0;
              for (std::size_t i = 0; i < l; ++i) {
                if (c.symbols[i] != node.symbols[i] || c.cardinality[i] != node.cardinality[i]) ++differing;
              }
              const bool promoted =
                  c.cardinality[p] == node.cardinality[p] + 1 &&
                  c.symbols[p] == static_cast<std::uint8_t>((node.symbols[p] << 1) | b);
              if (differing != 1 || !promoted) fail("child signature is not a one-bit promotion");
            }
            walk(*node.children[0], path);
            walk(*node.children[1], path);
          }
          if (!node.ids.empty()) fail("inner node carries payload");
        } else {
          ++report.leaves;
          if (node.overflow) ++report.overflow_leaves;
          if (!node.overflow && node.leaf_size() > tree.config().leaf_capacity) {
            fail("leaf over capacity without overflow flag (" + std::to_string(node.leaf_size()) + ")");
          }
          if (node.words.size() != node.leaf_size() * l) fail("leaf word storage size mismatch");
          for (std::size_t e = 0; e < node.leaf_size(); ++e) {
            const auto id = node.ids[e];
            ++report.entries;
            if (id >= expected_count) {
              fail("series id " + std::to_string(id) + " out of range");
            } else if (seen[id]++) {
              fail("series id " + std::to_string(id) + " indexed more than once");
            }
            for (const Node* ancestor : path) {
              if (!matches_signature(node.word(e), *ancestor, bits)) {
                fail("series id " + std::to_string(id) + " violates prefix containment");
                break;
              }
            }
          }
        }
        path.pop_back();
      };

  std::vector<const Node*> path;
  for (const auto& [key, child] : tree.root()) walk(*child, path);

  if (report.entries != tree.size()) fail("entry count differs from tree size");
  const auto missing = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0));
  if (missing) fail(std::to_string(missing) + " series ids are missing from the index");
  return report;
}

AuditReport audit_lower_bounds(const IndexTree& tree, const Summarizer& summarizer,
                               const Dataset& data, const Dataset& queries, std::size_t samples,
                               std::uint64_t seed, double tolerance) {
  AuditReport report;
  if (tree.empty() || queries.empty()) return report;

  std::vector<std::vector<const Node*>> paths;
  std::vector<std::pair<std::size_t, std::size_t>> entries;  // (path, slot)
  for_each_leaf(tree, [&](std::span<const Node* const> path) {
    const Node& leaf = *path.back();
    for (std::size_t e = 0; e < leaf.leaf_size(); ++e) entries.emplace_back(paths.size(), e);
    paths.emplace_back(path.begin(), path.end());
  });

  const auto& table = summarizer.table();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_query(0, queries.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_entry(0, entries.size() - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto q = pick_query(rng);
    const auto [path_index, slot] = entries[pick_entry(rng)];
    const auto& path = paths[path_index];
    const Node& leaf = *path.back();
    const auto projection = summarizer.project(queries.series(q));

    double previous = 0.0;
    bool ok = true;
    for (const Node* node : path) {
      const double lb = node_lower_bound(projection, *node, table);
      if (lb < previous) ok = false;
      previous = lb;
    }
    const double word_lb = lower_bound(projection, leaf.word(slot), table);
    const double ed = euclidean_early_abandon(queries.series(q), data.series(leaf.ids[slot]));
    if (word_lb < previous || word_lb > ed + tolerance) ok = false;
    if (!ok && report.errors.size() < 32) {
      report.errors.push_back("lower-bound chain violated for query " + std::to_string(q) +
                              " and series " + std::to_string(leaf.ids[slot]));
    }
    ++report.chains_checked;
  }
  return report;
}

}  // namespace sofa
