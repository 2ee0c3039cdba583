#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "sofa/eval.hpp"
#include "sofa/index.hpp"
#include "sofa/sfa.hpp"
#include "support.hpp"

using namespace sofa;

namespace {

IndexConfig config_with(std::size_t capacity, std::size_t workers = 1, int root_bits = 1) {
  IndexConfig c;
  c.leaf_capacity = capacity;
  c.workers = workers;
  c.initial_cardinality = root_bits;
  return c;
}

std::vector<std::uint8_t> random_word(std::mt19937_64& rng, std::size_t l) {
  std::vector<std::uint8_t> w(l);
  for (auto& s : w) s = static_cast<std::uint8_t>(rng() & 0xff);
  return w;
}

// Leaf payloads keyed by their full signature, for comparing tree content.
std::map<std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>, std::vector<std::uint64_t>>
leaf_contents(const IndexTree& tree) {
  std::map<std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>, std::vector<std::uint64_t>> out;
  for_each_leaf(tree, [&](std::span<const Node* const> path) {
    const Node& leaf = *path.back();
    out[{leaf.symbols, leaf.cardinality}] = leaf.ids;
  });
  return out;
}

Summarizer sfa_summarizer(const Dataset& data, std::size_t l = 16, std::size_t a = 256) {
  SfaOptions o;
  o.word_length = l;
  o.alphabet_size = a;
  o.sampling_ratio = 0.1;
  return Summarizer(learn_mcb(data, o));
}

}  // namespace

TEST_SUITE("index") {
  TEST_CASE("configuration checks") {
    CHECK_THROWS_AS(IndexTree(16, 8, config_with(0)), std::invalid_argument);
    CHECK_THROWS_AS(IndexTree(16, 8, config_with(10, 1, 0)), std::invalid_argument);
    CHECK_THROWS_AS(IndexTree(16, 4, config_with(10, 1, 5)), std::invalid_argument);
    CHECK_NOTHROW(IndexTree(16, 8, config_with(10, 1, 8)));
  }

  TEST_CASE("first insert creates a root child") {
    IndexTree tree(4, 8, config_with(10));
    const std::vector<std::uint8_t> w{0x80, 0x10, 0xff, 0x00};
    tree.insert(0, w);
    REQUIRE(tree.root().size() == 1);
    const auto& [key, child] = *tree.root().begin();
    CHECK(key == std::string({1, 0, 1, 0}));
    CHECK(child->is_leaf());
    CHECK(child->cardinality == std::vector<std::uint8_t>{1, 1, 1, 1});
    CHECK(tree.size() == 1);
  }

  TEST_CASE("split picks the balanced position") {
    // Position 3's second bit splits 50/50; every other position is uniform.
    Node leaf;
    leaf.symbols.assign(4, 0);
    leaf.cardinality.assign(4, 1);
    for (std::uint64_t i = 0; i < 10; ++i) {
      leaf.ids.push_back(i);
      const std::uint8_t p3 = i % 2 ? 0x40 : 0x00;
      for (std::uint8_t s : {std::uint8_t{0x00}, std::uint8_t{0x00}, std::uint8_t{0x00}, p3}) leaf.words.push_back(s);
    }
    const SplitParams params{4, 8, 9};
    CHECK(choose_split_position(leaf, params) == 3);
    split_leaf(leaf, params);
    REQUIRE_FALSE(leaf.is_leaf());
    CHECK(leaf.split_position == 3);
    CHECK(leaf.children[0]->leaf_size() == 5);
    CHECK(leaf.children[1]->leaf_size() == 5);
    CHECK(leaf.children[1]->symbols[3] == 1);
    CHECK(leaf.children[1]->cardinality[3] == 2);
  }

  TEST_CASE("split choice is optimal against an exhaustive scan") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t l = 1 + rng() % 12;
      Node leaf;
      leaf.symbols.assign(l, 0);
      leaf.cardinality.resize(l);
      for (auto& c : leaf.cardinality) c = static_cast<std::uint8_t>(1 + rng() % 8);
      const std::size_t n = 1 + rng() % 60;
      for (std::size_t i = 0; i < n; ++i) {
        leaf.ids.push_back(i);
        for (std::size_t p = 0; p < l; ++p) {
          // Skewed bits make some positions clearly better than others.
          const bool biased = rng() % (p + 2) != 0;
          leaf.words.push_back(static_cast<std::uint8_t>(biased ? rng() & 0x0f : rng() & 0xff));
        }
      }
      const SplitParams params{l, 8, 1};
      long best = -1;
      std::size_t best_imbalance = 0;
      for (std::size_t p = 0; p < l; ++p) {
        if (leaf.cardinality[p] >= 8) continue;
        std::size_t ones = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const std::uint8_t bit = static_cast<std::uint8_t>(leaf.words[i * l + p] << leaf.cardinality[p]) >> 7;
          ones += bit;
        }
        const std::size_t imbalance = ones > n - ones ? 2 * ones - n : n - 2 * ones;
        if (best < 0 || imbalance < best_imbalance) {
          best = static_cast<long>(p);
          best_imbalance = imbalance;
        }
      }
      CHECK(choose_split_position(leaf, params) == best);
    }
  }

  TEST_CASE("identical words end in an overflow leaf") {
    IndexTree tree(4, 8, config_with(5));
    const std::vector<std::uint8_t> w{1, 2, 3, 4};
    for (std::uint64_t i = 0; i < 6; ++i) tree.insert(i, w);
    const auto report = audit(tree, 6);
    CHECK(report.ok());
    CHECK(report.leaves == 1);
    CHECK(report.overflow_leaves == 1);

    // A distinct word later lets the overflow leaf split.
    const std::vector<std::uint8_t> other{1, 2, 3, 5};
    tree.insert(6, other);
    const auto after = audit(tree, 7);
    CHECK(after.ok());
    CHECK(after.leaves >= 2);
  }

  TEST_CASE("all positions at full cardinality overflow") {
    IndexTree tree(1, 2, config_with(2, 1, 2));
    const std::vector<std::uint8_t> a{1}, b{1};
    for (std::uint64_t i = 0; i < 5; ++i) tree.insert(i, i % 2 ? a : b);
    CHECK(audit(tree, 5).ok());
    CHECK(audit(tree, 5).overflow_leaves == 1);
  }

  TEST_CASE("capacity plus one distinct words split once") {
    IndexTree tree(2, 8, config_with(4));
    for (std::uint64_t i = 0; i < 5; ++i) {
      const std::vector<std::uint8_t> w{static_cast<std::uint8_t>(i * 50), 0};
      tree.insert(i, w);
    }
    // Root keys split ids {0,1,2} (high bit 0) from {3,4}; add ones under a single key.
    IndexTree single(2, 8, config_with(4));
    for (std::uint64_t i = 0; i < 5; ++i) {
      const std::vector<std::uint8_t> w{static_cast<std::uint8_t>(i * 20), 0};
      single.insert(i, w);
    }
    REQUIRE(single.root().size() == 1);
    const auto& child = *single.root().begin()->second;
    REQUIRE_FALSE(child.is_leaf());
    CHECK(child.children[0]->is_leaf());
    CHECK(child.children[1]->is_leaf());
    CHECK(child.children[0]->leaf_size() + child.children[1]->leaf_size() == 5);
    CHECK(audit(single, 5).ok());
    CHECK(audit(tree, 5).ok());
  }

  TEST_CASE("random inserts keep the audit clean") {
    std::mt19937_64 rng(77);
    IndexTree tree(8, 8, config_with(50));
    for (std::uint64_t i = 0; i < 30000; ++i) {
      tree.insert(i, random_word(rng, 8));
      if ((i + 1) % 10000 == 0) CHECK(audit(tree, i + 1).ok());
    }
  }

  TEST_CASE("bulk build passes the audit and does not depend on workers") {
    const auto data = test::profile_dataset(Profile::noisy, 20000, 128, 3);
    const auto summarizer = sfa_summarizer(data);
    const auto reference = build_index(data, summarizer, config_with(100, 1));
    const auto report = audit(reference, data.size());
    CHECK(report.ok());
    CHECK(report.entries == data.size());
    const auto chains = audit_lower_bounds(reference, summarizer, data, data.subset(std::vector<std::size_t>{1, 2, 3}), 1000, 4);
    CHECK(chains.ok());
    CHECK(chains.chains_checked == 1000);
    for (std::size_t w : {2u, 3u, 4u, 8u}) {
      const auto other = build_index(data, summarizer, config_with(100, w));
      CHECK(audit(other, data.size()).ok());
      CHECK(leaf_contents(other) == leaf_contents(reference));
      CHECK(root_contents(other) == root_contents(reference));
    }
  }

  TEST_CASE("small identical corpus builds a single leaf") {
    std::vector<float> raw;
    for (int i = 0; i < 50; ++i) {
      for (int t = 0; t < 32; ++t) raw.push_back(static_cast<float>(std::sin(0.3 * t)));
    }
    const auto data = Dataset::normalize(raw, 32);
    const Summarizer sax(SaxModel(32, 8, 16));
    const auto tree = build_index(data, sax, config_with(100));
    const auto stats = index_stats(tree);
    CHECK(stats.leaves == 1);
    CHECK(stats.root_fanout == 1);
    CHECK(stats.max_depth == 1);
    CHECK(stats.entries == 50);
  }

  TEST_CASE("node lower bounds grow with depth and bound the words below") {
    const auto data = test::profile_dataset(Profile::smooth, 5000, 64, 8);
    const auto queries = test::profile_dataset(Profile::smooth, 50, 64, 9);
    for (auto kind : {SummarizerKind::sfa, SummarizerKind::sax}) {
      const auto summarizer = kind == SummarizerKind::sfa ? sfa_summarizer(data) : Summarizer(SaxModel(64, 16, 256));
      const auto tree = build_index(data, summarizer, config_with(40, 2));
      const auto report = audit_lower_bounds(tree, summarizer, data, queries, 1000, 1);
      CHECK(report.ok());

      // Root child containing the query's own word has a zero bound.
      const auto proj = summarizer.project(data.series(17));
      std::vector<std::uint8_t> word(summarizer.word_length());
      summarizer.encode(proj, word);
      const auto& child = *tree.root().at(tree.root_key(word));
      CHECK(node_lower_bound(proj, child, summarizer.table()) == 0.0);
    }
  }

  TEST_CASE("audit detects corruption") {
    const auto data = test::random_dataset(500, 64, 1);
    const Summarizer sax(SaxModel(64, 8, 256));
    auto tree = build_index(data, sax, config_with(20));
    CHECK(audit(tree, 500).ok());
    CHECK_FALSE(audit(tree, 501).ok());
    CHECK_FALSE(audit(tree, 499).ok());
  }
}
