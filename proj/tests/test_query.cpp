#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "sofa/eval.hpp"
#include "sofa/query.hpp"
#include "sofa/sfa.hpp"
#include "support.hpp"

using namespace sofa;

namespace {

// Sorts every distance and keeps the k smallest.
std::vector<double> brute_force(const Dataset& data, std::span<const float> q, std::size_t k) {
  std::vector<double> d(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) d[i] = euclidean_early_abandon(q, data.series(i));
  std::sort(d.begin(), d.end());
  d.resize(k);
  return d;
}

std::vector<double> distances(const std::vector<Neighbor>& r) {
  std::vector<double> out;
  for (const auto& n : r) out.push_back(n.squared_distance);
  return out;
}

Summarizer make(SummarizerKind kind, const Dataset& data) {
  if (kind == SummarizerKind::sax) return Summarizer(SaxModel(data.length(), 16, 256));
  SfaOptions o;
  o.sampling_ratio = 0.05;
  return Summarizer(learn_mcb(data, o));
}

IndexConfig config_with(std::size_t capacity, std::size_t workers) {
  IndexConfig c;
  c.leaf_capacity = capacity;
  c.workers = workers;
  return c;
}

}  // namespace

TEST_SUITE("query") {
  TEST_CASE("top-k keeps the k smallest with strict acceptance") {
    TopK top(3);
    CHECK(top.threshold() == kInfinity);
    CHECK(top.offer(5.0, 1));
    CHECK(top.offer(3.0, 2));
    CHECK(top.offer(4.0, 3));
    CHECK(top.threshold() == 5.0);
    CHECK_FALSE(top.offer(5.0, 4));
    CHECK(top.offer(1.0, 5));
    CHECK(top.threshold() == 4.0);
    const auto s = top.sorted();
    CHECK(s == std::vector<Neighbor>{{5, 1.0}, {2, 3.0}, {3, 4.0}});
    CHECK_THROWS(TopK(0));
  }

  TEST_CASE("parallel scan matches brute force for any worker count") {
    const auto data = test::random_dataset(3000, 64, 2);
    const auto queries = test::random_dataset(10, 64, 3);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto reference = parallel_scan_knn(data, queries.series(q), 20, 1);
      CHECK(distances(reference) == brute_force(data, queries.series(q), 20));
      for (std::size_t w : {2u, 4u, 8u}) CHECK(parallel_scan_knn(data, queries.series(q), 20, w) == reference);
    }
    CHECK(parallel_scan_knn(data, data.series(42), 1, 3)[0] == Neighbor{42, 0.0});
    CHECK_THROWS_AS(parallel_scan_knn(data, queries.series(0), 3001, 1), std::invalid_argument);
    CHECK_THROWS_AS(parallel_scan_knn(data, data.series(0).first(10), 1, 1), std::invalid_argument);
  }

  TEST_CASE("exact search equals the scan oracle") {
    for (auto profile : {Profile::smooth, Profile::square_wave, Profile::random_walk}) {
      const auto data = test::profile_dataset(profile, 8000, 128, 10);
      const auto queries = test::profile_dataset(profile, 15, 128, 11);
      for (auto kind : {SummarizerKind::sfa, SummarizerKind::sax}) {
        const auto summarizer = make(kind, data);
        const auto tree = build_index(data, summarizer, config_with(200, 2));
        const IndexSearcher engine(data, tree, summarizer);
        for (std::size_t q = 0; q < queries.size(); ++q) {
          for (std::size_t k : {1u, 5u, 50u}) {
            const auto oracle = parallel_scan_knn(data, queries.series(q), k, 1);
            for (std::size_t w : {1u, 3u}) {
              const auto got = engine.exact_knn(queries.series(q), {.k = k, .workers = w});
              CHECK_MESSAGE(distances(got) == distances(oracle), to_string(profile), " ",
                            to_string(kind), " k=", k, " w=", w);
            }
          }
        }
      }
    }
  }

  TEST_CASE("k equal to N returns every series") {
    const auto data = test::random_dataset(300, 64, 4);
    const auto queries = test::random_dataset(3, 64, 5);
    const auto summarizer = make(SummarizerKind::sfa, data);
    const auto tree = build_index(data, summarizer, config_with(16, 1));
    const IndexSearcher engine(data, tree, summarizer);
    const auto all = engine.exact_knn(queries.series(0), {.k = 300, .workers = 2});
    CHECK(distances(all) == brute_force(data, queries.series(0), 300));
    CHECK_THROWS_AS(engine.exact_knn(queries.series(0), {.k = 301}), std::invalid_argument);
  }

  TEST_CASE("indexed query finds itself at distance zero") {
    const auto data = test::profile_dataset(Profile::noisy, 4000, 64, 6);
    for (auto kind : {SummarizerKind::sfa, SummarizerKind::sax}) {
      const auto summarizer = make(kind, data);
      const auto tree = build_index(data, summarizer, config_with(64, 1));
      const IndexSearcher engine(data, tree, summarizer);
      for (std::size_t id : {0u, 999u, 3999u}) {
        const auto approx = engine.approximate_search(data.series(id));
        CHECK(approx.bsf == 0.0);
        const auto exact = engine.exact_knn(data.series(id), {.k = 1, .workers = 2});
        CHECK(exact[0].squared_distance == 0.0);
      }
    }
  }

  TEST_CASE("approximate answers never beat the exact one") {
    const auto data = test::profile_dataset(Profile::random_walk, 5000, 64, 7);
    const auto queries = test::profile_dataset(Profile::random_walk, 30, 64, 8);
    const auto summarizer = make(SummarizerKind::sfa, data);
    const auto tree = build_index(data, summarizer, config_with(50, 1));
    const IndexSearcher engine(data, tree, summarizer);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto approx = engine.approximate_search(queries.series(q));
      const auto exact = parallel_scan_knn(data, queries.series(q), 1, 1);
      CHECK(approx.bsf >= exact[0].squared_distance);
    }
  }

  TEST_CASE("single-leaf tree: the approximate answer is exact") {
    // Phase-jittered sine waves share one PAA sign pattern, hence one root key.
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<float> raw;
    for (int i = 0; i < 40; ++i) {
      for (int t = 0; t < 64; ++t) {
        raw.push_back(static_cast<float>(std::sin(2 * std::numbers::pi * t / 64.0 + 0.01 * i) + noise(rng)));
      }
    }
    const auto data = Dataset::normalize(raw, 64);
    const auto queries = test::random_dataset(5, 64, 10);
    const Summarizer sax(SaxModel(64, 4, 2));
    const auto tree = build_index(data, sax, config_with(1000, 1));
    REQUIRE(tree.root().size() == 1);
    const IndexSearcher engine(data, tree, sax);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      CHECK(engine.approximate_search(queries.series(q), 3).neighbors ==
            parallel_scan_knn(data, queries.series(q), 3, 1));
    }
  }

  TEST_CASE("empty tree has no approximate answer") {
    const Dataset empty = Dataset::from_normalized({}, 64);
    const Summarizer sax(SaxModel(64, 8, 256));
    const auto tree = build_index(empty, sax, config_with(10, 1));
    const IndexSearcher engine(empty, tree, sax);
    const std::vector<float> q(64, 0.0f);
    const auto approx = engine.approximate_search(q);
    CHECK(approx.bsf == kInfinity);
    CHECK(approx.leaf == nullptr);
  }

  TEST_CASE("pruning is sound and the BSF only decreases") {
    const auto data = test::profile_dataset(Profile::smooth, 20000, 128, 12);
    const auto queries = test::profile_dataset(Profile::smooth, 20, 128, 13);
    const auto summarizer = make(SummarizerKind::sfa, data);
    const auto tree = build_index(data, summarizer, config_with(200, 2));
    const IndexSearcher engine(data, tree, summarizer);
    std::size_t exact_total = 0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      QueryStats stats;
      const auto result = engine.exact_knn(queries.series(q), {.k = 5, .workers = 3, .record_trace = true}, &stats);
      const double final_bsf = result.back().squared_distance;
      for (const auto& e : stats.prune_log) {
        CHECK(e.lower_bound >= e.bsf);
        CHECK(final_bsf <= e.lower_bound);
      }
      for (std::size_t i = 1; i < stats.bsf_trace.size(); ++i) CHECK(stats.bsf_trace[i] < stats.bsf_trace[i - 1]);
      CHECK(stats.approximate_bsf >= final_bsf);
      exact_total += stats.exact_distance_count;
    }
    const double fraction = static_cast<double>(exact_total) / (20.0 * 20000.0);
    MESSAGE("smooth corpus: exact distances computed for ", fraction * 100.0, "% of the series");
    CHECK(fraction < 0.2);
  }

  TEST_CASE("pruning power of the scan is zero and of an identical query is high") {
    const auto data = test::profile_dataset(Profile::smooth, 5000, 128, 14);
    const ScanSearcher scan(data);
    const auto queries = data.subset(std::vector<std::size_t>{5, 50, 500});
    CHECK(pruning_power(scan, queries, 1, 2).mean_pruning == 0.0);
    const auto summarizer = make(SummarizerKind::sfa, data);
    const auto tree = build_index(data, summarizer, config_with(50, 1));
    const IndexSearcher engine(data, tree, summarizer);
    CHECK(pruning_power(engine, queries, 1, 1).mean_pruning > 0.9);
  }

  TEST_CASE("square waves: SFA computes fewer exact distances than SAX") {
    const auto data = test::profile_dataset(Profile::square_wave, 10000, 256, 15);
    const auto queries = test::profile_dataset(Profile::square_wave, 10, 256, 16);
    const auto sfa = make(SummarizerKind::sfa, data);
    const auto sax = make(SummarizerKind::sax, data);
    const auto sfa_tree = build_index(data, sfa, config_with(200, 1));
    const auto sax_tree = build_index(data, sax, config_with(200, 1));
    const auto a = pruning_power(IndexSearcher(data, sfa_tree, sfa), queries, 1, 1);
    const auto b = pruning_power(IndexSearcher(data, sax_tree, sax), queries, 1, 1);
    MESSAGE("pruning sfa ", a.mean_pruning, " sax ", b.mean_pruning);
    CHECK(a.mean_pruning >= b.mean_pruning);
  }
}
