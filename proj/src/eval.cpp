#include "sofa/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <random>

#include "sofa/distance.hpp"
#include "sofa/parallel.hpp"
#include "sofa/sax.hpp"
#include "sofa/sfa.hpp"

namespace sofa {

TlbResult tlb(const Summarizer& summarizer, const Dataset& data, const Dataset& queries,
              const TlbOptions& options) {
  if (data.empty() || queries.empty()) throw std::invalid_argument("tlb: empty dataset or query set");
  if (data.length() != summarizer.series_length() || queries.length() != data.length()) {
    throw std::invalid_argument("tlb: series length does not match the summarizer");
  }
  if (options.pair_budget == 0) throw std::invalid_argument("tlb: pair budget must be positive");

  std::vector<std::size_t> sample(std::min(options.pair_budget, data.size()));
  {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(options.seed);
    std::sample(all.begin(), all.end(), sample.begin(), sample.size(), rng);
  }

  const std::size_t l = summarizer.word_length();
  const auto& table = summarizer.table();
  std::vector<std::uint8_t> words(sample.size() * l);
  for (std::size_t s = 0; s < sample.size(); ++s) {
    const auto projection = summarizer.project(data.series(sample[s]));
    summarizer.encode(projection, {words.data() + s * l, l});
  }

  // Ratios land in fixed slots so the reduction order is independent of the
  // worker count.
  const std::size_t pairs = queries.size() * sample.size();
  std::vector<double> ratio(pairs, -1.0);
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, queries.size());
  run_workers(workers, [&](std::size_t w) {
    const auto [begin, end] = chunk_bounds(queries.size(), workers, w);
    for (std::size_t q = begin; q < end; ++q) {
      const auto query = queries.series(q);
      const auto projection = summarizer.project(query);
      for (std::size_t s = 0; s < sample.size(); ++s) {
        const double ed2 = euclidean_early_abandon(query, data.series(sample[s]));
        if (ed2 <= 1e-12) continue;
        const double lbd = lower_bound(projection, words.data() + s * l, table);
        ratio[q * sample.size() + s] = std::sqrt(lbd) / std::sqrt(ed2);
      }
    }
  });

  TlbResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    if (ratio[i] < 0.0) {
      ++result.skipped;
      continue;
    }
    if (ratio[i] > kTlbCeiling) {
      throw LowerBoundViolation(fmt::format(
          "lower bound exceeds the true distance: query {}, series {}, ratio {:.9f}",
          i / sample.size(), sample[i % sample.size()], ratio[i]));
    }
    sum += ratio[i];
    result.max = std::max(result.max, ratio[i]);
    ++result.pairs;
  }
  if (result.pairs == 0) throw std::invalid_argument("tlb: every sampled pair has zero distance");
  result.mean = sum / static_cast<double>(result.pairs);
  return result;
}

std::string to_string(TlbMethod method) {
  switch (method) {
    case TlbMethod::sfa_ew: return "sfa-ew";
    case TlbMethod::sfa_ed: return "sfa-ed";
    case TlbMethod::isax: return "isax";
  }
  return "unknown";
}

TlbMethod parse_tlb_method(const std::string& text) {
  if (text == "sfa-ew") return TlbMethod::sfa_ew;
  if (text == "sfa-ed") return TlbMethod::sfa_ed;
  if (text == "isax" || text == "sax") return TlbMethod::isax;
  throw std::invalid_argument("unknown method '" + text + "' (expected sfa-ew, sfa-ed or isax)");
}

Summarizer make_summarizer(TlbMethod method, const Dataset& data, std::size_t word_length,
                           std::size_t alphabet_size, double sampling_ratio,
                           std::size_t candidate_limit, std::uint64_t seed) {
  if (method == TlbMethod::isax) return Summarizer(SaxModel(data.length(), word_length, alphabet_size));
  SfaOptions options;
  options.word_length = word_length;
  options.alphabet_size = alphabet_size;
  options.sampling_ratio = sampling_ratio;
  options.binning = method == TlbMethod::sfa_ew ? BinningMode::equi_width : BinningMode::equi_depth;
  options.candidate_limit = candidate_limit;
  options.seed = seed;
  return Summarizer(learn_mcb(data, options));
}

std::vector<TlbRow> tlb_grid(const Dataset& data, const Dataset& queries,
                             const TlbGridOptions& options) {
  std::vector<TlbRow> rows;
  for (auto method : options.methods) {
    for (auto a : options.alphabets) {
      const auto summarizer = make_summarizer(method, data, options.word_length, a,
                                              options.sampling_ratio, options.candidate_limit,
                                              options.pairs.seed);
      const auto result = tlb(summarizer, data, queries, options.pairs);
      rows.push_back({to_string(method), a, options.word_length, result.mean, result.pairs});
    }
  }
  return rows;
}

PruningReport pruning_power(const KnnSearcher& engine, const Dataset& queries, std::size_t k,
                            std::size_t workers) {
  PruningReport report;
  if (queries.empty() || engine.size() == 0) return report;
  const double n = static_cast<double>(engine.size());
  double pruned = 0.0, exact = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    QueryStats stats;
    engine.search(queries.series(q), {.k = k, .workers = workers}, &stats);
    const double count = static_cast<double>(stats.exact_distance_count);
    exact += count;
    pruned += 1.0 - std::min(count, n) / n;
  }
  report.queries = queries.size();
  report.mean_pruning = pruned / static_cast<double>(queries.size());
  report.mean_exact_distances = exact / static_cast<double>(queries.size());
  return report;
}

IndexStats index_stats(const IndexTree& tree) {
  IndexStats stats;
  stats.root_fanout = tree.root().size();
  const double capacity = static_cast<double>(tree.config().leaf_capacity);
  std::size_t depth_sum = 0, filled = 0;
  double fill_sum = 0.0;
  for_each_leaf(tree, [&](std::span<const Node* const> path) {
    const Node& leaf = *path.back();
    const std::size_t depth = path.size();
    ++stats.leaves;
    ++stats.depth_histogram[depth];
    stats.max_depth = std::max(stats.max_depth, depth);
    depth_sum += depth;
    stats.entries += leaf.leaf_size();
    if (leaf.leaf_size() == 0) {
      ++stats.empty_leaves;
    } else if (leaf.overflow) {
      ++stats.overflow_leaves;
    } else {
      const double fill = static_cast<double>(leaf.leaf_size()) / capacity;
      fill_sum += fill;
      stats.max_fill = std::max(stats.max_fill, fill);
      ++filled;
    }
  });
  // A binary tree with L leaves under each root child has L - 1 inner nodes.
  stats.inner_nodes = stats.leaves - stats.root_fanout;
  if (stats.leaves) stats.mean_depth = static_cast<double>(depth_sum) / static_cast<double>(stats.leaves);
  if (filled) stats.mean_fill = fill_sum / static_cast<double>(filled);
  return stats;
}

TimingSummary summarize_times(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize_times: no samples");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  TimingSummary s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return s;
}

double monotonic_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void write_query_csv(std::ostream& out, std::span<const QueryRow> rows) {
  out << "query_idx,rank,series_id,distance,time_ms\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{:.17g},{:.6f}\n", r.query, r.rank, r.series_id, r.distance,
                       r.time_ms);
  }
}

void write_tlb_csv(std::ostream& out, std::span<const TlbRow> rows) {
  out << "method,alphabet,word_length,tlb,pairs\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{:.6f},{}\n", r.method, r.alphabet_size, r.word_length, r.tlb,
                       r.pairs);
  }
}

void write_build_csv(std::ostream& out, const BenchReport& report) {
  const auto& s = report.shape;
  out << "metric,value\n";
  out << fmt::format("learn_ms,{:.3f}\n", report.learn_ms);
  out << fmt::format("transform_ms,{:.3f}\n", report.transform_ms);
  out << fmt::format("build_ms,{:.3f}\n", report.build_ms);
  out << fmt::format("total_ms,{:.3f}\n", report.total_ms);
  out << fmt::format("entries,{}\n", s.entries);
  out << fmt::format("root_fanout,{}\n", s.root_fanout);
  out << fmt::format("inner_nodes,{}\n", s.inner_nodes);
  out << fmt::format("leaves,{}\n", s.leaves);
  out << fmt::format("empty_leaves,{}\n", s.empty_leaves);
  out << fmt::format("overflow_leaves,{}\n", s.overflow_leaves);
  out << fmt::format("max_depth,{}\n", s.max_depth);
  out << fmt::format("mean_depth,{:.4f}\n", s.mean_depth);
  out << fmt::format("mean_fill,{:.4f}\n", s.mean_fill);
  out << fmt::format("max_fill,{:.4f}\n", s.max_fill);
}

void print_tlb_table(std::ostream& out, std::span<const TlbRow> rows) {
  std::vector<std::size_t> alphabets;
  std::vector<std::string> methods;
  for (const auto& r : rows) {
    if (std::find(alphabets.begin(), alphabets.end(), r.alphabet_size) == alphabets.end()) {
      alphabets.push_back(r.alphabet_size);
    }
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }
  out << fmt::format("{:<8}", "method");
  for (auto a : alphabets) out << fmt::format("{:>8}", a);
  out << '\n';
  for (const auto& m : methods) {
    out << fmt::format("{:<8}", m);
    for (auto a : alphabets) {
      auto it = std::find_if(rows.begin(), rows.end(),
                             [&](const TlbRow& r) { return r.method == m && r.alphabet_size == a; });
      out << (it == rows.end() ? fmt::format("{:>8}", "-") : fmt::format("{:>8.3f}", it->tlb));
    }
    out << '\n';
  }
}

void print_build_report(std::ostream& out, const BenchReport& report) {
  const auto& s = report.shape;
  out << fmt::format("learn      {:10.1f} ms\n", report.learn_ms);
  out << fmt::format("transform  {:10.1f} ms\n", report.transform_ms);
  out << fmt::format("build      {:10.1f} ms\n", report.build_ms);
  out << fmt::format("total      {:10.1f} ms\n", report.total_ms);
  out << fmt::format("series {}  root fanout {}  leaves {} ({} overflow, {} empty)\n", s.entries,
                     s.root_fanout, s.leaves, s.overflow_leaves, s.empty_leaves);
  out << fmt::format("depth mean {:.2f} max {}  leaf fill mean {:.3f} max {:.3f}\n", s.mean_depth,
                     s.max_depth, s.mean_fill, s.max_fill);
}

}  // namespace sofa
