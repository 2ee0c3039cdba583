#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sofa/core.hpp"
#include "sofa/index.hpp"
#include "sofa/query.hpp"
#include "sofa/summarizer.hpp"

namespace sofa {

/// A lower bound exceeded the true distance it bounds.
class LowerBoundViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Any TLB value above this is a lower-bound violation.
inline constexpr double kTlbCeiling = 1.0 + 1e-6;

struct TlbOptions {
  /// Dataset series sampled per run; every query is paired with each of them.
  std::size_t pair_budget = 1000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct TlbResult {
  double mean = 0.0;
  double max = 0.0;
  std::size_t pairs = 0;
  /// Pairs dropped because their Euclidean distance was zero.
  std::size_t skipped = 0;
};

/// Mean of sqrt(LBD) / ED over query x sampled-series pairs. Pairs whose
/// squared distance is numerically zero (<= 1e-12) are skipped. Throws
/// std::invalid_argument when no pair remains and LowerBoundViolation when a
/// ratio exceeds kTlbCeiling.
TlbResult tlb(const Summarizer& summarizer, const Dataset& data, const Dataset& queries,
              const TlbOptions& options = {});

/// Summarization methods compared in the TLB grid.
enum class TlbMethod { sfa_ew, sfa_ed, isax };

std::string to_string(TlbMethod method);
/// Accepts "sfa-ew", "sfa-ed", "isax" (also "sax").
TlbMethod parse_tlb_method(const std::string& text);

struct TlbGridOptions {
  std::vector<TlbMethod> methods{TlbMethod::sfa_ew, TlbMethod::sfa_ed, TlbMethod::isax};
  std::vector<std::size_t> alphabets{4, 8, 16, 32, 64, 128, 256};
  std::size_t word_length = 16;
  double sampling_ratio = 0.01;
  std::size_t candidate_limit = 16;
  TlbOptions pairs;
};

struct TlbRow {
  std::string method;
  std::size_t alphabet_size = 0;
  std::size_t word_length = 0;
  double tlb = 0.0;
  std::size_t pairs = 0;
};

/// Learns one summarizer for the method on `data`.
Summarizer make_summarizer(TlbMethod method, const Dataset& data, std::size_t word_length,
                           std::size_t alphabet_size, double sampling_ratio,
                           std::size_t candidate_limit, std::uint64_t seed);

/// One row per (method, alphabet), methods outermost.
std::vector<TlbRow> tlb_grid(const Dataset& data, const Dataset& queries,
                             const TlbGridOptions& options);

struct PruningReport {
  /// Mean over queries of 1 - exact_distance_count / N.
  double mean_pruning = 0.0;
  double mean_exact_distances = 0.0;
  std::size_t queries = 0;
};

PruningReport pruning_power(const KnnSearcher& engine, const Dataset& queries, std::size_t k,
                            std::size_t workers);

struct IndexStats {
  std::size_t entries = 0;
  std::size_t root_fanout = 0;
  std::size_t inner_nodes = 0;
  std::size_t leaves = 0;
  std::size_t empty_leaves = 0;
  std::size_t overflow_leaves = 0;
  /// Leaf depth (root child = 1) -> number of leaves.
  std::map<std::size_t, std::size_t> depth_histogram;
  std::size_t max_depth = 0;
  double mean_depth = 0.0;
  /// Payload / capacity over non-empty, non-overflow leaves.
  double mean_fill = 0.0;
  double max_fill = 0.0;
};

IndexStats index_stats(const IndexTree& tree);

struct TimingSummary {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Throws std::invalid_argument for an empty sample.
TimingSummary summarize_times(std::span<const double> values);

struct BenchReport {
  double learn_ms = 0.0;
  double transform_ms = 0.0;
  double build_ms = 0.0;
  double total_ms = 0.0;
  IndexStats shape;
  std::vector<double> query_ms;
};

/// Seconds on the monotonic clock since an arbitrary epoch.
double monotonic_seconds();

struct QueryRow {
  std::size_t query = 0;
  std::size_t rank = 0;
  std::uint64_t series_id = 0;
  double distance = 0.0;
  double time_ms = 0.0;
};

/// Header: query_idx,rank,series_id,distance,time_ms. Rank starts at 1;
/// distances are unsquared and printed with 17 significant digits.
void write_query_csv(std::ostream& out, std::span<const QueryRow> rows);
/// Header: method,alphabet,word_length,tlb,pairs.
void write_tlb_csv(std::ostream& out, std::span<const TlbRow> rows);
/// Header: metric,value. Phase times in milliseconds plus shape statistics.
void write_build_csv(std::ostream& out, const BenchReport& report);

void print_tlb_table(std::ostream& out, std::span<const TlbRow> rows);
void print_build_report(std::ostream& out, const BenchReport& report);

}  // namespace sofa
