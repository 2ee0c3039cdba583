#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

#include "sofa/datagen.hpp"
#include "sofa/dataset_io.hpp"
#include "sofa/eval.hpp"
#include "sofa/index.hpp"
#include "sofa/query.hpp"
#include "sofa/serialize.hpp"
#include "sofa/sfa.hpp"

namespace sofa::cli {

namespace {

struct GenArgs {
  std::string profile = "smooth";
  std::size_t count = 1000;
  std::size_t length = 256;
  std::uint64_t seed = 0;
  std::string out;
};

struct BuildArgs {
  std::string data;
  std::size_t length = 0;
  std::size_t count = 0;
  std::string summarizer = "sfa";
  std::size_t word_length = 16;
  std::size_t alphabet = 256;
  double sample = 0.01;
  std::string binning = "ew";
  std::size_t candidate_limit = 16;
  std::size_t leaf_size = 20000;
  int initial_cardinality = 1;
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string model_out;
  std::string report;
  bool audit = false;
};

struct QueryArgs {
  std::string index;
  std::string data;
  std::string queries;
  std::size_t length = 0;
  std::size_t k = 1;
  std::size_t workers = 0;
  std::string out;
  bool audit = false;
};

struct TlbArgs {
  std::string data;
  std::string queries;
  std::size_t length = 0;
  std::string methods = "sfa-ew,sfa-ed,isax";
  std::string alphabets = "4..256";
  std::size_t word_length = 16;
  double sample = 0.01;
  std::size_t candidate_limit = 16;
  std::size_t pairs = 1000;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string out;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > start) parts.push_back(text.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::size_t resolve_workers(std::size_t requested) {
  return requested ? requested : default_workers();
}

/// Writes to the file when a path is given, otherwise to `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
    if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
    stream_ = file_.get();
  }
  std::ostream& stream() { return *stream_; }
  void close() {
    if (!file_) return;
    file_->close();
    if (!*file_) throw std::runtime_error("failed writing output file");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

/// Normalized queries of the same length as the indexed data.
Dataset load_queries(const std::string& path, std::size_t length) {
  const auto raw = read_raw_f32(path, length);
  if (raw.empty()) throw std::runtime_error(path + ": no query series");
  return Dataset::normalize(raw, length);
}

int report_audit(const AuditReport& report, const char* what, std::ostream& err) {
  for (const auto& e : report.errors) err << what << " audit: " << e << '\n';
  return report.ok() ? 0 : kAuditFailed;
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const auto values = generate_series(parse_profile(a.profile), a.count, a.length, a.seed);
  write_raw_f32(a.out, values);
  out << fmt::format("wrote {} {} series of length {} to {}\n", a.count,
                     to_string(parse_profile(a.profile)), a.length, a.out);
  return 0;
}

int cmd_build(const BuildArgs& a, std::ostream& out, std::ostream& err) {
  const std::size_t workers = resolve_workers(a.workers);
  const auto raw = read_raw_f32(a.data, a.length, a.count);
  if (raw.empty()) throw std::runtime_error(a.data + ": no series");
  const auto print = fingerprint(raw, a.length);
  const double t0 = monotonic_seconds();
  const auto data = Dataset::normalize(raw, a.length);

  const double learn_start = monotonic_seconds();
  const auto kind = parse_summarizer(a.summarizer);
  std::optional<Summarizer> summarizer;
  if (kind == SummarizerKind::sfa) {
    SfaOptions options;
    options.word_length = a.word_length;
    options.alphabet_size = a.alphabet;
    options.sampling_ratio = a.sample;
    options.binning = parse_binning(a.binning);
    options.candidate_limit = a.candidate_limit;
    options.seed = a.seed;
    summarizer.emplace(learn_mcb(data, options));
  } else {
    summarizer.emplace(SaxModel(a.length, a.word_length, a.alphabet));
  }
  const double learn_end = monotonic_seconds();

  IndexConfig config;
  config.leaf_capacity = a.leaf_size;
  config.initial_cardinality = a.initial_cardinality;
  config.workers = workers;
  config.summarizer = kind;
  BuildTimings timings;
  const auto tree = build_index(data, *summarizer, config, &timings);
  const double t1 = monotonic_seconds();

  // Write to a temporary name first so a failed build never leaves a
  // truncated snapshot behind.
  const auto snapshot = serialize_index(tree, *summarizer, print);
  const std::filesystem::path target(a.out);
  auto staging = target;
  staging += ".partial";
  write_file(staging, snapshot);
  std::filesystem::rename(staging, target);
  if (!a.model_out.empty()) write_file(a.model_out, serialize_model(*summarizer));

  BenchReport report;
  report.learn_ms = 1e3 * (learn_end - learn_start);
  report.transform_ms = 1e3 * timings.transform_seconds;
  report.build_ms = 1e3 * timings.build_seconds;
  report.total_ms = 1e3 * (t1 - t0);
  report.shape = index_stats(tree);
  print_build_report(out, report);
  if (summarizer->sfa() && summarizer->sfa()->adjusted()) {
    err << "warning: collapsed breakpoints were nudged apart (low-variance coefficients)\n";
  }
  if (!a.report.empty()) {
    Sink sink(a.report, out);
    write_build_csv(sink.stream(), report);
    sink.close();
  }

  if (!a.audit) return 0;
  const auto structure = audit(tree, data.size());
  std::vector<std::size_t> probe(std::min<std::size_t>(64, data.size()));
  std::mt19937_64 rng(a.seed);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  std::sample(all.begin(), all.end(), probe.begin(), probe.size(), rng);
  const auto chains = audit_lower_bounds(tree, *summarizer, data, data.subset(probe), 1000, a.seed);
  out << fmt::format("audit: {} entries, {} leaves, {} chains checked\n", structure.entries,
                     structure.leaves, chains.chains_checked);
  const int s = report_audit(structure, "structure", err);
  const int c = report_audit(chains, "lower-bound", err);
  return s ? s : c;
}

void emit_results(std::ostream& out, const std::vector<std::vector<Neighbor>>& results,
                  const std::vector<double>& times) {
  std::vector<QueryRow> rows;
  for (std::size_t q = 0; q < results.size(); ++q) {
    for (std::size_t r = 0; r < results[q].size(); ++r) {
      rows.push_back({q, r + 1, results[q][r].id, results[q][r].distance(), times[q]});
    }
  }
  write_query_csv(out, rows);
}

int cmd_query(const QueryArgs& a, std::ostream& out, std::ostream& err) {
  const std::size_t workers = resolve_workers(a.workers);
  auto snapshot = deserialize_index(read_file(a.index));
  const std::size_t length = snapshot.data.length;
  if (a.length && a.length != length) {
    throw std::runtime_error(fmt::format("--n {} does not match the index series length {}", a.length,
                                         length));
  }
  const auto raw = read_raw_f32(a.data, length);
  if (fingerprint(raw, length) != snapshot.data) {
    throw std::runtime_error("dataset " + a.data + " does not match the one the index was built from");
  }
  const auto data = Dataset::normalize(raw, length);
  const auto queries = load_queries(a.queries, length);
  if (a.k > data.size()) {
    throw std::runtime_error(fmt::format("k = {} exceeds the number of series ({})", a.k, data.size()));
  }

  IndexSearcher engine(data, snapshot.tree, snapshot.summarizer);
  std::vector<std::vector<Neighbor>> results(queries.size());
  std::vector<double> times(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const double start = monotonic_seconds();
    results[q] = engine.exact_knn(queries.series(q), {.k = a.k, .workers = workers});
    times[q] = 1e3 * (monotonic_seconds() - start);
  }
  Sink sink(a.out, out);
  emit_results(sink.stream(), results, times);
  sink.close();
  if (!a.out.empty()) {
    const auto t = summarize_times(times);
    out << fmt::format("{} queries, k = {}: mean {:.3f} ms, median {:.3f} ms\n", queries.size(), a.k,
                       t.mean, t.median);
  }

  if (!a.audit) return 0;
  const auto chains = audit_lower_bounds(snapshot.tree, snapshot.summarizer, data, queries, 1000, 0);
  return report_audit(chains, "lower-bound", err);
}

int cmd_scan(const QueryArgs& a, std::ostream& out) {
  const std::size_t workers = resolve_workers(a.workers);
  const auto raw = read_raw_f32(a.data, a.length);
  if (raw.empty()) throw std::runtime_error(a.data + ": no series");
  const auto data = Dataset::normalize(raw, a.length);
  const auto queries = load_queries(a.queries, a.length);
  if (a.k > data.size()) {
    throw std::runtime_error(fmt::format("k = {} exceeds the number of series ({})", a.k, data.size()));
  }
  std::vector<std::vector<Neighbor>> results(queries.size());
  std::vector<double> times(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const double start = monotonic_seconds();
    results[q] = parallel_scan_knn(data, queries.series(q), a.k, workers);
    times[q] = 1e3 * (monotonic_seconds() - start);
  }
  Sink sink(a.out, out);
  emit_results(sink.stream(), results, times);
  sink.close();
  return 0;
}

int cmd_tlb(const TlbArgs& a, std::ostream& out) {
  TlbGridOptions options;
  options.methods.clear();
  for (const auto& m : split_list(a.methods)) options.methods.push_back(parse_tlb_method(m));
  if (options.methods.empty()) throw std::invalid_argument("--methods is empty");
  options.alphabets = parse_alphabets(a.alphabets);
  options.word_length = a.word_length;
  options.sampling_ratio = a.sample;
  options.candidate_limit = a.candidate_limit;
  options.pairs.pair_budget = a.pairs;
  options.pairs.seed = a.seed;
  options.pairs.workers = resolve_workers(a.workers);

  const auto raw = read_raw_f32(a.data, a.length);
  if (raw.empty()) throw std::runtime_error(a.data + ": no series");
  const auto data = Dataset::normalize(raw, a.length);
  const auto queries = load_queries(a.queries, a.length);
  const auto rows = tlb_grid(data, queries, options);

  Sink sink(a.out, out);
  write_tlb_csv(sink.stream(), rows);
  sink.close();
  if (!a.out.empty()) print_tlb_table(out, rows);
  return 0;
}

}  // namespace

std::size_t default_workers() {
  if (const char* env = std::getenv("SOFA_WORKERS")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::size_t> parse_alphabets(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw std::invalid_argument("bad alphabet size '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  std::vector<std::size_t> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = number(text.substr(0, dots));
    const auto hi = number(text.substr(dots + 2));
    if (lo < 2 || (lo & (lo - 1)) || hi < lo) {
      throw std::invalid_argument("alphabet range must run between powers of two, got '" + text + "'");
    }
    for (std::size_t a = lo; a <= hi; a *= 2) out.push_back(a);
  } else {
    for (const auto& part : split_list(text)) out.push_back(number(part));
  }
  if (out.empty()) throw std::invalid_argument("--alphabets is empty");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact similarity search over z-normalized data series"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic raw-f32 corpus");
  gen_cmd->add_option("--profile", gen.profile, "smooth | noisy | square-wave | random-walk")
      ->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Number of series")->capture_default_str();
  gen_cmd->add_option("--n", gen.length, "Series length")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output file")->required();

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "Learn a summarization and build an index snapshot");
  build_cmd->add_option("--data", build.data, "Raw f32 dataset")->required();
  build_cmd->add_option("--n", build.length, "Series length")->required()->check(CLI::PositiveNumber);
  build_cmd->add_option("--count", build.count, "Expected number of series (0 = infer)");
  build_cmd->add_option("--summarizer", build.summarizer, "sfa | sax")->capture_default_str();
  build_cmd->add_option("--l", build.word_length, "Word length")->capture_default_str();
  build_cmd->add_option("--alphabet", build.alphabet, "Alphabet size")->capture_default_str();
  build_cmd->add_option("--sample", build.sample, "Learning sample ratio")->capture_default_str();
  build_cmd->add_option("--binning", build.binning, "ew | ed")->capture_default_str();
  build_cmd->add_option("--candidates", build.candidate_limit,
                        "Lowest Fourier coefficients considered for selection")
      ->capture_default_str();
  build_cmd->add_option("--leaf-size", build.leaf_size, "Leaf capacity")->capture_default_str();
  build_cmd->add_option("--root-bits", build.initial_cardinality,
                        "Bits per position in the root key")
      ->capture_default_str();
  build_cmd->add_option("--workers", build.workers, "Worker threads (default: SOFA_WORKERS or cores)");
  build_cmd->add_option("--seed", build.seed)->capture_default_str();
  build_cmd->add_option("--out", build.out, "Index snapshot path")->required();
  build_cmd->add_option("--model-out", build.model_out, "Also write the model blob here");
  build_cmd->add_option("--report", build.report, "Build report CSV path");
  build_cmd->add_flag("--audit", build.audit, "Run structural and lower-bound audits");

  QueryArgs query;
  auto* query_cmd = app.add_subcommand("query", "Exact k-NN queries against an index snapshot");
  query_cmd->add_option("--index", query.index)->required();
  query_cmd->add_option("--data", query.data)->required();
  query_cmd->add_option("--queries", query.queries)->required();
  query_cmd->add_option("--n", query.length, "Series length (checked against the index)");
  query_cmd->add_option("--k", query.k)->capture_default_str()->check(CLI::PositiveNumber);
  query_cmd->add_option("--workers", query.workers);
  query_cmd->add_option("--out", query.out, "Result CSV (default: stdout)");
  query_cmd->add_flag("--audit", query.audit, "Check lower-bound chains for the queries");

  QueryArgs scan;
  auto* scan_cmd = app.add_subcommand("scan", "Exact k-NN by parallel linear scan");
  scan_cmd->add_option("--data", scan.data)->required();
  scan_cmd->add_option("--queries", scan.queries)->required();
  scan_cmd->add_option("--n", scan.length)->required()->check(CLI::PositiveNumber);
  scan_cmd->add_option("--k", scan.k)->capture_default_str()->check(CLI::PositiveNumber);
  scan_cmd->add_option("--workers", scan.workers);
  scan_cmd->add_option("--out", scan.out, "Result CSV (default: stdout)");

  TlbArgs tlb_args;
  auto* tlb_cmd = app.add_subcommand("tlb", "Tightness of the lower bound per method and alphabet");
  tlb_cmd->add_option("--data", tlb_args.data)->required();
  tlb_cmd->add_option("--queries", tlb_args.queries)->required();
  tlb_cmd->add_option("--n", tlb_args.length)->required()->check(CLI::PositiveNumber);
  tlb_cmd->add_option("--methods", tlb_args.methods)->capture_default_str();
  tlb_cmd->add_option("--alphabets", tlb_args.alphabets)->capture_default_str();
  tlb_cmd->add_option("--l", tlb_args.word_length)->capture_default_str();
  tlb_cmd->add_option("--sample", tlb_args.sample)->capture_default_str();
  tlb_cmd->add_option("--candidates", tlb_args.candidate_limit)->capture_default_str();
  tlb_cmd->add_option("--pairs", tlb_args.pairs, "Dataset series sampled per query")
      ->capture_default_str();
  tlb_cmd->add_option("--seed", tlb_args.seed)->capture_default_str();
  tlb_cmd->add_option("--workers", tlb_args.workers);
  tlb_cmd->add_option("--out", tlb_args.out, "TLB CSV (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*build_cmd) return cmd_build(build, out, err);
    if (*query_cmd) return cmd_query(query, out, err);
    if (*scan_cmd) return cmd_scan(scan, out);
    if (*tlb_cmd) return cmd_tlb(tlb_args, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace sofa::cli
