#include "sofa/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <optional>

namespace sofa {

namespace {

constexpr char kModelMagic[8] = {'S', 'O', 'F', 'A', 'M', 'O', 'D', 'L'};
constexpr char kIndexMagic[8] = {'S', 'O', 'F', 'A', 'I', 'N', 'D', 'X'};

class Writer {
 public:
  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + size);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { little_endian(v); }
  void u64(std::uint64_t v) { little_endian(v); }
  void f64(double v) { little_endian(std::bit_cast<std::uint64_t>(v)); }

  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  template <typename T>
  void little_endian(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::span<const std::uint8_t> bytes(std::size_t size) {
    if (size > in_.size() - pos_) throw FormatError("unexpected end of data");
    auto out = in_.subspan(pos_, size);
    pos_ += size;
    return out;
  }
  std::uint8_t u8() { return bytes(1)[0]; }
  std::uint32_t u32() { return little_endian<std::uint32_t>(); }
  std::uint64_t u64() { return little_endian<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(little_endian<std::uint64_t>()); }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  template <typename T>
  T little_endian() {
    auto b = bytes(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void expect_magic(Reader& r, const char (&magic)[8], const char* what) {
  auto got = r.bytes(8);
  if (std::memcmp(got.data(), magic, 8) != 0) throw FormatError(std::string("not a ") + what);
}

void write_node(Writer& w, const Node& node) {
  w.u8(node.is_leaf() ? 0 : 1);
  w.bytes(node.symbols.data(), node.symbols.size());
  w.bytes(node.cardinality.data(), node.cardinality.size());
  if (!node.is_leaf()) {
    w.u32(static_cast<std::uint32_t>(node.split_position));
    write_node(w, *node.children[0]);
    write_node(w, *node.children[1]);
    return;
  }
  w.u8(node.overflow ? 1 : 0);
  w.u64(node.leaf_size());
  const std::size_t l = node.symbols.size();
  for (std::size_t e = 0; e < node.leaf_size(); ++e) {
    w.u64(node.ids[e]);
    w.bytes(node.words.data() + e * l, l);
  }
}

std::unique_ptr<Node> read_node(Reader& r, std::size_t l, std::size_t& entries, int depth) {
  if (depth > 4096) throw FormatError("index node stream nested too deeply");
  auto node = std::make_unique<Node>();
  const auto kind = r.u8();
  if (kind > 1) throw FormatError("unknown node kind");
  auto symbols = r.bytes(l);
  auto cardinality = r.bytes(l);
  node->symbols.assign(symbols.begin(), symbols.end());
  node->cardinality.assign(cardinality.begin(), cardinality.end());
  if (kind == 1) {
    const auto split = r.u32();
    if (split >= l) throw FormatError("split position out of range");
    node->split_position = static_cast<int>(split);
    node->children[0] = read_node(r, l, entries, depth + 1);
    node->children[1] = read_node(r, l, entries, depth + 1);
    return node;
  }
  node->overflow = r.u8() != 0;
  const auto count = r.u64();
  if (count > r.remaining() / (8 + l)) throw FormatError("leaf size exceeds remaining data");
  node->ids.resize(count);
  node->words.resize(count * l);
  for (std::size_t e = 0; e < count; ++e) {
    node->ids[e] = r.u64();
    auto word = r.bytes(l);
    std::memcpy(node->words.data() + e * l, word.data(), l);
  }
  entries += count;
  return node;
}

}  // namespace

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

DatasetFingerprint fingerprint(std::span<const float> values, std::size_t length) {
  static_assert(std::endian::native == std::endian::little, "fingerprint assumes a little-endian host");
  DatasetFingerprint fp;
  fp.length = length;
  fp.count = length ? values.size() / length : 0;
  fp.hash = fnv1a({reinterpret_cast<const std::uint8_t*>(values.data()), values.size_bytes()});
  return fp;
}

std::vector<std::uint8_t> serialize_model(const Summarizer& summarizer) {
  Writer w;
  w.bytes(kModelMagic, 8);
  w.u32(kModelFormatVersion);
  w.u8(static_cast<std::uint8_t>(summarizer.kind()));
  const auto& table = summarizer.table();
  w.u64(summarizer.series_length());
  w.u32(static_cast<std::uint32_t>(table.word_length()));
  w.u32(static_cast<std::uint32_t>(table.alphabet_size()));
  if (const auto* sfa = summarizer.sfa()) {
    w.u8(static_cast<std::uint8_t>(sfa->binning()));
    w.u32(static_cast<std::uint32_t>(sfa->candidate_limit()));
    w.u8(sfa->adjusted() ? 1 : 0);
    for (auto p : sfa->selected().positions) w.u32(p);
    for (auto weight : sfa->selected().weights) w.f64(weight);
  }
  for (double b : table.breakpoints()) w.f64(b);
  return std::move(w.buffer());
}

Summarizer deserialize_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  expect_magic(r, kModelMagic, "model file");
  if (const auto version = r.u32(); version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  const auto tag = r.u8();
  const std::size_t n = r.u64();
  const std::size_t l = r.u32();
  const std::size_t a = r.u32();
  if (l == 0 || l > 4096 || a < 2 || a > kMaxAlphabet) throw FormatError("model header out of range");

  try {
    if (tag == static_cast<std::uint8_t>(SummarizerKind::sfa)) {
      const auto binning = r.u8();
      if (binning > 1) throw FormatError("unknown binning mode");
      const std::size_t candidate_limit = r.u32();
      const bool adjusted = r.u8() != 0;
      SelectedIndices selected;
      selected.positions.resize(l);
      selected.weights.resize(l);
      for (auto& p : selected.positions) p = r.u32();
      for (auto& weight : selected.weights) weight = r.f64();
      std::vector<double> breakpoints(l * (a - 1));
      for (auto& b : breakpoints) b = r.f64();
      if (!r.done()) throw FormatError("trailing bytes after model");
      QuantizationTable table(l, a, std::move(breakpoints), selected.weights);
      SfaModel model(n, std::move(selected), static_cast<BinningMode>(binning), candidate_limit,
                     std::move(table));
      model.set_adjusted(adjusted);
      return Summarizer(std::move(model));
    }
    if (tag == static_cast<std::uint8_t>(SummarizerKind::sax)) {
      SaxModel model(n, l, a);
      for (double expected : model.table().breakpoints()) {
        if (std::bit_cast<std::uint64_t>(r.f64()) != std::bit_cast<std::uint64_t>(expected)) {
          throw FormatError("stored iSAX breakpoints differ from the Gaussian quantiles");
        }
      }
      if (!r.done()) throw FormatError("trailing bytes after model");
      return Summarizer(std::move(model));
    }
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid model: ") + e.what());
  }
  throw FormatError("unknown model type tag " + std::to_string(tag));
}

std::vector<std::uint8_t> serialize_index(const IndexTree& tree, const Summarizer& summarizer,
                                          const DatasetFingerprint& data) {
  const auto model = serialize_model(summarizer);
  Writer w;
  w.bytes(kIndexMagic, 8);
  w.u32(kIndexFormatVersion);
  const auto& config = tree.config();
  w.u64(config.leaf_capacity);
  w.u8(static_cast<std::uint8_t>(config.initial_cardinality));
  w.u8(static_cast<std::uint8_t>(summarizer.kind()));
  w.u64(config.workers);
  w.u64(model.size());
  w.bytes(model.data(), model.size());
  w.u64(fnv1a(model));
  w.u64(data.count);
  w.u64(data.length);
  w.u64(data.hash);
  w.u64(tree.size());
  w.u64(tree.root().size());
  for (const auto& [key, child] : tree.root()) write_node(w, *child);
  return std::move(w.buffer());
}

IndexSnapshot deserialize_index(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  expect_magic(r, kIndexMagic, "index snapshot");
  if (const auto version = r.u32(); version != kIndexFormatVersion) {
    throw FormatError("unsupported index format version " + std::to_string(version));
  }
  IndexConfig config;
  config.leaf_capacity = r.u64();
  config.initial_cardinality = r.u8();
  config.summarizer = static_cast<SummarizerKind>(r.u8());
  config.workers = r.u64();
  const auto model_size = r.u64();
  auto model_bytes = r.bytes(model_size);
  const auto model_hash = r.u64();
  if (model_hash != fnv1a(model_bytes)) throw FormatError("model hash mismatch inside snapshot");
  Summarizer summarizer = deserialize_model(model_bytes);
  if (summarizer.kind() != config.summarizer) throw FormatError("summarizer kind mismatch");

  DatasetFingerprint data;
  data.count = r.u64();
  data.length = r.u64();
  data.hash = r.u64();
  const auto total = r.u64();
  const auto children = r.u64();

  std::optional<IndexTree> tree;
  try {
    tree.emplace(summarizer.word_length(), summarizer.bits(), config);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid index config: ") + e.what());
  }
  const std::size_t l = summarizer.word_length();
  for (std::uint64_t c = 0; c < children; ++c) {
    std::size_t entries = 0;
    auto node = read_node(r, l, entries, 0);
    std::string key(node->symbols.begin(), node->symbols.end());
    try {
      tree->adopt(std::move(key), std::move(node), entries);
    } catch (const std::logic_error&) {
      throw FormatError("duplicate root child in snapshot");
    }
  }
  if (!r.done()) throw FormatError("trailing bytes after index");
  if (tree->size() != total) throw FormatError("index entry count mismatch");
  return IndexSnapshot{std::move(*tree), std::move(summarizer), data, model_hash};
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(size);
  if (size && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw std::runtime_error("failed reading " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace sofa
