#include <doctest.h>

#include <algorithm>

#include "sofa/query.hpp"
#include "sofa/serialize.hpp"
#include "sofa/sfa.hpp"
#include "support.hpp"

using namespace sofa;

namespace {

Summarizer learned(const Dataset& data, BinningMode mode) {
  SfaOptions o;
  o.binning = mode;
  o.alphabet_size = 64;
  o.sampling_ratio = 0.2;
  o.seed = 5;
  return Summarizer(learn_mcb(data, o));
}

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a({}) == 0xcbf29ce484222325ull);
    const std::uint8_t a[] = {'a'};
    CHECK(fnv1a(a) == 0xaf63dc4c8601ec8cull);
    const std::uint8_t foobar[] = {'f', 'o', 'o', 'b', 'a', 'r'};
    CHECK(fnv1a(foobar) == 0x85944171f73967e8ull);
  }

  TEST_CASE("models round-trip bit-exactly") {
    const auto data = test::profile_dataset(Profile::noisy, 1000, 64, 1);
    for (const auto& s : {learned(data, BinningMode::equi_width), learned(data, BinningMode::equi_depth),
                          Summarizer(SaxModel(64, 16, 256)), Summarizer(SaxModel(60, 7, 8))}) {
      const auto bytes = serialize_model(s);
      const auto back = deserialize_model(bytes);
      CHECK(serialize_model(back) == bytes);
      CHECK(back.kind() == s.kind());
      CHECK(back.series_length() == s.series_length());
      CHECK(std::ranges::equal(back.table().breakpoints(), s.table().breakpoints()));
      if (s.sfa()) {
        CHECK(back.sfa()->selected().positions == s.sfa()->selected().positions);
        CHECK(back.sfa()->binning() == s.sfa()->binning());
      }
    }
  }

  TEST_CASE("malformed model bytes are rejected") {
    const auto data = test::random_dataset(300, 64, 2);
    const auto bytes = serialize_model(learned(data, BinningMode::equi_width));
    for (std::size_t cut : {0u, 4u, 8u, 20u, 100u}) {
      CHECK_THROWS_AS(deserialize_model(std::span(bytes).first(cut)), FormatError);
    }
    CHECK_THROWS_AS(deserialize_model(std::span(bytes).first(bytes.size() - 1)), FormatError);
    auto extended = bytes;
    extended.push_back(0);
    CHECK_THROWS_AS(deserialize_model(extended), FormatError);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_model(bad_magic), FormatError);
    auto bad_version = bytes;
    bad_version[8] = 99;
    CHECK_THROWS_AS(deserialize_model(bad_version), FormatError);
    auto bad_tag = bytes;
    bad_tag[12] = 7;
    CHECK_THROWS_AS(deserialize_model(bad_tag), FormatError);
    // Breaking the monotonicity of a breakpoint row.
    auto unsorted = bytes;
    std::fill(unsorted.end() - 16, unsorted.end(), std::uint8_t{0});
    CHECK_THROWS_AS(deserialize_model(unsorted), FormatError);
  }

  TEST_CASE("tampered iSAX breakpoints are rejected") {
    auto bytes = serialize_model(Summarizer(SaxModel(64, 8, 16)));
    bytes.back() ^= 1;
    CHECK_THROWS_AS(deserialize_model(bytes), FormatError);
  }

  TEST_CASE("index snapshots round-trip and answer identically") {
    const auto raw = generate_series(Profile::smooth, 4000, 64, 9);
    const auto data = Dataset::normalize(raw, 64);
    const auto queries = test::profile_dataset(Profile::smooth, 10, 64, 10);
    const auto print = fingerprint(raw, 64);
    for (const auto& s : {learned(data, BinningMode::equi_width), Summarizer(SaxModel(64, 16, 256))}) {
      IndexConfig config;
      config.leaf_capacity = 60;
      config.summarizer = s.kind();
      const auto tree = build_index(data, s, config);
      const auto bytes = serialize_index(tree, s, print);
      const auto snap = deserialize_index(bytes);
      CHECK(serialize_index(snap.tree, snap.summarizer, snap.data) == bytes);
      CHECK(snap.data == print);
      CHECK(snap.model_hash == fnv1a(serialize_model(s)));
      CHECK(audit(snap.tree, data.size()).ok());
      CHECK(root_contents(snap.tree) == root_contents(tree));

      const IndexSearcher before(data, tree, s);
      const IndexSearcher after(data, snap.tree, snap.summarizer);
      for (std::size_t q = 0; q < queries.size(); ++q) {
        CHECK(after.exact_knn(queries.series(q), {.k = 7}) == before.exact_knn(queries.series(q), {.k = 7}));
      }

      for (std::size_t cut : {std::size_t{0}, std::size_t{12}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
        CHECK_THROWS_AS(deserialize_index(std::span(bytes).first(cut)), FormatError);
      }
      auto flipped = bytes;
      flipped[60] ^= 0x40;  // inside the embedded model blob
      CHECK_THROWS_AS(deserialize_index(flipped), FormatError);
    }
  }

  TEST_CASE("files") {
    const auto path = std::filesystem::temp_directory_path() / "sofa_serialize_test.bin";
    const std::vector<std::uint8_t> bytes{1, 2, 3, 250};
    write_file(path, bytes);
    CHECK(read_file(path) == bytes);
    std::filesystem::remove(path);
    CHECK_THROWS(read_file(path));
  }

  TEST_CASE("fingerprint tracks content") {
    std::vector<float> v{1, 2, 3, 4};
    const auto a = fingerprint(v, 2);
    CHECK(a.count == 2);
    CHECK(a.length == 2);
    v[3] = 5;
    CHECK(fingerprint(v, 2).hash != a.hash);
  }
}
