#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "pimspmv/formats.hpp"
#include "pimspmv/mmio.hpp"
#include "pimspmv/synthetic.hpp"

using namespace pimspmv;

namespace {

RawMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix_market(in);
}

using EntrySet = std::set<std::tuple<index_t, index_t, double>>;

EntrySet entry_set(const RawMatrix& m) {
  EntrySet s;
  for (const auto& e : m.entries) s.insert({e.row, e.col, e.value});
  return s;
}

}  // namespace

TEST_CASE("matrix market: minimal general file") {
  RawMatrix m = parse(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 1\n"
      "1 1 3.0\n");
  CHECK(m.n_rows == 2);
  CHECK(m.n_cols == 2);
  REQUIRE(m.nnz() == 1);
  CHECK(m.entries[0].row == 0);
  CHECK(m.entries[0].col == 0);
  CHECK(m.entries[0].value == 3.0);
}

TEST_CASE("matrix market: symmetric expansion") {
  RawMatrix m = parse(
      "%%MatrixMarket matrix coordinate integer symmetric\n"
      "2 2 1\n"
      "2 1 5\n");
  CHECK(entry_set(m) == EntrySet{{0, 1, 5.0}, {1, 0, 5.0}});
}

TEST_CASE("matrix market: pattern entries take value 1") {
  RawMatrix m = parse(
      "%%MatrixMarket matrix coordinate pattern general\n"
      "2 2 2\n"
      "1 2\n"
      "2 2\n");
  CHECK(entry_set(m) == EntrySet{{0, 1, 1.0}, {1, 1, 1.0}});
}

TEST_CASE("matrix market: errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse("%%MatrixMarket matrix coordinate real general\n"
                             "2 2 3\n"
                             "1 1 1.0\n"
                             "2 2 1.0\n"),
                       doctest::Contains("entry count mismatch"), ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix array real general\n1 1 1\n"),
                  ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate complex general\n"
                        "1 1 1\n1 1 1 0\n"),
                  ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real skew-symmetric\n"
                        "2 2 1\n2 1 1.0\n"),
                  ParseError);
  CHECK_THROWS_WITH_AS(parse("%%MatrixMarket matrix coordinate real general\n"
                             "2 2 1\n"
                             "3 1 1.0\n"),
                       doctest::Contains("out of range"), ParseError);
  // Duplicates are a hard error, including ones created by symmetry.
  CHECK_THROWS_WITH_AS(parse("%%MatrixMarket matrix coordinate real general\n"
                             "2 2 2\n"
                             "1 1 1.0\n"
                             "1 1 2.0\n"),
                       doctest::Contains("duplicate"), ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real symmetric\n"
                        "2 2 2\n"
                        "2 1 1.0\n"
                        "1 2 1.0\n"),
                  ParseError);
}

TEST_CASE("matrix market: parse-serialize-parse is identity") {
  SynthSpec spec = parse_synth_spec("uniform:12x17:density=0.3:seed=42");
  RawMatrix m = generate_synthetic(spec);
  std::ostringstream out;
  write_matrix_market(out, m);
  RawMatrix again = parse(out.str());
  CHECK(again.n_rows == m.n_rows);
  CHECK(again.n_cols == m.n_cols);
  CHECK(again.entries == m.entries);
}

TEST_CASE("csr conversion") {
  auto id3 = convert_matrix<std::int32_t>(
      generate_synthetic(parse_synth_spec("identity:3")));
  auto csr = to_csr(id3);
  CHECK(csr.row_ptr == std::vector<index_t>{0, 1, 2, 3});
  CHECK(csr.col_idx == std::vector<index_t>{0, 1, 2});
  CHECK(csr.values == std::vector<std::int32_t>{1, 1, 1});

  TripletMatrix<std::int32_t> empty{2, 3, {}};
  CHECK(to_csr(empty).row_ptr == std::vector<index_t>{0, 0, 0});

  // per-row nnz [2, 0, 1, 1]
  TripletMatrix<std::int32_t> m{4, 4, {{0, 1, 1}, {0, 3, 2}, {2, 0, 3}, {3, 2, 4}}};
  auto c = to_csr(m);
  CHECK(c.row_ptr == std::vector<index_t>{0, 2, 2, 3, 4});
  CHECK(from_csr(c).entries == m.entries);

  // row_ptr differences match per-row counts computed from triplets
  auto counts = m.per_row_nnz();
  for (index_t i = 0; i < m.n_rows; ++i)
    CHECK(c.row_ptr[i + 1] - c.row_ptr[i] == counts[i]);
}

TEST_CASE("bcsr conversion: identity and single entry") {
  auto id4 = convert_matrix<std::int32_t>(
      generate_synthetic(parse_synth_spec("identity:4")));
  auto b = to_bcsr(id4, 2, 2);
  REQUIRE(b.n_blocks() == 2);
  CHECK(b.block_row_ptr == std::vector<index_t>{0, 1, 2});
  CHECK(b.block_col_idx == std::vector<index_t>{0, 1});
  CHECK(b.block_values == std::vector<std::int32_t>{1, 0, 0, 1, 1, 0, 0, 1});
  CHECK(b.nnz_true == 4);

  TripletMatrix<std::int32_t> single{4, 4, {{0, 3, 7}}};
  auto s = to_bcsr(single, 2, 2);
  REQUIRE(s.n_blocks() == 1);
  CHECK(s.block_col_idx == std::vector<index_t>{1});
  CHECK(s.block_values == std::vector<std::int32_t>{0, 7, 0, 0});

  auto sb = to_bcoo(single, 2, 2);
  REQUIRE(sb.n_blocks() == 1);
  CHECK(sb.block_row == std::vector<index_t>{0});
  CHECK(sb.block_col == std::vector<index_t>{1});
}

TEST_CASE("bcsr random fixture matches brute-force block grouping") {
  auto m = convert_matrix<std::int32_t>(
      generate_synthetic(parse_synth_spec("uniform:64x64:density=0.05:seed=1")));
  auto b = to_bcsr(m, 4, 4);
  auto bc = to_bcoo(m, 4, 4);

  std::set<std::pair<index_t, index_t>> blocks;
  for (const auto& e : m.entries) blocks.insert({e.row / 4, e.col / 4});
  CHECK(b.n_blocks() == blocks.size());
  CHECK(bc.n_blocks() == blocks.size());
  CHECK(b.nnz_true == m.nnz());

  double fill = static_cast<double>(b.n_blocks() * 16) /
                static_cast<double>(b.nnz_true);
  CHECK(fill >= 1.0);
}

TEST_CASE("round trips over assorted matrices") {
  for (const char* spec :
       {"identity:7", "dense:5x3", "banded:16:b=2",
        "uniform:33x29:density=0.11:seed=9", "zipf:40x31:s=1.3:avg=4:seed=3"}) {
    auto raw = generate_synthetic(parse_synth_spec(spec));
    auto m = convert_matrix<std::int64_t>(raw);
    CAPTURE(spec);
    CHECK(from_csr(to_csr(m)).entries == m.entries);
    CHECK(from_coo(to_coo(m)).entries == m.entries);
    for (index_t r : {1u, 2u, 3u}) {
      auto back = from_bcsr(to_bcsr(m, r, r + 1));
      CHECK(back.entries == m.entries);
      auto back2 = from_bcoo(to_bcoo(m, r + 1, r));
      CHECK(back2.entries == m.entries);
    }
  }
}

TEST_CASE("value conversion truncates toward zero and saturates") {
  CHECK(convert_value<std::int8_t>(3.9) == 3);
  CHECK(convert_value<std::int8_t>(-3.9) == -3);
  CHECK(convert_value<std::int8_t>(300.0) == 127);
  CHECK(convert_value<std::int8_t>(-300.0) == -128);
  CHECK(convert_value<std::int64_t>(-7.2) == -7);
  CHECK(convert_value<float>(1.5) == 1.5f);
}

TEST_CASE("wrapping arithmetic wraps at width") {
  CHECK(wrapping_mul_add<std::int8_t>(100, 10, 10) == static_cast<std::int8_t>(200));
  CHECK(wrapping_add<std::int8_t>(127, 1) == std::numeric_limits<std::int8_t>::min());
  CHECK(wrapping_mul_add<std::int32_t>(0, 1 << 20, 1 << 20) == 0);
}
