#pragma once

#include <algorithm>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "pimspmv/triplet.hpp"

namespace pimspmv {

enum class FormatTag : std::uint8_t { csr, coo, bcsr, bcoo };

inline constexpr std::string_view to_string(FormatTag f) {
  switch (f) {
    case FormatTag::csr: return "CSR";
    case FormatTag::coo: return "COO";
    case FormatTag::bcsr: return "BCSR";
    case FormatTag::bcoo: return "BCOO";
  }
  return "?";
}

inline constexpr bool is_blocked(FormatTag f) {
  return f == FormatTag::bcsr || f == FormatTag::bcoo;
}

inline FormatTag format_from_string(std::string_view s) {
  if (s == "CSR") return FormatTag::csr;
  if (s == "COO") return FormatTag::coo;
  if (s == "BCSR") return FormatTag::bcsr;
  if (s == "BCOO") return FormatTag::bcoo;
  throw std::invalid_argument("unknown format: " + std::string(s));
}

template <typename T>
struct CsrMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<index_t> row_ptr;  // n_rows + 1 offsets
  std::vector<index_t> col_idx;
  std::vector<T> values;

  std::size_t nnz() const { return values.size(); }
};

template <typename T>
struct CooMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<index_t> rows;
  std::vector<index_t> cols;
  std::vector<T> values;

  std::size_t nnz() const { return values.size(); }
};

// Blocked formats store dense r x c tiles (row-major inside the tile);
// cells that were not present in the source are zero fill. nnz_true counts
// the source entries only.
template <typename T>
struct BcsrMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  index_t r = 1, c = 1;
  index_t block_rows = 0;  // ceil(n_rows / r)
  index_t block_cols = 0;  // ceil(n_cols / c)
  std::vector<index_t> block_row_ptr;  // block_rows + 1
  std::vector<index_t> block_col_idx;
  std::vector<T> block_values;  // n_blocks * r * c
  std::size_t nnz_true = 0;

  std::size_t n_blocks() const { return block_col_idx.size(); }
};

template <typename T>
struct BcooMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  index_t r = 1, c = 1;
  index_t block_rows = 0;
  index_t block_cols = 0;
  std::vector<index_t> block_row;
  std::vector<index_t> block_col;
  std::vector<T> block_values;
  std::size_t nnz_true = 0;

  std::size_t n_blocks() const { return block_row.size(); }
};

template <typename T>
CsrMatrix<T> to_csr(const TripletMatrix<T>& m) {
  CsrMatrix<T> out;
  out.n_rows = m.n_rows;
  out.n_cols = m.n_cols;
  out.row_ptr.assign(m.n_rows + 1, 0);
  out.col_idx.reserve(m.nnz());
  out.values.reserve(m.nnz());
  for (const auto& e : m.entries) out.row_ptr[e.row + 1]++;
  for (index_t i = 0; i < m.n_rows; ++i) out.row_ptr[i + 1] += out.row_ptr[i];
  for (const auto& e : m.entries) {
    out.col_idx.push_back(e.col);
    out.values.push_back(e.value);
  }
  return out;
}

template <typename T>
CooMatrix<T> to_coo(const TripletMatrix<T>& m) {
  CooMatrix<T> out;
  out.n_rows = m.n_rows;
  out.n_cols = m.n_cols;
  out.rows.reserve(m.nnz());
  out.cols.reserve(m.nnz());
  out.values.reserve(m.nnz());
  for (const auto& e : m.entries) {
    out.rows.push_back(e.row);
    out.cols.push_back(e.col);
    out.values.push_back(e.value);
  }
  return out;
}

namespace detail {

// Groups sorted triplets into (block_row, block_col) tiles. Returns the
// block coordinates sorted by (brow, bcol) plus the dense tile payloads.
template <typename T>
void group_blocks(const TripletMatrix<T>& m, index_t r, index_t c,
                  std::vector<index_t>& brow, std::vector<index_t>& bcol,
                  std::vector<T>& tiles) {
  if (r == 0 || c == 0) throw std::invalid_argument("block dims must be >= 1");
  struct Key {
    index_t br, bc;
    bool operator<(const Key& o) const {
      return br != o.br ? br < o.br : bc < o.bc;
    }
  };
  std::vector<std::pair<Key, std::size_t>> keyed;  // block -> entry index
  keyed.reserve(m.nnz());
  for (std::size_t k = 0; k < m.entries.size(); ++k)
    keyed.push_back({{m.entries[k].row / r, m.entries[k].col / c}, k});
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  for (std::size_t k = 0; k < keyed.size(); ++k) {
    const Key key = keyed[k].first;
    if (brow.empty() || brow.back() != key.br || bcol.back() != key.bc) {
      brow.push_back(key.br);
      bcol.push_back(key.bc);
      tiles.resize(tiles.size() + std::size_t(r) * c, T{});
    }
    const auto& e = m.entries[keyed[k].second];
    std::size_t base = (brow.size() - 1) * std::size_t(r) * c;
    tiles[base + std::size_t(e.row % r) * c + (e.col % c)] = e.value;
  }
}

}  // namespace detail

template <typename T>
BcsrMatrix<T> to_bcsr(const TripletMatrix<T>& m, index_t r, index_t c) {
  BcsrMatrix<T> out;
  out.n_rows = m.n_rows;
  out.n_cols = m.n_cols;
  out.r = r;
  out.c = c;
  out.block_rows = static_cast<index_t>(ceil_div(m.n_rows, r));
  out.block_cols = static_cast<index_t>(ceil_div(m.n_cols, c));
  out.nnz_true = m.nnz();
  std::vector<index_t> brow;
  detail::group_blocks(m, r, c, brow, out.block_col_idx, out.block_values);
  out.block_row_ptr.assign(out.block_rows + 1, 0);
  for (index_t b : brow) out.block_row_ptr[b + 1]++;
  for (index_t i = 0; i < out.block_rows; ++i)
    out.block_row_ptr[i + 1] += out.block_row_ptr[i];
  return out;
}

template <typename T>
BcooMatrix<T> to_bcoo(const TripletMatrix<T>& m, index_t r, index_t c) {
  BcooMatrix<T> out;
  out.n_rows = m.n_rows;
  out.n_cols = m.n_cols;
  out.r = r;
  out.c = c;
  out.block_rows = static_cast<index_t>(ceil_div(m.n_rows, r));
  out.block_cols = static_cast<index_t>(ceil_div(m.n_cols, c));
  out.nnz_true = m.nnz();
  detail::group_blocks(m, r, c, out.block_row, out.block_col, out.block_values);
  return out;
}

template <typename T>
TripletMatrix<T> from_csr(const CsrMatrix<T>& m) {
  TripletMatrix<T> out{m.n_rows, m.n_cols, {}};
  out.entries.reserve(m.nnz());
  for (index_t i = 0; i < m.n_rows; ++i)
    for (index_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
      out.entries.push_back({i, m.col_idx[k], m.values[k]});
  return out;
}

template <typename T>
TripletMatrix<T> from_coo(const CooMatrix<T>& m) {
  TripletMatrix<T> out{m.n_rows, m.n_cols, {}};
  out.entries.reserve(m.nnz());
  for (std::size_t k = 0; k < m.nnz(); ++k)
    out.entries.push_back({m.rows[k], m.cols[k], m.values[k]});
  return out;
}

namespace detail {

// Zero cells are dropped: fill is indistinguishable from explicit zeros once
// the matrix is blocked.
template <typename T>
void emit_block(TripletMatrix<T>& out, index_t br, index_t bc, index_t r, index_t c,
                const T* tile) {
  for (index_t i = 0; i < r; ++i) {
    index_t row = br * r + i;
    if (row >= out.n_rows) break;
    for (index_t j = 0; j < c; ++j) {
      index_t col = bc * c + j;
      if (col >= out.n_cols) break;
      T v = tile[std::size_t(i) * c + j];
      if (v != T{}) out.entries.push_back({row, col, v});
    }
  }
}

}  // namespace detail

template <typename T>
TripletMatrix<T> from_bcsr(const BcsrMatrix<T>& m) {
  TripletMatrix<T> out{m.n_rows, m.n_cols, {}};
  for (index_t br = 0; br < m.block_rows; ++br)
    for (index_t k = m.block_row_ptr[br]; k < m.block_row_ptr[br + 1]; ++k)
      detail::emit_block(out, br, m.block_col_idx[k], m.r, m.c,
                         m.block_values.data() + std::size_t(k) * m.r * m.c);
  sort_and_check_unique(out);  // block order is not (row, col) order for r > 1
  return out;
}

template <typename T>
TripletMatrix<T> from_bcoo(const BcooMatrix<T>& m) {
  TripletMatrix<T> out{m.n_rows, m.n_cols, {}};
  for (std::size_t k = 0; k < m.n_blocks(); ++k)
    detail::emit_block(out, m.block_row[k], m.block_col[k], m.r, m.c,
                       m.block_values.data() + k * m.r * m.c);
  sort_and_check_unique(out);
  return out;
}

// Bank-resident storage sizes. Offset and index arrays are 4-byte integers,
// values use the element width. These formulas are the ones the capacity
// check and the transfer accounting price.
inline bytes_t csr_storage_bytes(index_t row_span, std::size_t nnz,
                                 std::size_t width) {
  return bytes_t(row_span + 1) * 4 + bytes_t(nnz) * 4 + bytes_t(nnz) * width;
}
inline bytes_t coo_storage_bytes(std::size_t nnz, std::size_t width) {
  return bytes_t(nnz) * 8 + bytes_t(nnz) * width;
}
inline bytes_t bcsr_storage_bytes(index_t block_row_span, std::size_t n_blocks,
                                  index_t r, index_t c, std::size_t width) {
  return bytes_t(block_row_span + 1) * 4 + bytes_t(n_blocks) * 4 +
         bytes_t(n_blocks) * r * c * width;
}
inline bytes_t bcoo_storage_bytes(std::size_t n_blocks, index_t r, index_t c,
                                  std::size_t width) {
  return bytes_t(n_blocks) * 8 + bytes_t(n_blocks) * r * c * width;
}

}  // namespace pimspmv
