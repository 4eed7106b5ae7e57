#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "pimspmv/types.hpp"

namespace pimspmv {

template <typename T>
struct Triplet {
  index_t row;
  index_t col;
  T value;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Canonical ingested form: entries sorted by (row, col), no duplicates.
// Every compressed format is derived from this and converts back to it.
template <typename T>
struct TripletMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<Triplet<T>> entries;

  std::size_t nnz() const { return entries.size(); }

  void validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      if (e.row >= n_rows || e.col >= n_cols)
        throw std::invalid_argument("triplet index out of range");
      if (i > 0) {
        const auto& p = entries[i - 1];
        if (p.row > e.row || (p.row == e.row && p.col >= e.col))
          throw std::invalid_argument("triplets not sorted or duplicated");
      }
    }
  }

  std::vector<std::uint64_t> per_row_nnz() const {
    std::vector<std::uint64_t> counts(n_rows, 0);
    for (const auto& e : entries) counts[e.row]++;
    return counts;
  }
};

using RawMatrix = TripletMatrix<double>;

template <typename T>
void sort_and_check_unique(TripletMatrix<T>& m) {
  std::sort(m.entries.begin(), m.entries.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t i = 1; i < m.entries.size(); ++i)
    if (m.entries[i].row == m.entries[i - 1].row &&
        m.entries[i].col == m.entries[i - 1].col)
      throw std::invalid_argument("duplicate coordinate (" +
                                  std::to_string(m.entries[i].row + 1) + ", " +
                                  std::to_string(m.entries[i].col + 1) + ")");
}

// Applies the documented value conversion to the target element type.
template <typename T>
TripletMatrix<T> convert_matrix(const RawMatrix& raw) {
  TripletMatrix<T> out;
  out.n_rows = raw.n_rows;
  out.n_cols = raw.n_cols;
  out.entries.reserve(raw.entries.size());
  for (const auto& e : raw.entries)
    out.entries.push_back({e.row, e.col, convert_value<T>(e.value)});
  return out;
}

}  // namespace pimspmv
