#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pimspmv/formats.hpp"
#include "pimspmv/triplet.hpp"

namespace pimspmv {

enum class CoreBalancing : std::uint8_t {
  rows,                   // equal unit-row counts (+-1)
  nnz_row_granularity,    // contiguous rows minimizing max per-core nnz
  nnz_exact,              // entry runs of equal length (COO only)
  blocks,                 // contiguous block rows minimizing max block count
  nnz_block_granularity,  // contiguous block rows minimizing max true nnz
};

enum class SchemeKind : std::uint8_t {
  oned,
  twod_equally_sized,
  twod_equally_wide,
  twod_variable,
};

struct PartitionScheme {
  SchemeKind kind = SchemeKind::oned;
  index_t pr = 1;  // grid rows (2D only)
  index_t pc = 1;  // grid cols (2D only)
};

std::string_view to_string(CoreBalancing b);
std::string_view to_string(SchemeKind k);

// One storage unit per record: an entry for CSR/COO (weight 1) or a block
// for BCSR/BCOO (weight = true nnz). Units are sorted by (urow, ucol) in the
// unit grid; this is the only view of the matrix the planners see.
struct PlanInput {
  index_t n_rows = 0, n_cols = 0;    // element dimensions
  index_t unit_r = 1, unit_c = 1;    // element rows/cols per unit cell
  index_t grid_rows = 0, grid_cols = 0;
  std::vector<index_t> unit_row;
  std::vector<index_t> unit_col;
  std::vector<std::uint64_t> unit_weight;

  std::size_t n_units() const { return unit_row.size(); }
  std::uint64_t total_weight() const;
};

template <typename T>
PlanInput make_plan_input(const TripletMatrix<T>& m, FormatTag format,
                          index_t r = 1, index_t c = 1) {
  PlanInput in;
  in.n_rows = m.n_rows;
  in.n_cols = m.n_cols;
  if (is_blocked(format)) {
    in.unit_r = r;
    in.unit_c = c;
    in.grid_rows = static_cast<index_t>(ceil_div(m.n_rows, r));
    in.grid_cols = static_cast<index_t>(ceil_div(m.n_cols, c));
    // Group entries into blocks, keeping (brow, bcol) order.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keys;  // key -> count
    keys.reserve(m.nnz());
    for (const auto& e : m.entries)
      keys.push_back({(std::uint64_t(e.row / r) << 32) | (e.col / c), 1});
    std::sort(keys.begin(), keys.end());
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (!in.unit_row.empty() &&
          ((std::uint64_t(in.unit_row.back()) << 32) | in.unit_col.back()) ==
              keys[k].first) {
        in.unit_weight.back()++;
      } else {
        in.unit_row.push_back(static_cast<index_t>(keys[k].first >> 32));
        in.unit_col.push_back(static_cast<index_t>(keys[k].first & 0xffffffffu));
        in.unit_weight.push_back(1);
      }
    }
  } else {
    in.unit_r = in.unit_c = 1;
    in.grid_rows = m.n_rows;
    in.grid_cols = m.n_cols;
    in.unit_row.reserve(m.nnz());
    in.unit_col.reserve(m.nnz());
    in.unit_weight.assign(m.nnz(), 1);
    for (const auto& e : m.entries) {
      in.unit_row.push_back(e.row);
      in.unit_col.push_back(e.col);
    }
  }
  return in;
}

struct Tile {
  index_t core_id = 0;
  index_t row0 = 0, row1 = 0;  // element rows [row0, row1)
  index_t col0 = 0, col1 = 0;  // element cols [col0, col1)
  // Contiguous unit range for 1D plans; for 2D plans ownership is by the
  // (row, col) ranges and only the counts below are meaningful.
  std::uint64_t entry_begin = 0, entry_end = 0;
  std::uint64_t owned_units = 0;
  std::uint64_t owned_nnz = 0;
  bool produces_partial = false;

  index_t row_span() const { return row1 - row0; }
  index_t col_span() const { return col1 - col0; }
};

struct MergeEntry {
  index_t row;
  std::vector<index_t> cores;  // ascending, the host reduction order
};

struct PartitionPlan {
  PartitionScheme scheme;
  CoreBalancing balancing = CoreBalancing::rows;
  index_t n_rows = 0, n_cols = 0;
  index_t unit_r = 1, unit_c = 1;
  std::vector<Tile> tiles;  // indexed by core id
  std::vector<std::pair<index_t, index_t>> vector_segments;  // per core [c0, c1)
  std::vector<MergeEntry> merge_map;  // sorted by row
};

struct PlanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PartitionPlan plan_1d(const PlanInput& in, index_t n_cores, CoreBalancing balancing);
PartitionPlan plan_2d_equally_sized(const PlanInput& in, index_t pr, index_t pc);
PartitionPlan plan_2d_equally_wide(const PlanInput& in, index_t pr, index_t pc);
PartitionPlan plan_2d_variable(const PlanInput& in, index_t pr, index_t pc);

struct BalanceStats {
  std::vector<std::uint64_t> per_core_nnz;
  std::vector<std::uint64_t> per_core_rows;
  std::vector<std::uint64_t> per_core_units;
  std::uint64_t min_nnz = 0, max_nnz = 0;
  double mean_nnz = 0.0;
  double cv_nnz = 0.0;  // population coefficient of variation
  std::uint64_t split_rows = 0;
  bytes_t vector_segment_bytes = 0;  // summed over cores at the given width
};

BalanceStats plan_stats(const PartitionPlan& plan, std::size_t value_width);

// Throws PlanError if any stored unit is not covered exactly once.
void validate_plan(const PartitionPlan& plan, const PlanInput& in);

std::string plan_to_json(const PartitionPlan& plan, const BalanceStats& stats,
                         int indent = 2);

// Minimize the maximum stripe sum over contiguous, non-empty stripes.
// Returns k+1 strictly increasing boundaries, earliest-boundary tie break.
std::vector<index_t> minmax_contiguous_split(std::span<const std::uint64_t> w,
                                             index_t k);

}  // namespace pimspmv
