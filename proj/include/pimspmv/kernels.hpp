#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pimspmv/formats.hpp"
#include "pimspmv/machine.hpp"
#include "pimspmv/partition.hpp"
#include "pimspmv/simd/ops.hpp"

namespace pimspmv {

enum class ThreadBalancing : std::uint8_t { rows, nnz, blocks };
enum class SyncMode : std::uint8_t { lock_free, coarse_lock, fine_grained_lock };

std::string_view to_string(ThreadBalancing tb);
std::string_view to_string(SyncMode s);
ThreadBalancing thread_balancing_from_string(std::string_view s);
SyncMode sync_mode_from_string(std::string_view s);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One point in the kernel taxonomy. The canonical name pins format, scheme
// and the balancing suffix; thread balancing, sync mode, dtype and the grid
// shape are orthogonal switches.
struct KernelSpec {
  std::string name;
  FormatTag format = FormatTag::csr;
  SchemeKind scheme = SchemeKind::oned;
  CoreBalancing core_balancing = CoreBalancing::rows;
  ThreadBalancing thread_balancing = ThreadBalancing::rows;
  SyncMode sync = SyncMode::lock_free;
  ElementType dtype = ElementType::int32;

  void validate() const;
};

// The canonical kernel list. Suffixes name the core balancing for 1D plans
// and the thread balancing for 2D plans.
std::vector<std::string> kernel_registry();
KernelSpec parse_kernel_name(std::string_view name);

// Per-core sub-matrix in the kernel's own format. Indices are local to the
// tile: rows relative to row0, columns relative to col0. Block tiles are
// padded on the right/bottom edge so every stored block is a full r x c tile.
template <typename T>
struct TileData {
  FormatTag format = FormatTag::csr;
  index_t row0 = 0, row1 = 0;
  index_t col0 = 0, col1 = 0;
  index_t r = 1, c = 1;

  // CSR / COO
  std::vector<index_t> row_ptr;  // CSR: row_span + 1
  std::vector<index_t> rows;     // COO
  std::vector<index_t> cols;     // CSR / COO
  std::vector<T> values;

  // BCSR / BCOO (local block grid)
  index_t block_rows = 0, block_cols = 0;
  std::vector<index_t> block_row_ptr;  // BCSR: block_rows + 1
  std::vector<index_t> block_row;      // BCOO
  std::vector<index_t> block_col;
  std::vector<T> block_values;               // n_blocks * r * c
  std::vector<std::uint32_t> block_true_nnz; // source entries per block

  index_t row_span() const { return row1 - row0; }
  index_t col_span() const { return col1 - col0; }
  std::size_t n_blocks() const { return block_col.size(); }
  std::size_t unit_count() const {
    return is_blocked(format) ? n_blocks() : values.size();
  }

  bytes_t storage_bytes() const {
    switch (format) {
      case FormatTag::csr: return csr_storage_bytes(row_span(), values.size(),
                                                    width_bytes(element_type_v<T>));
      case FormatTag::coo: return coo_storage_bytes(values.size(),
                                                    width_bytes(element_type_v<T>));
      case FormatTag::bcsr: return bcsr_storage_bytes(block_rows, n_blocks(), r, c,
                                                      width_bytes(element_type_v<T>));
      case FormatTag::bcoo: return bcoo_storage_bytes(n_blocks(), r, c,
                                                      width_bytes(element_type_v<T>));
    }
    return 0;
  }
};

template <typename T>
std::vector<TileData<T>> extract_tiles(const TripletMatrix<T>& m,
                                       const PartitionPlan& plan, FormatTag format);

// Contiguous per-thread work ranges: over local unit rows (rows balancing)
// or over storage units (nnz and blocks balancing).
struct ThreadSchedule {
  ThreadBalancing tb = ThreadBalancing::rows;
  SyncMode sync = SyncMode::lock_free;
  bool over_unit_rows = true;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  std::vector<std::uint64_t> rows_updated;  // per thread
  std::vector<std::uint64_t> lock_ops;      // acquires + releases, per thread

  std::size_t n_threads() const { return ranges.size(); }
};

template <typename T>
ThreadSchedule schedule_threads(const TileData<T>& tile, index_t n_threads,
                                ThreadBalancing tb, SyncMode sync);

template <typename T>
struct CoreResult {
  std::vector<T> partial_y;  // tile row span
  std::vector<ThreadCounters> counters;
};

template <typename T>
CoreResult<T> run_core(const TileData<T>& tile, std::span<const T> x_segment,
                       const ThreadSchedule& sched);

// ---------------------------------------------------------------------------
// implementation

namespace detail {

struct RowAccounting {
  std::uint64_t rows_touched = 0;  // index-structure reads at row granularity
  std::uint64_t rows_updated = 0;  // output rows stored
  std::uint64_t units = 0;         // entries or blocks in the range
};

inline index_t real_rows_of_block_row(index_t br, index_t r, index_t row_span) {
  index_t lo = br * r;
  index_t hi = std::min<index_t>(row_span, lo + r);
  return hi > lo ? hi - lo : 0;
}

// Shared between scheduling (lock predictions) and execution (counters), so
// the predicted and the realized statistics cannot drift apart.
template <typename T>
RowAccounting range_accounting(const TileData<T>& tile, std::uint64_t b,
                               std::uint64_t e, bool over_unit_rows) {
  RowAccounting acc;
  if (b >= e) return acc;
  switch (tile.format) {
    case FormatTag::csr: {
      if (over_unit_rows) {
        acc.rows_touched = e - b;
        acc.rows_updated = e - b;  // every row in the chunk gets a store
        acc.units = tile.row_ptr[e] - tile.row_ptr[b];
      } else {
        auto first = static_cast<std::uint64_t>(
            std::upper_bound(tile.row_ptr.begin(), tile.row_ptr.end(),
                             static_cast<index_t>(b)) -
            tile.row_ptr.begin() - 1);
        auto last = static_cast<std::uint64_t>(
            std::upper_bound(tile.row_ptr.begin(), tile.row_ptr.end(),
                             static_cast<index_t>(e - 1)) -
            tile.row_ptr.begin() - 1);
        acc.rows_touched = last - first + 1;
        for (std::uint64_t i = first; i <= last; ++i) {
          std::uint64_t lo = std::max<std::uint64_t>(tile.row_ptr[i], b);
          std::uint64_t hi = std::min<std::uint64_t>(tile.row_ptr[i + 1], e);
          if (hi > lo) acc.rows_updated += 1;
        }
        acc.units = e - b;
      }
      break;
    }
    case FormatTag::coo: {
      std::uint64_t lo = b, hi = e;
      if (over_unit_rows) {
        lo = std::lower_bound(tile.rows.begin(), tile.rows.end(),
                              static_cast<index_t>(b)) -
             tile.rows.begin();
        hi = std::lower_bound(tile.rows.begin(), tile.rows.end(),
                              static_cast<index_t>(e)) -
             tile.rows.begin();
      }
      acc.units = hi - lo;
      for (std::uint64_t k = lo; k < hi; ++k)
        if (k == lo || tile.rows[k] != tile.rows[k - 1]) {
          acc.rows_touched += 1;
          acc.rows_updated += 1;
        }
      break;
    }
    case FormatTag::bcsr: {
      if (over_unit_rows) {
        acc.rows_touched = e - b;
        acc.units = tile.block_row_ptr[e] - tile.block_row_ptr[b];
        acc.rows_updated =
            std::min<std::uint64_t>(tile.row_span(), e * tile.r) - b * tile.r;
      } else {
        auto first = static_cast<std::uint64_t>(
            std::upper_bound(tile.block_row_ptr.begin(), tile.block_row_ptr.end(),
                             static_cast<index_t>(b)) -
            tile.block_row_ptr.begin() - 1);
        auto last = static_cast<std::uint64_t>(
            std::upper_bound(tile.block_row_ptr.begin(), tile.block_row_ptr.end(),
                             static_cast<index_t>(e - 1)) -
            tile.block_row_ptr.begin() - 1);
        acc.rows_touched = last - first + 1;
        for (std::uint64_t i = first; i <= last; ++i) {
          std::uint64_t lo = std::max<std::uint64_t>(tile.block_row_ptr[i], b);
          std::uint64_t hi = std::min<std::uint64_t>(tile.block_row_ptr[i + 1], e);
          if (hi > lo)
            acc.rows_updated += real_rows_of_block_row(static_cast<index_t>(i),
                                                       tile.r, tile.row_span());
        }
        acc.units = e - b;
      }
      break;
    }
    case FormatTag::bcoo: {
      std::uint64_t lo = b, hi = e;
      if (over_unit_rows) {
        lo = std::lower_bound(tile.block_row.begin(), tile.block_row.end(),
                              static_cast<index_t>(b)) -
             tile.block_row.begin();
        hi = std::lower_bound(tile.block_row.begin(), tile.block_row.end(),
                              static_cast<index_t>(e)) -
             tile.block_row.begin();
      }
      acc.units = hi - lo;
      for (std::uint64_t k = lo; k < hi; ++k)
        if (k == lo || tile.block_row[k] != tile.block_row[k - 1]) {
          acc.rows_touched += 1;
          acc.rows_updated += real_rows_of_block_row(tile.block_row[k], tile.r,
                                                     tile.row_span());
        }
      break;
    }
  }
  return acc;
}

// First/last stored unit of a unit-range thread, for lock-free legality.
template <typename T>
std::pair<std::int64_t, std::int64_t> boundary_rows(const TileData<T>& tile,
                                                    std::uint64_t b,
                                                    std::uint64_t e) {
  if (b >= e) return {-1, -1};
  switch (tile.format) {
    case FormatTag::csr: {
      auto row_of = [&](std::uint64_t k) {
        return static_cast<std::int64_t>(
            std::upper_bound(tile.row_ptr.begin(), tile.row_ptr.end(),
                             static_cast<index_t>(k)) -
            tile.row_ptr.begin() - 1);
      };
      return {row_of(b), row_of(e - 1)};
    }
    case FormatTag::coo:
      return {tile.rows[b], tile.rows[e - 1]};
    case FormatTag::bcsr: {
      auto row_of = [&](std::uint64_t k) {
        return static_cast<std::int64_t>(
            std::upper_bound(tile.block_row_ptr.begin(), tile.block_row_ptr.end(),
                             static_cast<index_t>(k)) -
            tile.block_row_ptr.begin() - 1);
      };
      return {row_of(b), row_of(e - 1)};
    }
    case FormatTag::bcoo:
      return {tile.block_row[b], tile.block_row[e - 1]};
  }
  return {-1, -1};
}

inline std::vector<std::pair<std::uint64_t, std::uint64_t>> equal_ranges(
    std::uint64_t n, std::uint64_t k) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  std::uint64_t q = n / k, rem = n % k, b = 0;
  for (std::uint64_t i = 0; i < k; ++i) {
    std::uint64_t e = b + q + (i < rem ? 1 : 0);
    out.push_back({b, e});
    b = e;
  }
  return out;
}

}  // namespace detail

template <typename T>
ThreadSchedule schedule_threads(const TileData<T>& tile, index_t n_threads,
                                ThreadBalancing tb, SyncMode sync) {
  if (n_threads == 0) throw ConfigError("need at least one thread");
  if (tb == ThreadBalancing::blocks && !is_blocked(tile.format))
    throw ConfigError("blocks thread balancing requires BCSR/BCOO");

  ThreadSchedule sched;
  sched.tb = tb;
  sched.sync = sync;
  sched.over_unit_rows = tb == ThreadBalancing::rows;

  if (tb == ThreadBalancing::rows) {
    std::uint64_t unit_rows = is_blocked(tile.format)
                                  ? tile.block_rows
                                  : (tile.format == FormatTag::csr
                                         ? tile.row_span()
                                         : tile.row_span());
    std::uint64_t k = std::min<std::uint64_t>(n_threads, unit_rows);
    if (k > 0) sched.ranges = detail::equal_ranges(unit_rows, k);
  } else if (tb == ThreadBalancing::blocks ||
             (tb == ThreadBalancing::nnz && is_blocked(tile.format))) {
    std::uint64_t n = tile.n_blocks();
    std::uint64_t k = std::min<std::uint64_t>(n_threads, n);
    if (k > 0) {
      if (tb == ThreadBalancing::blocks) {
        sched.ranges = detail::equal_ranges(n, k);
      } else {
        // Blocks are indivisible: balance true nnz over contiguous block runs.
        std::vector<std::uint64_t> w(tile.block_true_nnz.begin(),
                                     tile.block_true_nnz.end());
        auto bounds = minmax_contiguous_split(w, static_cast<index_t>(k));
        for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
          sched.ranges.push_back({bounds[i], bounds[i + 1]});
      }
    }
  } else {  // nnz over entries
    std::uint64_t n = tile.values.size();
    std::uint64_t k = std::min<std::uint64_t>(n_threads, n);
    if (k > 0) sched.ranges = detail::equal_ranges(n, k);
  }

  if (sync == SyncMode::lock_free && !sched.over_unit_rows) {
    std::int64_t prev_last = -1;
    for (const auto& [b, e] : sched.ranges) {
      if (b >= e) continue;
      auto [first, last] = detail::boundary_rows(tile, b, e);
      if (prev_last >= 0 && first == prev_last)
        throw ConfigError(
            "lock_free requires every output row on exactly one thread; "
            "use rows balancing or a locking sync mode");
      prev_last = last;
    }
  }

  for (const auto& [b, e] : sched.ranges) {
    auto acc = detail::range_accounting(tile, b, e, sched.over_unit_rows);
    sched.rows_updated.push_back(acc.rows_updated);
    switch (sync) {
      case SyncMode::lock_free:
        sched.lock_ops.push_back(0);
        break;
      case SyncMode::coarse_lock:
        // One acquire + one release around the thread's output flush.
        sched.lock_ops.push_back(acc.rows_updated > 0 ? 2 : 0);
        break;
      case SyncMode::fine_grained_lock:
        sched.lock_ops.push_back(2 * acc.rows_updated);
        break;
    }
  }
  return sched;
}

namespace detail {

template <typename T>
void add_into(T& slot, T v) {
  slot = wrapping_add(slot, v);
}

// CSR rows [rb, re), optionally clipped to the entry window [wb, we).
template <typename T>
void csr_walk(const TileData<T>& tile, std::uint64_t rb, std::uint64_t re,
              std::uint64_t wb, std::uint64_t we, const T* x, T* y) {
  auto dot = simd::sparse_dot_fn<T>();
  for (std::uint64_t i = rb; i < re; ++i) {
    std::uint64_t lo = std::max<std::uint64_t>(tile.row_ptr[i], wb);
    std::uint64_t hi = std::min<std::uint64_t>(tile.row_ptr[i + 1], we);
    T acc = dot(T{}, tile.values.data() + lo, tile.cols.data() + lo,
                hi > lo ? hi - lo : 0, x);
    add_into(y[i], acc);
  }
}

template <typename T>
void coo_walk(const TileData<T>& tile, std::uint64_t lo, std::uint64_t hi,
              const T* x, T* y) {
  auto dot = simd::sparse_dot_fn<T>();
  std::uint64_t k = lo;
  while (k < hi) {
    index_t row = tile.rows[k];
    std::uint64_t run = k;
    while (run < hi && tile.rows[run] == row) ++run;
    T acc = dot(T{}, tile.values.data() + k, tile.cols.data() + k, run - k, x);
    add_into(y[row], acc);
    k = run;
  }
}

template <typename T>
void block_run(const TileData<T>& tile, std::uint64_t kb, std::uint64_t ke,
               index_t brow, const T* x_pad, T* y_pad) {
  auto bmac = simd::block_mac_fn<T>();
  T* y_rows = y_pad + std::size_t(brow) * tile.r;
  for (std::uint64_t k = kb; k < ke; ++k)
    bmac(y_rows, tile.block_values.data() + k * std::size_t(tile.r) * tile.c,
         x_pad + std::size_t(tile.block_col[k]) * tile.c, tile.r, tile.c);
}

}  // namespace detail

template <typename T>
CoreResult<T> run_core(const TileData<T>& tile, std::span<const T> x_segment,
                       const ThreadSchedule& sched) {
  if (x_segment.size() != tile.col_span())
    throw ConfigError("x segment does not match tile column range");

  CoreResult<T> result;
  const index_t span = tile.row_span();
  const bool blocked = is_blocked(tile.format);
  const index_t pad_rows = blocked ? tile.block_rows * tile.r : span;
  std::vector<T> y(pad_rows, T{});

  // Edge blocks read a full c-wide slice of x; pad the segment with zeros.
  std::vector<T> x_pad;
  const T* x = x_segment.data();
  if (blocked) {
    x_pad.assign(std::size_t(tile.block_cols) * tile.c, T{});
    std::copy(x_segment.begin(), x_segment.end(), x_pad.begin());
    x = x_pad.data();
  }

  for (std::size_t t = 0; t < sched.ranges.size(); ++t) {
    auto [b, e] = sched.ranges[t];
    auto acc = detail::range_accounting(tile, b, e, sched.over_unit_rows);

    switch (tile.format) {
      case FormatTag::csr:
        if (sched.over_unit_rows)
          detail::csr_walk(tile, b, e, 0, tile.values.size(), x, y.data());
        else if (b < e) {
          auto [first, last] = detail::boundary_rows(tile, b, e);
          detail::csr_walk(tile, first, last + 1, b, e, x, y.data());
        }
        break;
      case FormatTag::coo: {
        std::uint64_t lo = b, hi = e;
        if (sched.over_unit_rows) {
          lo = std::lower_bound(tile.rows.begin(), tile.rows.end(),
                                static_cast<index_t>(b)) -
               tile.rows.begin();
          hi = std::lower_bound(tile.rows.begin(), tile.rows.end(),
                                static_cast<index_t>(e)) -
               tile.rows.begin();
        }
        detail::coo_walk(tile, lo, hi, x, y.data());
        break;
      }
      case FormatTag::bcsr: {
        std::uint64_t rb, re, wb, we;
        if (sched.over_unit_rows) {
          rb = b; re = e;
          wb = 0; we = tile.n_blocks();
        } else if (b < e) {
          auto [first, last] = detail::boundary_rows(tile, b, e);
          rb = first; re = last + 1;
          wb = b; we = e;
        } else {
          rb = re = wb = we = 0;
        }
        for (std::uint64_t i = rb; i < re; ++i) {
          std::uint64_t lo = std::max<std::uint64_t>(tile.block_row_ptr[i], wb);
          std::uint64_t hi = std::min<std::uint64_t>(tile.block_row_ptr[i + 1], we);
          if (hi > lo)
            detail::block_run(tile, lo, hi, static_cast<index_t>(i), x, y.data());
        }
        break;
      }
      case FormatTag::bcoo: {
        std::uint64_t lo = b, hi = e;
        if (sched.over_unit_rows) {
          lo = std::lower_bound(tile.block_row.begin(), tile.block_row.end(),
                                static_cast<index_t>(b)) -
               tile.block_row.begin();
          hi = std::lower_bound(tile.block_row.begin(), tile.block_row.end(),
                                static_cast<index_t>(e)) -
               tile.block_row.begin();
        }
        std::uint64_t k = lo;
        while (k < hi) {
          index_t brow = tile.block_row[k];
          std::uint64_t run = k;
          while (run < hi && tile.block_row[run] == brow) ++run;
          detail::block_run(tile, k, run, brow, x, y.data());
          k = run;
        }
        break;
      }
    }

    // The documented per-format access-count formulas.
    ThreadCounters tc;
    tc.work_items = acc.units;
    tc.rows_updated = acc.rows_updated;
    switch (tile.format) {
      case FormatTag::csr:
        tc.mac_ops = acc.units;
        tc.loop_iters = acc.rows_touched + acc.units;
        tc.mem_words = acc.rows_touched + 3 * acc.units + acc.rows_updated;
        break;
      case FormatTag::coo:
        tc.mac_ops = acc.units;
        tc.loop_iters = acc.units;
        tc.mem_words = 4 * acc.units + acc.rows_updated;
        break;
      case FormatTag::bcsr:
        tc.mac_ops = acc.units * tile.r * tile.c;
        tc.loop_iters = acc.rows_touched + acc.units;
        tc.mem_words =
            acc.units * (std::uint64_t(tile.r) * tile.c + 2 + tile.c) +
            acc.rows_updated;
        break;
      case FormatTag::bcoo:
        tc.mac_ops = acc.units * tile.r * tile.c;
        tc.loop_iters = acc.units;
        tc.mem_words =
            acc.units * (std::uint64_t(tile.r) * tile.c + 2 + tile.c) +
            acc.rows_updated;
        break;
    }
    switch (sched.sync) {
      case SyncMode::lock_free:
        break;
      case SyncMode::coarse_lock:
        tc.lock_acquires = acc.rows_updated > 0 ? 1 : 0;
        tc.lock_releases = tc.lock_acquires;
        break;
      case SyncMode::fine_grained_lock:
        tc.lock_acquires = acc.rows_updated;
        tc.lock_releases = acc.rows_updated;
        break;
    }
    result.counters.push_back(tc);
  }

  y.resize(span);
  result.partial_y = std::move(y);
  return result;
}

// ---------------------------------------------------------------------------
// tile extraction

namespace detail {

// Maps an element coordinate to its owning core for range-partitioned plans.
struct TileLookup {
  index_t pc = 1;
  std::vector<index_t> col_starts;               // per partition j
  std::vector<std::vector<index_t>> row_starts;  // per partition j, per stripe i

  explicit TileLookup(const PartitionPlan& plan) {
    pc = plan.scheme.kind == SchemeKind::oned ? 1 : plan.scheme.pc;
    index_t pr = plan.scheme.kind == SchemeKind::oned
                     ? static_cast<index_t>(plan.tiles.size())
                     : plan.scheme.pr;
    for (index_t j = 0; j < pc; ++j) {
      col_starts.push_back(plan.tiles[j].col0);
      std::vector<index_t> rs;
      for (index_t i = 0; i < pr; ++i) rs.push_back(plan.tiles[i * pc + j].row0);
      row_starts.push_back(std::move(rs));
    }
  }

  index_t core_of(index_t row, index_t col) const {
    auto jt = std::upper_bound(col_starts.begin(), col_starts.end(), col);
    index_t j = static_cast<index_t>(jt - col_starts.begin() - 1);
    const auto& rs = row_starts[j];
    auto it = std::upper_bound(rs.begin(), rs.end(), row);
    index_t i = static_cast<index_t>(it - rs.begin() - 1);
    return i * pc + j;
  }
};

template <typename T>
TileData<T> build_tile(std::span<const Triplet<T>> entries, const Tile& t,
                       FormatTag format, index_t r, index_t c) {
  TileData<T> tile;
  tile.format = format;
  tile.row0 = t.row0;
  tile.row1 = t.row1;
  tile.col0 = t.col0;
  tile.col1 = t.col1;
  switch (format) {
    case FormatTag::csr: {
      tile.row_ptr.assign(tile.row_span() + 1, 0);
      for (const auto& e : entries) tile.row_ptr[e.row - t.row0 + 1]++;
      for (index_t i = 0; i < tile.row_span(); ++i)
        tile.row_ptr[i + 1] += tile.row_ptr[i];
      tile.cols.reserve(entries.size());
      tile.values.reserve(entries.size());
      for (const auto& e : entries) {
        tile.cols.push_back(e.col - t.col0);
        tile.values.push_back(e.value);
      }
      break;
    }
    case FormatTag::coo: {
      for (const auto& e : entries) {
        tile.rows.push_back(e.row - t.row0);
        tile.cols.push_back(e.col - t.col0);
        tile.values.push_back(e.value);
      }
      break;
    }
    case FormatTag::bcsr:
    case FormatTag::bcoo: {
      tile.r = r;
      tile.c = c;
      tile.block_rows = static_cast<index_t>(ceil_div(tile.row_span(), r));
      tile.block_cols = static_cast<index_t>(ceil_div(tile.col_span(), c));
      // Entries are (row, col)-sorted; group into local blocks.
      std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
      keyed.reserve(entries.size());
      for (std::size_t k = 0; k < entries.size(); ++k) {
        index_t lr = (entries[k].row - t.row0) / r;
        index_t lc = (entries[k].col - t.col0) / c;
        keyed.push_back({(std::uint64_t(lr) << 32) | lc, k});
      }
      std::sort(keyed.begin(), keyed.end());
      for (const auto& [key, k] : keyed) {
        index_t lr = static_cast<index_t>(key >> 32);
        index_t lc = static_cast<index_t>(key & 0xffffffffu);
        if (tile.block_row.empty() || tile.block_row.back() != lr ||
            tile.block_col.back() != lc) {
          tile.block_row.push_back(lr);
          tile.block_col.push_back(lc);
          tile.block_values.resize(tile.block_values.size() + std::size_t(r) * c,
                                   T{});
          tile.block_true_nnz.push_back(0);
        }
        const auto& e = entries[k];
        std::size_t base = (tile.block_row.size() - 1) * std::size_t(r) * c;
        tile.block_values[base + std::size_t((e.row - t.row0) % r) * c +
                          ((e.col - t.col0) % c)] = e.value;
        tile.block_true_nnz.back()++;
      }
      if (format == FormatTag::bcsr) {
        tile.block_row_ptr.assign(tile.block_rows + 1, 0);
        for (index_t br : tile.block_row) tile.block_row_ptr[br + 1]++;
        for (index_t i = 0; i < tile.block_rows; ++i)
          tile.block_row_ptr[i + 1] += tile.block_row_ptr[i];
        tile.block_row.clear();  // BCSR addresses block rows via the pointer array
      }
      break;
    }
  }
  return tile;
}

}  // namespace detail

template <typename T>
std::vector<TileData<T>> extract_tiles(const TripletMatrix<T>& m,
                                       const PartitionPlan& plan,
                                       FormatTag format) {
  std::vector<TileData<T>> tiles;
  tiles.reserve(plan.tiles.size());

  if (plan.scheme.kind == SchemeKind::oned &&
      plan.balancing == CoreBalancing::nnz_exact) {
    for (const Tile& t : plan.tiles) {
      std::span<const Triplet<T>> slice(m.entries.data() + t.entry_begin,
                                        t.entry_end - t.entry_begin);
      tiles.push_back(detail::build_tile(slice, t, format, plan.unit_r, plan.unit_c));
    }
    return tiles;
  }

  detail::TileLookup lookup(plan);
  std::vector<std::vector<Triplet<T>>> buckets(plan.tiles.size());
  for (std::size_t i = 0; i < plan.tiles.size(); ++i)
    buckets[i].reserve(plan.tiles[i].owned_nnz);
  for (const auto& e : m.entries)
    buckets[lookup.core_of(e.row, e.col)].push_back(e);
  for (std::size_t i = 0; i < plan.tiles.size(); ++i)
    tiles.push_back(detail::build_tile(std::span<const Triplet<T>>(buckets[i]),
                                       plan.tiles[i], format, plan.unit_r,
                                       plan.unit_c));
  return tiles;
}

}  // namespace pimspmv
