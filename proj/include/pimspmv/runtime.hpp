#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pimspmv/kernels.hpp"
#include "pimspmv/machine.hpp"
#include "pimspmv/partition.hpp"

namespace pimspmv {

struct OracleMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reference result: storage-order traversal in the dtype's own arithmetic.
// Verification compares against this; it deliberately shares no code with
// the tile kernels.
template <typename T>
std::vector<T> spmv_oracle(const TripletMatrix<T>& m, std::span<const T> x) {
  if (x.size() != m.n_cols) throw ConfigError("x length does not match n_cols");
  std::vector<T> y(m.n_rows, T{});
  for (const auto& e : m.entries)
    y[e.row] = wrapping_mul_add(y[e.row], e.value, x[e.col]);
  return y;
}

template <typename T>
bool values_match(T got, T want) {
  if constexpr (std::is_integral_v<T>) {
    return got == want;
  } else {
    if (got == want) return true;
    double tol = std::is_same_v<T, float> ? 1e-5 : 1e-12;
    double a = std::abs(static_cast<double>(got));
    double b = std::abs(static_cast<double>(want));
    return std::abs(static_cast<double>(got) - static_cast<double>(want)) <=
           tol * std::max(a, b);
  }
}

struct RunConfig {
  index_t n_cores = 0;   // 0: use the whole machine
  index_t threads = 0;   // 0: machine threads_per_core
  index_t pr = 0, pc = 0;  // 2D grid; 0,0: near-square factorization
  index_t block_r = 4, block_c = 4;
  bool amortize_matrix = false;  // exclude matrix load from total_cycles
  bool verify = true;
};

struct TimeBreakdown {
  cycles_t transfer_in_matrix = 0;
  cycles_t transfer_in_vector = 0;
  cycles_t kernel = 0;
  cycles_t transfer_out = 0;
  cycles_t merge = 0;
  cycles_t total = 0;  // sum of phases; matrix load excluded when amortized

  cycles_t transfer_in() const { return transfer_in_matrix + transfer_in_vector; }
};

struct ExecutionReport {
  KernelSpec spec;
  MachinePreset machine;
  index_t n_cores_used = 0;
  index_t threads_used = 0;
  index_t pr = 1, pc = 1;
  index_t n_rows = 0, n_cols = 0;
  std::uint64_t nnz = 0;
  bool amortize_matrix = false;

  TimeBreakdown breakdown;
  TransferCost in_matrix, in_vector, out;
  std::vector<cycles_t> per_core_cycles;
  BalanceStats balance;
  std::uint64_t merge_elements = 0;

  bool verified = false;
  bool correct = false;

  // Output vector, in the representation that is exact for the dtype.
  std::vector<std::int64_t> y_int;
  std::vector<double> y_float;
};

index_t default_grid_rows(index_t n_cores);  // near-square factor, pr <= pc

// ---------------------------------------------------------------------------

template <typename T>
PartitionPlan make_plan(const TripletMatrix<T>& m, const KernelSpec& spec,
                        index_t n_cores, index_t pr, index_t pc,
                        index_t block_r, index_t block_c) {
  PlanInput input = make_plan_input(m, spec.format, block_r, block_c);
  switch (spec.scheme) {
    case SchemeKind::oned:
      return plan_1d(input, n_cores, spec.core_balancing);
    case SchemeKind::twod_equally_sized:
      return plan_2d_equally_sized(input, pr, pc);
    case SchemeKind::twod_equally_wide:
      return plan_2d_equally_wide(input, pr, pc);
    case SchemeKind::twod_variable:
      return plan_2d_variable(input, pr, pc);
  }
  throw ConfigError("unknown scheme");
}

template <typename T>
ExecutionReport run_end_to_end(const TripletMatrix<T>& m, const KernelSpec& spec,
                               const MachinePreset& machine,
                               const RunConfig& cfg, std::span<const T> x) {
  machine.machine.validate();
  machine.cost.validate();
  if (x.size() != m.n_cols) throw ConfigError("x length does not match n_cols");

  ExecutionReport rep;
  rep.spec = spec;
  rep.machine = machine;
  rep.amortize_matrix = cfg.amortize_matrix;
  rep.n_rows = m.n_rows;
  rep.n_cols = m.n_cols;
  rep.nnz = m.nnz();

  rep.threads_used = cfg.threads == 0 ? machine.machine.threads_per_core
                                      : cfg.threads;
  if (rep.threads_used > machine.machine.threads_per_core)
    throw ConfigError("requested threads exceed threads_per_core");

  index_t n_cores = cfg.n_cores == 0 ? machine.machine.n_cores : cfg.n_cores;
  if (n_cores > machine.machine.n_cores)
    throw ConfigError("requested cores exceed the machine");
  if (spec.scheme != SchemeKind::oned) {
    rep.pr = cfg.pr;
    rep.pc = cfg.pc;
    if (rep.pr == 0 || rep.pc == 0) {
      rep.pr = default_grid_rows(n_cores);
      rep.pc = n_cores / rep.pr;
    }
    if (rep.pr * rep.pc != n_cores)
      throw ConfigError("pr*pc must equal the core count");
  }
  rep.n_cores_used = n_cores;

  const std::size_t width = width_bytes(spec.dtype);
  PartitionPlan plan = make_plan(m, spec, n_cores, rep.pr, rep.pc, cfg.block_r,
                                 cfg.block_c);
  rep.balance = plan_stats(plan, width);
  auto tiles = extract_tiles(m, plan, spec.format);

  // Capacity: tile storage + vector segment + output slice per bank.
  std::vector<bytes_t> resident, matrix_payload, vector_payload, out_payload;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    bytes_t storage = tiles[i].storage_bytes();
    auto [c0, c1] = plan.vector_segments[i];
    bytes_t seg = bytes_t(c1 - c0) * width;
    bytes_t outb = bytes_t(tiles[i].row_span()) * width;
    resident.push_back(storage + seg + outb);
    matrix_payload.push_back(storage);
    vector_payload.push_back(seg);
    out_payload.push_back(outb);
  }
  check_capacity(resident, machine.machine);

  rep.in_matrix = parallel_transfer(matrix_payload, TransferDirection::to_banks,
                                    machine.machine, machine.cost);
  rep.in_vector = parallel_transfer(vector_payload, TransferDirection::to_banks,
                                    machine.machine, machine.cost);

  // Kernel phase: every core runs independently, the phase ends with the
  // slowest one.
  std::vector<T> y(m.n_rows, T{});
  rep.per_core_cycles.reserve(tiles.size());
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const TileData<T>& tile = tiles[i];
    ThreadSchedule sched = schedule_threads(tile, rep.threads_used,
                                            spec.thread_balancing, spec.sync);
    std::span<const T> seg(x.data() + tile.col0, tile.col_span());
    CoreResult<T> res = run_core(tile, seg, sched);
    std::vector<ThreadStats> stats;
    stats.reserve(res.counters.size());
    for (const auto& c : res.counters)
      stats.push_back(price_counters(c, machine.cost, spec.dtype));
    rep.per_core_cycles.push_back(core_time(stats, machine.cost));
    // Host assembly accumulates partials in ascending core id order.
    simd::accumulate(y.data() + tile.row0, res.partial_y.data(),
                     res.partial_y.size());
  }
  rep.breakdown.kernel = machine_kernel_time(rep.per_core_cycles);

  rep.out = parallel_transfer(out_payload, TransferDirection::from_banks,
                              machine.machine, machine.cost);

  for (const MergeEntry& e : plan.merge_map) rep.merge_elements += e.cores.size();
  rep.breakdown.merge = rep.merge_elements * machine.cost.merge_cycles_per_element;

  rep.breakdown.transfer_in_matrix = rep.in_matrix.cycles;
  rep.breakdown.transfer_in_vector = rep.in_vector.cycles;
  rep.breakdown.transfer_out = rep.out.cycles;
  rep.breakdown.total = (cfg.amortize_matrix ? 0 : rep.breakdown.transfer_in_matrix) +
                        rep.breakdown.transfer_in_vector + rep.breakdown.kernel +
                        rep.breakdown.transfer_out + rep.breakdown.merge;

  if (cfg.verify) {
    std::vector<T> want = spmv_oracle(m, x);
    rep.verified = true;
    rep.correct = true;
    for (index_t i = 0; i < m.n_rows; ++i) {
      if (!values_match(y[i], want[i])) {
        rep.correct = false;
        throw OracleMismatch("kernel " + spec.name + " differs from oracle at row " +
                             std::to_string(i));
      }
    }
  }

  if constexpr (std::is_integral_v<T>) {
    rep.y_int.assign(y.begin(), y.end());
  } else {
    rep.y_float.assign(y.begin(), y.end());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// type-erased entry points used by the CLI and the sweep driver

struct KernelRequest {
  std::string name;
  ElementType dtype = ElementType::int32;
  std::optional<ThreadBalancing> thread_balancing;  // override name default
  std::optional<SyncMode> sync;
};

KernelSpec resolve_kernel(const KernelRequest& req);

ExecutionReport run_named(const RawMatrix& raw, const KernelRequest& req,
                          const MachinePreset& machine, const RunConfig& cfg,
                          const std::vector<double>& x_raw);

struct SweepRow {
  std::string name;
  std::optional<ExecutionReport> report;  // empty when skipped
  std::string error;                      // capacity/config reason when skipped
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (total_cycles, name)
  std::string best;            // fastest verified kernel, empty if none ran
};

// Runs every requested kernel; capacity and configuration failures are
// recorded per row and the sweep continues. Correctness failures abort.
SweepResult sweep(const RawMatrix& raw, const std::vector<std::string>& names,
                  ElementType dtype, const MachinePreset& machine,
                  const RunConfig& cfg, const std::vector<double>& x_raw);

std::vector<double> default_x(index_t n_cols);               // all ones
std::vector<double> iota_x(index_t n_cols);                  // 1, 2, 3, ...

std::string report_to_json(const ExecutionReport& rep, bool include_y,
                           int indent = 2);
std::string sweep_csv_header();
std::string sweep_row_to_csv(const SweepRow& row);
std::string sweep_to_json(const SweepResult& res, int indent = 2);

}  // namespace pimspmv
