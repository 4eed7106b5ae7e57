#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pimspmv/types.hpp"

namespace pimspmv {

// Geometry of the simulated near-bank system: one core per DRAM bank, no
// channel between cores, host reaches banks in same-size parallel batches.
struct MachineConfig {
  index_t n_cores = 2048;
  index_t threads_per_core = 16;
  bytes_t bank_capacity_bytes = 64ull << 20;
  bytes_t scratchpad_bytes = 64ull << 10;  // documented, not a cost term
  index_t transfer_group_size = 64;

  void validate() const;
};

// Every coefficient is cycles (or bytes per cycle for the host link).
struct CostModel {
  std::array<cycles_t, 6> c_op = {4, 4, 4, 4, 32, 56};  // per MAC, by ElementType
  cycles_t c_loop = 2;     // per loop-control iteration
  cycles_t c_word = 8;     // per 8-byte word between bank and core
  cycles_t c_lock = 8;     // per lock acquire or release
  cycles_t c_barrier = 64; // per barrier
  cycles_t host_bw_bytes_per_cycle = 16;
  cycles_t host_lat_cycles = 2000;
  cycles_t merge_cycles_per_element = 1;

  cycles_t op_cost(ElementType t) const { return c_op[static_cast<std::size_t>(t)]; }
  void validate() const;
};

struct MachinePreset {
  MachineConfig machine;
  CostModel cost;
};

// Named presets: "default" (the documented full-size system) and "tiny"
// (8 cores, 4 threads) for tests and examples.
MachinePreset machine_preset(const std::string& name);
MachinePreset load_machine_json(const std::string& path);
MachinePreset resolve_machine(const std::string& preset_or_path);
std::string machine_to_json(const MachinePreset& p, int indent = 2);

// Raw per-thread event counts produced by a kernel run. Pricing into cycles
// happens here, keeping the kernels cost-model-agnostic.
struct ThreadCounters {
  std::uint64_t work_items = 0;  // entries or blocks processed
  std::uint64_t mac_ops = 0;     // multiply-accumulates (blocks count r*c each)
  std::uint64_t loop_iters = 0;
  std::uint64_t mem_words = 0;
  std::uint64_t rows_updated = 0;
  std::uint64_t lock_acquires = 0;
  std::uint64_t lock_releases = 0;
  std::uint64_t barriers = 0;
};

struct ThreadStats {
  std::uint64_t work_items = 0;
  cycles_t compute_cycles = 0;
  std::uint64_t mem_words = 0;
  std::uint64_t lock_acquires = 0;
  std::uint64_t lock_releases = 0;
  std::uint64_t barriers = 0;
};

ThreadStats price_counters(const ThreadCounters& c, const CostModel& cm,
                           ElementType dtype);

// Core time under a serialized bank port:
//   max( max_t(compute_t + sync_t + mem_t), sum_t(mem_t) ) + c_barrier
// with mem_t = mem_words_t * c_word and
// sync_t = (acquires_t + releases_t) * c_lock + barriers_t * c_barrier.
cycles_t core_time(std::span<const ThreadStats> threads, const CostModel& cm);

// Cores run independently; the machine-level kernel phase is the slowest core.
cycles_t machine_kernel_time(std::span<const cycles_t> per_core);

struct TransferCost {
  bytes_t payload_bytes = 0;
  bytes_t padded_bytes = 0;
  std::uint64_t batches = 0;
  cycles_t cycles = 0;

  bytes_t padding_bytes() const { return padded_bytes - payload_bytes; }
};

enum class TransferDirection { to_banks, from_banks };

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Banks move data in index-ordered groups of transfer_group_size; within a
// group every bank moves the size of the largest payload, the difference is
// padding. cycles = batches * host_lat + ceil(padded / host_bw).
TransferCost parallel_transfer(std::span<const bytes_t> payloads,
                               TransferDirection dir, const MachineConfig& mc,
                               const CostModel& cm);

// per_core_bytes = tile storage + vector segment + output slice, computed by
// the caller from the documented layout formulas.
void check_capacity(std::span<const bytes_t> per_core_bytes,
                    const MachineConfig& mc);

}  // namespace pimspmv
