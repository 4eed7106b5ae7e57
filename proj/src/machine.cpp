#include "pimspmv/machine.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pimspmv {

void MachineConfig::validate() const {
  if (n_cores == 0 || threads_per_core == 0 || bank_capacity_bytes == 0 ||
      transfer_group_size == 0)
    throw std::invalid_argument("machine config fields must be positive");
  if (transfer_group_size > n_cores)
    throw std::invalid_argument("transfer_group_size exceeds n_cores");
}

void CostModel::validate() const {
  if (host_bw_bytes_per_cycle == 0)
    throw std::invalid_argument("host bandwidth must be positive");
  if (op_cost(ElementType::float32) < op_cost(ElementType::int32))
    throw std::invalid_argument(
        "c_op[float32] must be >= c_op[int32] (software-emulated floats)");
}

MachinePreset machine_preset(const std::string& name) {
  MachinePreset p;  // defaults are the "default" preset
  if (name == "default") return p;
  if (name == "tiny") {
    p.machine.n_cores = 8;
    p.machine.threads_per_core = 4;
    p.machine.bank_capacity_bytes = 1ull << 20;
    p.machine.transfer_group_size = 4;
    return p;
  }
  throw std::invalid_argument("unknown machine preset: " + name);
}

namespace {

const char* kOpKeys[6] = {"int8", "int16", "int32", "int64", "float32", "float64"};

}  // namespace

MachinePreset load_machine_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open machine config: " + path);
  nlohmann::json j;
  f >> j;
  MachinePreset p;
  if (j.contains("machine")) {
    const auto& m = j["machine"];
    p.machine.n_cores = m.value("n_cores", p.machine.n_cores);
    p.machine.threads_per_core = m.value("threads_per_core", p.machine.threads_per_core);
    p.machine.bank_capacity_bytes =
        m.value("bank_capacity_bytes", p.machine.bank_capacity_bytes);
    p.machine.scratchpad_bytes = m.value("scratchpad_bytes", p.machine.scratchpad_bytes);
    p.machine.transfer_group_size =
        m.value("transfer_group_size", p.machine.transfer_group_size);
  }
  if (j.contains("cost")) {
    const auto& c = j["cost"];
    if (c.contains("c_op"))
      for (std::size_t i = 0; i < 6; ++i)
        p.cost.c_op[i] = c["c_op"].value(kOpKeys[i], p.cost.c_op[i]);
    p.cost.c_loop = c.value("c_loop", p.cost.c_loop);
    p.cost.c_word = c.value("c_word", p.cost.c_word);
    p.cost.c_lock = c.value("c_lock", p.cost.c_lock);
    p.cost.c_barrier = c.value("c_barrier", p.cost.c_barrier);
    p.cost.host_bw_bytes_per_cycle =
        c.value("host_bw_bytes_per_cycle", p.cost.host_bw_bytes_per_cycle);
    p.cost.host_lat_cycles = c.value("host_lat_cycles", p.cost.host_lat_cycles);
    p.cost.merge_cycles_per_element =
        c.value("merge_cycles_per_element", p.cost.merge_cycles_per_element);
  }
  p.machine.validate();
  p.cost.validate();
  return p;
}

MachinePreset resolve_machine(const std::string& preset_or_path) {
  try {
    return machine_preset(preset_or_path);
  } catch (const std::invalid_argument&) {
    return load_machine_json(preset_or_path);
  }
}

std::string machine_to_json(const MachinePreset& p, int indent) {
  nlohmann::ordered_json j;
  auto& m = j["machine"];
  m["n_cores"] = p.machine.n_cores;
  m["threads_per_core"] = p.machine.threads_per_core;
  m["bank_capacity_bytes"] = p.machine.bank_capacity_bytes;
  m["scratchpad_bytes"] = p.machine.scratchpad_bytes;
  m["transfer_group_size"] = p.machine.transfer_group_size;
  auto& c = j["cost"];
  auto& ops = c["c_op"];
  for (std::size_t i = 0; i < 6; ++i) ops[kOpKeys[i]] = p.cost.c_op[i];
  c["c_loop"] = p.cost.c_loop;
  c["c_word"] = p.cost.c_word;
  c["c_lock"] = p.cost.c_lock;
  c["c_barrier"] = p.cost.c_barrier;
  c["host_bw_bytes_per_cycle"] = p.cost.host_bw_bytes_per_cycle;
  c["host_lat_cycles"] = p.cost.host_lat_cycles;
  c["merge_cycles_per_element"] = p.cost.merge_cycles_per_element;
  return j.dump(indent);
}

ThreadStats price_counters(const ThreadCounters& c, const CostModel& cm,
                           ElementType dtype) {
  ThreadStats s;
  s.work_items = c.work_items;
  s.compute_cycles = c.mac_ops * cm.op_cost(dtype) + c.loop_iters * cm.c_loop;
  s.mem_words = c.mem_words;
  s.lock_acquires = c.lock_acquires;
  s.lock_releases = c.lock_releases;
  s.barriers = c.barriers;
  return s;
}

cycles_t core_time(std::span<const ThreadStats> threads, const CostModel& cm) {
  cycles_t worst_thread = 0;
  cycles_t port_total = 0;
  for (const ThreadStats& t : threads) {
    cycles_t mem = t.mem_words * cm.c_word;
    cycles_t sync = (t.lock_acquires + t.lock_releases) * cm.c_lock +
                    t.barriers * cm.c_barrier;
    worst_thread = std::max(worst_thread, t.compute_cycles + sync + mem);
    port_total += mem;
  }
  return std::max(worst_thread, port_total) + cm.c_barrier;
}

cycles_t machine_kernel_time(std::span<const cycles_t> per_core) {
  cycles_t m = 0;
  for (cycles_t c : per_core) m = std::max(m, c);
  return m;
}

TransferCost parallel_transfer(std::span<const bytes_t> payloads,
                               TransferDirection, const MachineConfig& mc,
                               const CostModel& cm) {
  if (payloads.empty()) throw std::invalid_argument("empty transfer");
  for (std::size_t i = 0; i < payloads.size(); ++i)
    if (payloads[i] > mc.bank_capacity_bytes)
      throw CapacityError("transfer payload for bank " + std::to_string(i) +
                          " exceeds bank capacity");
  TransferCost tc;
  const std::size_t group = mc.transfer_group_size;
  for (std::size_t g = 0; g < payloads.size(); g += group) {
    std::size_t end = std::min(payloads.size(), g + group);
    bytes_t group_max = 0;
    for (std::size_t i = g; i < end; ++i) {
      tc.payload_bytes += payloads[i];
      group_max = std::max(group_max, payloads[i]);
    }
    tc.padded_bytes += group_max * (end - g);
    tc.batches += 1;
  }
  tc.cycles = tc.batches * cm.host_lat_cycles +
              ceil_div(tc.padded_bytes, cm.host_bw_bytes_per_cycle);
  return tc;
}

void check_capacity(std::span<const bytes_t> per_core_bytes,
                    const MachineConfig& mc) {
  for (std::size_t i = 0; i < per_core_bytes.size(); ++i)
    if (per_core_bytes[i] > mc.bank_capacity_bytes)
      throw CapacityError("core " + std::to_string(i) + " needs " +
                          std::to_string(per_core_bytes[i]) +
                          " bytes, bank capacity is " +
                          std::to_string(mc.bank_capacity_bytes));
}

}  // namespace pimspmv
