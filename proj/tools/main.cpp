#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pimspmv/formats.hpp"
#include "pimspmv/kernels.hpp"
#include "pimspmv/machine.hpp"
#include "pimspmv/mmio.hpp"
#include "pimspmv/partition.hpp"
#include "pimspmv/runtime.hpp"
#include "pimspmv/simd/ops.hpp"
#include "pimspmv/synthetic.hpp"

namespace {

using namespace pimspmv;

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;

struct CommonOpts {
  std::string matrix_path;
  std::string synth_spec;
  std::optional<std::uint64_t> seed;
  std::string dtype = "int32";
  std::string machine = "default";
  index_t cores = 0;
  index_t threads = 0;
  std::vector<index_t> grid;   // pr pc
  std::vector<index_t> block = {4, 4};
  std::string x_spec = "ones";
  bool amortize_matrix = false;
  bool no_verify = false;
  std::string format = "table";
};

void add_matrix_opts(CLI::App* cmd, CommonOpts& o) {
  auto* m = cmd->add_option("--matrix,-m", o.matrix_path,
                            "Matrix Market coordinate file");
  auto* s = cmd->add_option(
      "--synth,-g", o.synth_spec,
      "synthetic matrix, e.g. identity:64, dense:32x32, banded:128:b=3, "
      "uniform:512x512:density=0.02:seed=1, zipf:1024:s=1.5:avg=8:seed=7");
  m->excludes(s);
  s->excludes(m);
  cmd->add_option("--seed", o.seed, "seed for random synthetic kinds");
  cmd->add_option("--block", o.block, "BCSR/BCOO block dims r c")->expected(2);
}

void add_machine_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--machine", o.machine,
                  "machine preset (default, tiny) or JSON config path");
  cmd->add_option("--cores", o.cores, "number of PIM cores to use (0 = all)");
  cmd->add_option("--threads", o.threads, "threads per core (0 = machine value)");
  cmd->add_option("--grid", o.grid, "2D grid pr pc (default: near-square)")
      ->expected(2);
}

void add_run_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--dtype", o.dtype,
                  "element type: int8 int16 int32 int64 float32 float64");
  cmd->add_option("--x", o.x_spec, "input vector: ones, iota, or a file path");
  cmd->add_flag("--amortize-matrix", o.amortize_matrix,
                "exclude the matrix load from total cycles");
  cmd->add_flag("--no-verify", o.no_verify, "skip the oracle check");
}

RawMatrix load_matrix(const CommonOpts& o) {
  if (!o.matrix_path.empty()) return parse_matrix_market_file(o.matrix_path);
  if (!o.synth_spec.empty()) {
    SynthSpec spec = parse_synth_spec(o.synth_spec);
    if (o.seed) spec.seed = o.seed;
    return generate_synthetic(spec);
  }
  throw ConfigError("one of --matrix or --synth is required");
}

std::vector<double> load_x(const std::string& spec, index_t n_cols) {
  if (spec == "ones") return default_x(n_cols);
  if (spec == "iota") return iota_x(n_cols);
  std::ifstream f(spec);
  if (!f) throw ConfigError("cannot open x vector file: " + spec);
  std::vector<double> x;
  double v;
  while (f >> v) x.push_back(v);
  if (x.size() != n_cols)
    throw ConfigError("x vector has " + std::to_string(x.size()) +
                      " values, need " + std::to_string(n_cols));
  return x;
}

RunConfig run_config(const CommonOpts& o) {
  RunConfig cfg;
  cfg.n_cores = o.cores;
  cfg.threads = o.threads;
  if (o.grid.size() == 2) {
    cfg.pr = o.grid[0];
    cfg.pc = o.grid[1];
    if (o.cores != 0 && o.cores != cfg.pr * cfg.pc)
      throw ConfigError("--grid and --cores disagree");
    cfg.n_cores = cfg.pr * cfg.pc;
  }
  cfg.block_r = o.block[0];
  cfg.block_c = o.block[1];
  cfg.amortize_matrix = o.amortize_matrix;
  cfg.verify = !o.no_verify;
  return cfg;
}

std::vector<std::string> resolve_kernel_list(const std::string& arg) {
  if (arg == "all") return kernel_registry();
  std::vector<std::string> names;
  std::stringstream ss(arg);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) names.push_back(tok);
  if (names.empty()) throw ConfigError("no kernels requested");
  auto registry = kernel_registry();
  for (const auto& n : names)
    if (std::find(registry.begin(), registry.end(), n) == registry.end())
      throw ConfigError("unknown kernel: " + n);
  return names;
}

int cmd_info(const CommonOpts& o, const std::string& plan_kernel) {
  RawMatrix m = load_matrix(o);
  auto counts = m.per_row_nnz();
  std::uint64_t min_r = 0, max_r = 0, bandwidth = 0;
  double mean = 0.0, cv = 0.0;
  if (m.n_rows > 0) {
    min_r = *std::min_element(counts.begin(), counts.end());
    max_r = *std::max_element(counts.begin(), counts.end());
    for (auto c : counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(m.n_rows);
    double var = 0.0;
    for (auto c : counts) {
      double d = static_cast<double>(c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(m.n_rows);
    cv = mean > 0 ? std::sqrt(var) / mean : 0.0;
  }
  for (const auto& e : m.entries)
    bandwidth = std::max<std::uint64_t>(
        bandwidth, e.row > e.col ? e.row - e.col : e.col - e.row);

  TripletMatrix<double> typed = m;
  auto bcsr = to_bcsr(typed, o.block[0], o.block[1]);
  double fill = bcsr.nnz_true > 0
                    ? static_cast<double>(bcsr.n_blocks() * o.block[0] * o.block[1]) /
                          static_cast<double>(bcsr.nnz_true)
                    : 0.0;

  nlohmann::ordered_json j;
  j["rows"] = m.n_rows;
  j["cols"] = m.n_cols;
  j["nnz"] = m.nnz();
  j["row_nnz"] = {{"min", min_r}, {"max", max_r}, {"mean", mean}, {"cv", cv}};
  j["bandwidth"] = bandwidth;
  j["block"] = {{"r", o.block[0]}, {"c", o.block[1]},
                {"n_blocks", bcsr.n_blocks()}, {"fill_ratio", fill}};

  if (!plan_kernel.empty()) {
    KernelSpec spec = parse_kernel_name(plan_kernel);
    RunConfig cfg = run_config(o);
    MachinePreset preset = resolve_machine(o.machine);
    index_t n_cores = cfg.n_cores == 0 ? preset.machine.n_cores : cfg.n_cores;
    index_t pr = cfg.pr, pc = cfg.pc;
    if (spec.scheme != SchemeKind::oned && (pr == 0 || pc == 0)) {
      pr = default_grid_rows(n_cores);
      pc = n_cores / pr;
    }
    PartitionPlan plan =
        make_plan(typed, spec, n_cores, pr, pc, cfg.block_r, cfg.block_c);
    BalanceStats stats = plan_stats(plan, width_bytes(ElementType::int32));
    j["plan"] = nlohmann::ordered_json::parse(plan_to_json(plan, stats, -1));
  }

  if (o.format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "matrix: " << m.n_rows << " x " << m.n_cols << ", nnz "
              << m.nnz() << "\n";
    std::cout << "row nnz: min " << min_r << ", max " << max_r << ", mean "
              << mean << ", cv " << cv << "\n";
    std::cout << "bandwidth: " << bandwidth << "\n";
    std::cout << "block " << o.block[0] << "x" << o.block[1] << ": "
              << bcsr.n_blocks() << " blocks, fill ratio " << fill << "\n";
    if (j.contains("plan")) std::cout << j["plan"].dump(2) << "\n";
  }
  return kExitOk;
}

void print_run_table(const ExecutionReport& r) {
  std::cout << "kernel:   " << r.spec.name << "  (dtype " << to_string(r.spec.dtype)
            << ", threads " << to_string(r.spec.thread_balancing) << ", sync "
            << to_string(r.spec.sync) << ")\n";
  std::cout << "cores:    " << r.n_cores_used << " x " << r.threads_used
            << " threads";
  if (r.spec.scheme != SchemeKind::oned)
    std::cout << "  grid " << r.pr << "x" << r.pc;
  std::cout << "\n";
  std::cout << "matrix:   " << r.n_rows << " x " << r.n_cols << ", nnz " << r.nnz
            << "\n";
  std::cout << "cycles:   in-matrix " << r.breakdown.transfer_in_matrix
            << "  in-vector " << r.breakdown.transfer_in_vector << "  kernel "
            << r.breakdown.kernel << "  out " << r.breakdown.transfer_out
            << "  merge " << r.breakdown.merge << "\n";
  std::cout << "total:    " << r.breakdown.total
            << (r.amortize_matrix ? "  (matrix load amortized)" : "") << "\n";
  std::cout << "padding:  in " << r.in_matrix.padding_bytes() +
                                      r.in_vector.padding_bytes()
            << " bytes, out " << r.out.padding_bytes() << " bytes\n";
  std::cout << "balance:  max core nnz " << r.balance.max_nnz << ", cv "
            << r.balance.cv_nnz << ", split rows " << r.balance.split_rows << "\n";
  std::cout << "correct:  " << (r.verified ? (r.correct ? "yes" : "NO") : "skipped")
            << "\n";
}

int cmd_run(const CommonOpts& o, const std::string& kernel, bool print_y) {
  RawMatrix m = load_matrix(o);
  KernelRequest req;
  req.name = kernel;
  req.dtype = element_type_from_string(o.dtype);
  MachinePreset preset = resolve_machine(o.machine);
  RunConfig cfg = run_config(o);
  ExecutionReport rep =
      run_named(m, req, preset, cfg, load_x(o.x_spec, m.n_cols));
  if (o.format == "json") {
    std::cout << report_to_json(rep, print_y) << "\n";
  } else if (o.format == "csv") {
    SweepRow row{kernel, rep, ""};
    std::cout << sweep_csv_header() << "\n" << sweep_row_to_csv(row) << "\n";
  } else {
    print_run_table(rep);
  }
  return kExitOk;
}

int cmd_sweep(const CommonOpts& o, const std::string& kernels) {
  RawMatrix m = load_matrix(o);
  MachinePreset preset = resolve_machine(o.machine);
  RunConfig cfg = run_config(o);
  SweepResult res = sweep(m, resolve_kernel_list(kernels),
                          element_type_from_string(o.dtype), preset, cfg,
                          load_x(o.x_spec, m.n_cols));
  if (o.format == "json") {
    std::cout << sweep_to_json(res) << "\n";
  } else {
    std::cout << sweep_csv_header() << "\n";
    for (const SweepRow& row : res.rows)
      std::cout << sweep_row_to_csv(row) << "\n";
    if (o.format == "table" && !res.best.empty())
      std::cout << "# best: " << res.best << "\n";
  }
  return kExitOk;
}

int cmd_verify(const CommonOpts& o, const std::string& kernels) {
  RawMatrix m = load_matrix(o);
  MachinePreset preset = resolve_machine(o.machine);
  RunConfig cfg = run_config(o);
  cfg.verify = true;
  auto x = load_x(o.x_spec, m.n_cols);
  ElementType dtype = element_type_from_string(o.dtype);
  bool all_ok = true;
  for (const std::string& name : resolve_kernel_list(kernels)) {
    KernelRequest req;
    req.name = name;
    req.dtype = dtype;
    try {
      run_named(m, req, preset, cfg, x);
      std::cout << "ok " << name << "\n";
    } catch (const OracleMismatch& e) {
      std::cout << "FAIL " << name << ": " << e.what() << "\n";
      all_ok = false;
    } catch (const CapacityError& e) {
      std::cout << "skip " << name << ": " << e.what() << "\n";
    } catch (const PlanError& e) {
      std::cout << "skip " << name << ": " << e.what() << "\n";
    }
  }
  return all_ok ? kExitOk : kExitVerify;
}

int cmd_list_kernels(bool taxonomy) {
  for (const std::string& name : kernel_registry()) std::cout << name << "\n";
  if (taxonomy) {
    std::cout << "formats: CSR COO BCSR BCOO\n";
    std::cout << "dtypes: int8 int16 int32 int64 float32 float64\n";
    std::cout << "sync: lock-free coarse fine\n";
    std::cout << "schemes: 1D 2D-eqs 2D-eqw 2D-var\n";
    std::cout << "thread-balancing: rows nnz blocks\n";
    std::cout << "simd: " << simd::backend_name() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SpMV kernel library and cost simulator for near-bank PIM systems"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string kernel, kernels = "all", plan_kernel;
  bool taxonomy = false, print_y = false;

  auto* info = app.add_subcommand("info", "sparsity report for a matrix");
  add_matrix_opts(info, o);
  add_machine_opts(info, o);
  info->add_option("--plan", plan_kernel, "also print the partition plan for a kernel");
  info->add_option("--format", o.format, "output format: table, json");

  auto* run = app.add_subcommand("run", "run one kernel and report cycles");
  add_matrix_opts(run, o);
  add_machine_opts(run, o);
  add_run_opts(run, o);
  run->add_option("--kernel,-k", kernel, "kernel name (see list-kernels)")
      ->required();
  run->add_option("--format", o.format, "output format: table, json, csv");
  run->add_flag("--print-y", print_y, "include the output vector in JSON");

  auto* sw = app.add_subcommand("sweep", "run many kernels, one report row each");
  add_matrix_opts(sw, o);
  add_machine_opts(sw, o);
  add_run_opts(sw, o);
  sw->add_option("--kernels,-k", kernels, "comma-separated kernel names or 'all'");
  sw->add_option("--format", o.format, "output format: csv, json, table");

  auto* ver = app.add_subcommand("verify", "check kernels against the oracle");
  add_matrix_opts(ver, o);
  add_machine_opts(ver, o);
  add_run_opts(ver, o);
  ver->add_option("--kernels,-k", kernels, "comma-separated kernel names or 'all'");

  auto* lk = app.add_subcommand("list-kernels", "print the kernel registry");
  lk->add_flag("--taxonomy", taxonomy, "also print the taxonomy dimensions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("info")) return cmd_info(o, plan_kernel);
    if (app.got_subcommand("run")) return cmd_run(o, kernel, print_y);
    if (app.got_subcommand("sweep")) {
      if (o.format == "table") o.format = "csv";
      return cmd_sweep(o, kernels);
    }
    if (app.got_subcommand("verify")) return cmd_verify(o, kernels);
    if (app.got_subcommand("list-kernels")) return cmd_list_kernels(taxonomy);
  } catch (const OracleMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerify;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
