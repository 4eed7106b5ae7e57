#include "pimspmv/runtime.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace pimspmv {

index_t default_grid_rows(index_t n_cores) {
  index_t pr = static_cast<index_t>(std::sqrt(static_cast<double>(n_cores)));
  while (pr > 1 && n_cores % pr != 0) --pr;
  return std::max<index_t>(pr, 1);
}

KernelSpec resolve_kernel(const KernelRequest& req) {
  KernelSpec spec = parse_kernel_name(req.name);
  spec.dtype = req.dtype;
  if (req.thread_balancing) spec.thread_balancing = *req.thread_balancing;
  if (req.sync) {
    spec.sync = *req.sync;
  } else if (req.thread_balancing) {
    spec.sync = spec.thread_balancing == ThreadBalancing::rows
                    ? SyncMode::lock_free
                    : SyncMode::coarse_lock;
  }
  spec.validate();
  return spec;
}

ExecutionReport run_named(const RawMatrix& raw, const KernelRequest& req,
                          const MachinePreset& machine, const RunConfig& cfg,
                          const std::vector<double>& x_raw) {
  KernelSpec spec = resolve_kernel(req);
  return dispatch_element_type(spec.dtype, [&](auto tag) {
    using T = decltype(tag);
    TripletMatrix<T> m = convert_matrix<T>(raw);
    std::vector<T> x;
    x.reserve(x_raw.size());
    for (double v : x_raw) x.push_back(convert_value<T>(v));
    return run_end_to_end<T>(m, spec, machine, cfg, x);
  });
}

SweepResult sweep(const RawMatrix& raw, const std::vector<std::string>& names,
                  ElementType dtype, const MachinePreset& machine,
                  const RunConfig& cfg, const std::vector<double>& x_raw) {
  SweepResult res;
  for (const std::string& name : names) {
    SweepRow row;
    row.name = name;
    KernelRequest req;
    req.name = name;
    req.dtype = dtype;
    try {
      row.report = run_named(raw, req, machine, cfg, x_raw);
    } catch (const CapacityError& e) {
      row.error = e.what();
    } catch (const PlanError& e) {
      row.error = e.what();
    } catch (const ConfigError& e) {
      row.error = e.what();
    }
    res.rows.push_back(std::move(row));
  }
  std::sort(res.rows.begin(), res.rows.end(), [](const SweepRow& a,
                                                 const SweepRow& b) {
    const bool ra = a.report.has_value(), rb = b.report.has_value();
    if (ra != rb) return ra;  // skipped rows sink to the bottom
    if (ra && rb && a.report->breakdown.total != b.report->breakdown.total)
      return a.report->breakdown.total < b.report->breakdown.total;
    return a.name < b.name;
  });
  if (!res.rows.empty() && res.rows.front().report)
    res.best = res.rows.front().name;
  return res;
}

std::vector<double> default_x(index_t n_cols) {
  return std::vector<double>(n_cols, 1.0);
}

std::vector<double> iota_x(index_t n_cols) {
  std::vector<double> x(n_cols);
  for (index_t i = 0; i < n_cols; ++i) x[i] = static_cast<double>(i + 1);
  return x;
}

namespace {

constexpr int kSchemaVersion = 1;

nlohmann::ordered_json spec_json(const KernelSpec& spec) {
  nlohmann::ordered_json j;
  j["name"] = spec.name;
  j["format"] = std::string(to_string(spec.format));
  j["scheme"] = std::string(to_string(spec.scheme));
  j["core_balancing"] = std::string(to_string(spec.core_balancing));
  j["thread_balancing"] = std::string(to_string(spec.thread_balancing));
  j["sync"] = std::string(to_string(spec.sync));
  j["dtype"] = std::string(to_string(spec.dtype));
  return j;
}

nlohmann::ordered_json transfer_json(const TransferCost& t) {
  nlohmann::ordered_json j;
  j["payload_bytes"] = t.payload_bytes;
  j["padded_bytes"] = t.padded_bytes;
  j["padding_bytes"] = t.padding_bytes();
  j["batches"] = t.batches;
  j["cycles"] = t.cycles;
  return j;
}

nlohmann::ordered_json report_json_obj(const ExecutionReport& rep, bool include_y) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kernel"] = spec_json(rep.spec);
  j["machine"] = nlohmann::ordered_json::parse(machine_to_json(rep.machine, -1));
  j["cores_used"] = rep.n_cores_used;
  j["threads_used"] = rep.threads_used;
  if (rep.spec.scheme != SchemeKind::oned) {
    j["pr"] = rep.pr;
    j["pc"] = rep.pc;
  }
  j["matrix"] = {{"rows", rep.n_rows}, {"cols", rep.n_cols}, {"nnz", rep.nnz}};
  j["amortize_matrix"] = rep.amortize_matrix;
  auto& b = j["breakdown"];
  b["transfer_in_matrix_cycles"] = rep.breakdown.transfer_in_matrix;
  b["transfer_in_vector_cycles"] = rep.breakdown.transfer_in_vector;
  b["kernel_cycles"] = rep.breakdown.kernel;
  b["transfer_out_cycles"] = rep.breakdown.transfer_out;
  b["merge_cycles"] = rep.breakdown.merge;
  b["total_cycles"] = rep.breakdown.total;
  j["transfer_in_matrix"] = transfer_json(rep.in_matrix);
  j["transfer_in_vector"] = transfer_json(rep.in_vector);
  j["transfer_out"] = transfer_json(rep.out);
  j["per_core_cycles"] = rep.per_core_cycles;
  auto& bal = j["balance"];
  bal["min_nnz"] = rep.balance.min_nnz;
  bal["max_nnz"] = rep.balance.max_nnz;
  bal["mean_nnz"] = rep.balance.mean_nnz;
  bal["cv_nnz"] = rep.balance.cv_nnz;
  bal["split_rows"] = rep.balance.split_rows;
  bal["vector_segment_bytes"] = rep.balance.vector_segment_bytes;
  j["merge_elements"] = rep.merge_elements;
  j["verified"] = rep.verified;
  j["correct"] = rep.verified ? nlohmann::ordered_json(rep.correct)
                              : nlohmann::ordered_json(nullptr);
  if (include_y) {
    if (!rep.y_int.empty()) j["y"] = rep.y_int;
    else j["y"] = rep.y_float;
  }
  return j;
}

}  // namespace

std::string report_to_json(const ExecutionReport& rep, bool include_y, int indent) {
  return report_json_obj(rep, include_y).dump(indent);
}

std::string sweep_csv_header() {
  return "name,format,scheme,core_balancing,thread_balancing,sync,dtype,"
         "cores,threads,rows,cols,nnz,"
         "transfer_in_matrix_cycles,transfer_in_vector_cycles,kernel_cycles,"
         "transfer_out_cycles,merge_cycles,total_cycles,"
         "in_padding_bytes,out_padding_bytes,max_core_nnz,status";
}

std::string sweep_row_to_csv(const SweepRow& row) {
  std::ostringstream s;
  if (!row.report) {
    s << row.name << ",,,,,,,,,,,,,,,,,,,,,skipped";
    return s.str();
  }
  const ExecutionReport& r = *row.report;
  s << r.spec.name << ',' << to_string(r.spec.format) << ','
    << to_string(r.spec.scheme) << ',' << to_string(r.spec.core_balancing) << ','
    << to_string(r.spec.thread_balancing) << ',' << to_string(r.spec.sync) << ','
    << to_string(r.spec.dtype) << ',' << r.n_cores_used << ',' << r.threads_used
    << ',' << r.n_rows << ',' << r.n_cols << ',' << r.nnz << ','
    << r.breakdown.transfer_in_matrix << ',' << r.breakdown.transfer_in_vector
    << ',' << r.breakdown.kernel << ',' << r.breakdown.transfer_out << ','
    << r.breakdown.merge << ',' << r.breakdown.total << ','
    << r.in_matrix.padding_bytes() + r.in_vector.padding_bytes() << ','
    << r.out.padding_bytes() << ',' << r.balance.max_nnz << ','
    << (r.verified ? (r.correct ? "ok" : "fail") : "unverified");
  return s.str();
}

std::string sweep_to_json(const SweepResult& res, int indent) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["best"] = res.best;
  auto& rows = j["rows"];
  rows = nlohmann::ordered_json::array();
  for (const SweepRow& row : res.rows) {
    if (row.report) {
      rows.push_back(report_json_obj(*row.report, false));
    } else {
      nlohmann::ordered_json rj;
      rj["kernel"] = {{"name", row.name}};
      rj["skipped"] = row.error;
      rows.push_back(std::move(rj));
    }
  }
  return j.dump(indent);
}

}  // namespace pimspmv
