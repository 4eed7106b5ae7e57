#include "pimspmv/kernels.hpp"

namespace pimspmv {

std::string_view to_string(ThreadBalancing tb) {
  switch (tb) {
    case ThreadBalancing::rows: return "rows";
    case ThreadBalancing::nnz: return "nnz";
    case ThreadBalancing::blocks: return "blocks";
  }
  return "?";
}

std::string_view to_string(SyncMode s) {
  switch (s) {
    case SyncMode::lock_free: return "lock-free";
    case SyncMode::coarse_lock: return "coarse";
    case SyncMode::fine_grained_lock: return "fine";
  }
  return "?";
}

ThreadBalancing thread_balancing_from_string(std::string_view s) {
  if (s == "rows") return ThreadBalancing::rows;
  if (s == "nnz") return ThreadBalancing::nnz;
  if (s == "blocks") return ThreadBalancing::blocks;
  throw ConfigError("unknown thread balancing: " + std::string(s));
}

SyncMode sync_mode_from_string(std::string_view s) {
  if (s == "lock-free" || s == "lockfree") return SyncMode::lock_free;
  if (s == "coarse") return SyncMode::coarse_lock;
  if (s == "fine") return SyncMode::fine_grained_lock;
  throw ConfigError("unknown sync mode: " + std::string(s));
}

void KernelSpec::validate() const {
  const bool blocked = is_blocked(format);
  if ((core_balancing == CoreBalancing::blocks ||
       core_balancing == CoreBalancing::nnz_block_granularity) &&
      !blocked)
    throw ConfigError(name + ": block-granularity core balancing needs BCSR/BCOO");
  if (core_balancing == CoreBalancing::nnz_exact && format != FormatTag::coo)
    throw ConfigError(name + ": exact nnz core balancing needs COO");
  if (thread_balancing == ThreadBalancing::blocks && !blocked)
    throw ConfigError(name + ": blocks thread balancing needs BCSR/BCOO");
}

std::vector<std::string> kernel_registry() {
  // 9 one-dimensional kernels: suffix picks the core balancing.
  std::vector<std::string> names = {
      "1D-CSR.row",    "1D-CSR.nnz",   "1D-COO.row",
      "1D-COO.nnz-rgrn", "1D-COO.nnz", "1D-BCSR.block",
      "1D-BCSR.nnz",   "1D-BCOO.block", "1D-BCOO.nnz",
  };
  // 12 two-dimensional kernels: suffix picks the thread balancing.
  for (const char* scheme : {"2D-eqs", "2D-eqw", "2D-var"})
    for (const char* fmt : {"CSR", "COO", "BCSR", "BCOO"})
      names.push_back(std::string(scheme) + "-" + fmt +
                      (fmt[0] == 'B' ? ".block" : ".row"));
  // 4 equally-sized variants with nnz-balanced thread scheduling.
  for (const char* fmt : {"CSR", "COO", "BCSR", "BCOO"})
    names.push_back(std::string("2D-eqs-") + fmt + ".nnz");
  return names;
}

KernelSpec parse_kernel_name(std::string_view name) {
  KernelSpec spec;
  spec.name = std::string(name);

  std::string_view rest = name;
  if (rest.rfind("1D-", 0) == 0) {
    spec.scheme = SchemeKind::oned;
    rest.remove_prefix(3);
  } else if (rest.rfind("2D-eqs-", 0) == 0) {
    spec.scheme = SchemeKind::twod_equally_sized;
    rest.remove_prefix(7);
  } else if (rest.rfind("2D-eqw-", 0) == 0) {
    spec.scheme = SchemeKind::twod_equally_wide;
    rest.remove_prefix(7);
  } else if (rest.rfind("2D-var-", 0) == 0) {
    spec.scheme = SchemeKind::twod_variable;
    rest.remove_prefix(7);
  } else {
    throw ConfigError("unknown kernel name: " + spec.name);
  }

  auto dot = rest.find('.');
  if (dot == std::string_view::npos)
    throw ConfigError("kernel name needs a balancing suffix: " + spec.name);
  spec.format = format_from_string(rest.substr(0, dot));
  std::string_view suffix = rest.substr(dot + 1);
  const bool blocked = is_blocked(spec.format);

  if (spec.scheme == SchemeKind::oned) {
    if (suffix == "row" && !blocked) {
      spec.core_balancing = CoreBalancing::rows;
      spec.thread_balancing = ThreadBalancing::rows;
    } else if (suffix == "nnz-rgrn" && spec.format == FormatTag::coo) {
      spec.core_balancing = CoreBalancing::nnz_row_granularity;
      spec.thread_balancing = ThreadBalancing::nnz;
    } else if (suffix == "nnz") {
      spec.core_balancing = blocked ? CoreBalancing::nnz_block_granularity
                            : spec.format == FormatTag::coo
                                ? CoreBalancing::nnz_exact
                                : CoreBalancing::nnz_row_granularity;
      spec.thread_balancing = ThreadBalancing::nnz;
    } else if (suffix == "block" && blocked) {
      spec.core_balancing = CoreBalancing::blocks;
      spec.thread_balancing = ThreadBalancing::blocks;
    } else {
      throw ConfigError("bad balancing suffix '" + std::string(suffix) +
                        "' for " + spec.name);
    }
  } else {
    // 2D tiling fixes the core assignment; the suffix is the thread schedule.
    if (suffix == "row" && !blocked) {
      spec.thread_balancing = ThreadBalancing::rows;
    } else if (suffix == "block" && blocked) {
      spec.thread_balancing = ThreadBalancing::blocks;
    } else if (suffix == "nnz") {
      spec.thread_balancing = ThreadBalancing::nnz;
    } else {
      throw ConfigError("bad balancing suffix '" + std::string(suffix) +
                        "' for " + spec.name);
    }
    if (spec.scheme == SchemeKind::twod_equally_sized)
      spec.core_balancing = blocked ? CoreBalancing::blocks : CoreBalancing::rows;
    else
      spec.core_balancing = blocked ? CoreBalancing::nnz_block_granularity
                                    : CoreBalancing::nnz_row_granularity;
  }

  // Locking is only required when a schedule can put one output row on two
  // threads; row/block-row chunks never do.
  spec.sync = spec.thread_balancing == ThreadBalancing::rows
                  ? SyncMode::lock_free
                  : SyncMode::coarse_lock;
  spec.validate();
  return spec;
}

}  // namespace pimspmv
