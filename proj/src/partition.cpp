#include "pimspmv/partition.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace pimspmv {

std::string_view to_string(CoreBalancing b) {
  switch (b) {
    case CoreBalancing::rows: return "rows";
    case CoreBalancing::nnz_row_granularity: return "nnz-row-granularity";
    case CoreBalancing::nnz_exact: return "nnz-exact";
    case CoreBalancing::blocks: return "blocks";
    case CoreBalancing::nnz_block_granularity: return "nnz-block-granularity";
  }
  return "?";
}

std::string_view to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::oned: return "1D";
    case SchemeKind::twod_equally_sized: return "2D-eqs";
    case SchemeKind::twod_equally_wide: return "2D-eqw";
    case SchemeKind::twod_variable: return "2D-var";
  }
  return "?";
}

std::uint64_t PlanInput::total_weight() const {
  return std::accumulate(unit_weight.begin(), unit_weight.end(), std::uint64_t{0});
}

namespace {

// Equal-count split of n units into k stripes, sizes differ by at most one,
// the leading stripes take the extra unit.
std::vector<index_t> equal_split(index_t n, index_t k) {
  std::vector<index_t> bounds(k + 1, 0);
  index_t q = n / k, rem = n % k;
  for (index_t i = 0; i < k; ++i)
    bounds[i + 1] = bounds[i] + q + (i < rem ? 1 : 0);
  return bounds;
}

// Fewest stripes covering w[from..n) with each stripe sum <= bound.
// Returns n+1 (infeasible) if a single weight exceeds the bound.
struct SuffixStripes {
  std::vector<index_t> count;  // count[i] = min stripes for suffix starting at i
  explicit SuffixStripes(std::span<const std::uint64_t> w,
                         std::span<const std::uint64_t> prefix,
                         std::uint64_t bound) {
    const index_t n = static_cast<index_t>(w.size());
    const index_t inf = n + 1;
    count.assign(n + 1, 0);
    index_t f = n;  // furthest end of the stripe starting at i, non-increasing
    for (index_t i = n; i-- > 0;) {
      if (w[i] > bound) {
        count[i] = inf;
        f = i;
        continue;
      }
      if (f <= i) f = i + 1;
      while (prefix[f] - prefix[i] > bound) --f;  // stops at i+1: w[i] <= bound
      count[i] = count[f] >= inf ? inf : count[f] + 1;
    }
  }
};

}  // namespace

std::vector<index_t> minmax_contiguous_split(std::span<const std::uint64_t> w,
                                             index_t k) {
  const index_t n = static_cast<index_t>(w.size());
  if (k == 0) throw PlanError("zero stripes requested");
  if (n < k) throw PlanError("more cores than divisible units");

  std::vector<std::uint64_t> prefix(n + 1, 0);
  for (index_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + w[i];

  auto feasible = [&](std::uint64_t bound) {
    SuffixStripes s(w, prefix, bound);
    return s.count[0] <= k;
  };

  std::uint64_t lo = 0, hi = prefix[n];
  while (lo < hi) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (feasible(mid)) hi = mid; else lo = mid + 1;
  }
  const std::uint64_t best = lo;

  // Earliest boundaries achieving the optimum: make each stripe as short as
  // the suffix feasibility allows.
  SuffixStripes suffix(w, prefix, best);
  std::vector<index_t> bounds(k + 1, 0);
  index_t b = 0;
  for (index_t s = 0; s < k; ++s) {
    const index_t remaining = k - s - 1;
    index_t e = b + 1;
    while (true) {
      bool fits = prefix[e] - prefix[b] <= best;
      bool suffix_ok = (n - e) >= remaining && suffix.count[e] <= remaining;
      bool exact_cover = remaining > 0 || e == n;
      if (fits && suffix_ok && exact_cover) break;
      ++e;
      if (e > n) throw PlanError("internal: split construction failed");
    }
    bounds[s + 1] = b = e;
  }
  return bounds;
}

namespace {

std::vector<std::uint64_t> per_unit_row_weight(const PlanInput& in) {
  std::vector<std::uint64_t> w(in.grid_rows, 0);
  for (std::size_t u = 0; u < in.n_units(); ++u)
    w[in.unit_row[u]] += in.unit_weight[u];
  return w;
}

std::vector<std::uint64_t> per_unit_row_count(const PlanInput& in) {
  std::vector<std::uint64_t> w(in.grid_rows, 0);
  for (std::size_t u = 0; u < in.n_units(); ++u) w[in.unit_row[u]] += 1;
  return w;
}

index_t clip_rows(const PlanInput& in, index_t unit_row_bound) {
  return static_cast<index_t>(
      std::min<std::uint64_t>(in.n_rows, std::uint64_t(unit_row_bound) * in.unit_r));
}

index_t clip_cols(const PlanInput& in, index_t unit_col_bound) {
  return static_cast<index_t>(
      std::min<std::uint64_t>(in.n_cols, std::uint64_t(unit_col_bound) * in.unit_c));
}

// Tiles from unit-row stripe boundaries (1D row-granularity schemes).
PartitionPlan rowwise_plan(const PlanInput& in, const std::vector<index_t>& bounds,
                           CoreBalancing balancing) {
  const index_t k = static_cast<index_t>(bounds.size() - 1);
  PartitionPlan plan;
  plan.scheme = {SchemeKind::oned, 1, 1};
  plan.balancing = balancing;
  plan.n_rows = in.n_rows;
  plan.n_cols = in.n_cols;
  plan.unit_r = in.unit_r;
  plan.unit_c = in.unit_c;

  // Unit index range per stripe via prefix counts over unit rows.
  std::vector<std::uint64_t> row_units(in.grid_rows + 1, 0);
  std::vector<std::uint64_t> row_nnz(in.grid_rows + 1, 0);
  for (std::size_t u = 0; u < in.n_units(); ++u) {
    row_units[in.unit_row[u] + 1] += 1;
    row_nnz[in.unit_row[u] + 1] += in.unit_weight[u];
  }
  for (index_t i = 0; i < in.grid_rows; ++i) {
    row_units[i + 1] += row_units[i];
    row_nnz[i + 1] += row_nnz[i];
  }

  for (index_t s = 0; s < k; ++s) {
    Tile t;
    t.core_id = s;
    t.row0 = clip_rows(in, bounds[s]);
    t.row1 = clip_rows(in, bounds[s + 1]);
    t.col0 = 0;
    t.col1 = in.n_cols;
    t.entry_begin = row_units[bounds[s]];
    t.entry_end = row_units[bounds[s + 1]];
    t.owned_units = t.entry_end - t.entry_begin;
    t.owned_nnz = row_nnz[bounds[s + 1]] - row_nnz[bounds[s]];
    plan.tiles.push_back(t);
    plan.vector_segments.push_back({0, in.n_cols});
  }
  return plan;
}

PartitionPlan nnz_exact_plan(const PlanInput& in, index_t n_cores) {
  const std::uint64_t nnz = in.n_units();
  PartitionPlan plan;
  plan.scheme = {SchemeKind::oned, 1, 1};
  plan.balancing = CoreBalancing::nnz_exact;
  plan.n_rows = in.n_rows;
  plan.n_cols = in.n_cols;
  plan.unit_r = in.unit_r;
  plan.unit_c = in.unit_c;

  const std::uint64_t q = nnz / n_cores, rem = nnz % n_cores;
  std::uint64_t begin = 0;
  index_t prev_end_row = 0;
  for (index_t s = 0; s < n_cores; ++s) {
    std::uint64_t end = begin + q + (s < rem ? 1 : 0);
    Tile t;
    t.core_id = s;
    t.entry_begin = begin;
    t.entry_end = end;
    t.owned_units = end - begin;
    t.owned_nnz = end - begin;
    if (begin == end) {
      t.row0 = t.row1 = prev_end_row;
    } else {
      t.row0 = in.unit_row[begin];
      t.row1 = in.unit_row[end - 1] + 1;
      prev_end_row = t.row1;
    }
    t.col0 = 0;
    t.col1 = in.n_cols;
    plan.tiles.push_back(t);
    plan.vector_segments.push_back({0, in.n_cols});
    begin = end;
  }

  // Rows whose entries land in more than one run get host-merged.
  std::map<index_t, std::vector<index_t>> shared;
  for (index_t s = 0; s + 1 < n_cores; ++s) {
    const Tile& a = plan.tiles[s];
    if (a.entry_begin == a.entry_end) continue;
    index_t boundary_row = in.unit_row[a.entry_end - 1];
    std::vector<index_t> contributors{s};
    for (index_t s2 = s + 1; s2 < n_cores; ++s2) {
      const Tile& b = plan.tiles[s2];
      if (b.entry_begin == b.entry_end) continue;
      if (in.unit_row[b.entry_begin] != boundary_row) break;
      contributors.push_back(s2);
    }
    if (contributors.size() > 1) {
      auto& rowset = shared[boundary_row];
      for (index_t cid : contributors)
        if (std::find(rowset.begin(), rowset.end(), cid) == rowset.end())
          rowset.push_back(cid);
    }
  }
  for (auto& [row, cores] : shared) {
    std::sort(cores.begin(), cores.end());
    for (index_t cid : cores) plan.tiles[cid].produces_partial = true;
    plan.merge_map.push_back({row, std::move(cores)});
  }
  return plan;
}

// Weight of each unit row restricted to a unit-column range.
std::vector<std::uint64_t> partition_row_weight(const PlanInput& in, index_t uc0,
                                                index_t uc1) {
  std::vector<std::uint64_t> w(in.grid_rows, 0);
  for (std::size_t u = 0; u < in.n_units(); ++u)
    if (in.unit_col[u] >= uc0 && in.unit_col[u] < uc1)
      w[in.unit_row[u]] += in.unit_weight[u];
  return w;
}

struct GridGeometry {
  std::vector<index_t> col_bounds;                 // pc + 1, unit columns
  std::vector<std::vector<index_t>> row_bounds;    // per partition, pr + 1
};

PartitionPlan grid_plan(const PlanInput& in, SchemeKind kind, index_t pr, index_t pc,
                        const GridGeometry& geo, CoreBalancing balancing) {
  PartitionPlan plan;
  plan.scheme = {kind, pr, pc};
  plan.balancing = balancing;
  plan.n_rows = in.n_rows;
  plan.n_cols = in.n_cols;
  plan.unit_r = in.unit_r;
  plan.unit_c = in.unit_c;
  plan.tiles.resize(std::size_t(pr) * pc);
  plan.vector_segments.resize(std::size_t(pr) * pc);

  for (index_t i = 0; i < pr; ++i) {
    for (index_t j = 0; j < pc; ++j) {
      Tile& t = plan.tiles[std::size_t(i) * pc + j];
      t.core_id = i * pc + j;
      t.row0 = clip_rows(in, geo.row_bounds[j][i]);
      t.row1 = clip_rows(in, geo.row_bounds[j][i + 1]);
      t.col0 = clip_cols(in, geo.col_bounds[j]);
      t.col1 = clip_cols(in, geo.col_bounds[j + 1]);
      t.produces_partial = pc > 1;
      plan.vector_segments[t.core_id] = {t.col0, t.col1};
    }
  }

  // Ownership counts by unit bucketing.
  for (std::size_t u = 0; u < in.n_units(); ++u) {
    index_t uc = in.unit_col[u], ur = in.unit_row[u];
    index_t j = static_cast<index_t>(
        std::upper_bound(geo.col_bounds.begin(), geo.col_bounds.end(), uc) -
        geo.col_bounds.begin() - 1);
    const auto& rb = geo.row_bounds[j];
    index_t i = static_cast<index_t>(
        std::upper_bound(rb.begin(), rb.end(), ur) - rb.begin() - 1);
    Tile& t = plan.tiles[std::size_t(i) * pc + j];
    t.owned_units += 1;
    t.owned_nnz += in.unit_weight[u];
  }

  if (pc > 1) {
    plan.merge_map.reserve(in.n_rows);
    for (index_t row = 0; row < in.n_rows; ++row) {
      index_t ur = row / in.unit_r;
      MergeEntry e;
      e.row = row;
      for (index_t j = 0; j < pc; ++j) {
        const auto& rb = geo.row_bounds[j];
        index_t i = static_cast<index_t>(
            std::upper_bound(rb.begin(), rb.end(), ur) - rb.begin() - 1);
        e.cores.push_back(i * pc + j);
      }
      std::sort(e.cores.begin(), e.cores.end());
      plan.merge_map.push_back(std::move(e));
    }
  }
  return plan;
}

void check_2d_pre(const PlanInput& in, index_t pr, index_t pc) {
  if (pr == 0 || pc == 0) throw PlanError("grid dimensions must be >= 1");
  if (pr > in.grid_rows || pc > in.grid_cols)
    throw PlanError("grid " + std::to_string(pr) + "x" + std::to_string(pc) +
                    " exceeds divisible units (" + std::to_string(in.grid_rows) +
                    "x" + std::to_string(in.grid_cols) + ")");
}

std::uint64_t plan_max_nnz(const PartitionPlan& p) {
  std::uint64_t m = 0;
  for (const Tile& t : p.tiles) m = std::max(m, t.owned_nnz);
  return m;
}

}  // namespace

PartitionPlan plan_1d(const PlanInput& in, index_t n_cores, CoreBalancing balancing) {
  if (n_cores == 0) throw PlanError("need at least one core");
  switch (balancing) {
    case CoreBalancing::rows: {
      if (n_cores > in.grid_rows) throw PlanError("more cores than divisible units");
      return rowwise_plan(in, equal_split(in.grid_rows, n_cores), balancing);
    }
    case CoreBalancing::nnz_row_granularity:
    case CoreBalancing::nnz_block_granularity: {
      auto w = per_unit_row_weight(in);
      return rowwise_plan(in, minmax_contiguous_split(w, n_cores), balancing);
    }
    case CoreBalancing::blocks: {
      auto w = per_unit_row_count(in);
      return rowwise_plan(in, minmax_contiguous_split(w, n_cores), balancing);
    }
    case CoreBalancing::nnz_exact:
      return nnz_exact_plan(in, n_cores);
  }
  throw PlanError("unknown balancing");
}

PartitionPlan plan_2d_equally_sized(const PlanInput& in, index_t pr, index_t pc) {
  check_2d_pre(in, pr, pc);
  GridGeometry geo;
  geo.col_bounds = equal_split(in.grid_cols, pc);
  geo.row_bounds.assign(pc, equal_split(in.grid_rows, pr));
  return grid_plan(in, SchemeKind::twod_equally_sized, pr, pc, geo,
                   CoreBalancing::rows);
}

PartitionPlan plan_2d_equally_wide(const PlanInput& in, index_t pr, index_t pc) {
  check_2d_pre(in, pr, pc);
  GridGeometry geo;
  geo.col_bounds = equal_split(in.grid_cols, pc);
  geo.row_bounds.reserve(pc);
  for (index_t j = 0; j < pc; ++j) {
    auto w = partition_row_weight(in, geo.col_bounds[j], geo.col_bounds[j + 1]);
    geo.row_bounds.push_back(minmax_contiguous_split(w, pr));
  }
  return grid_plan(in, SchemeKind::twod_equally_wide, pr, pc, geo,
                   CoreBalancing::nnz_row_granularity);
}

PartitionPlan plan_2d_variable(const PlanInput& in, index_t pr, index_t pc) {
  check_2d_pre(in, pr, pc);

  // Greedy column cuts: close partition k once its running nnz reaches
  // k * total / pc, ties toward the earlier column.
  std::vector<std::uint64_t> col_prefix(in.grid_cols + 1, 0);
  for (std::size_t u = 0; u < in.n_units(); ++u)
    col_prefix[in.unit_col[u] + 1] += in.unit_weight[u];
  for (index_t j = 0; j < in.grid_cols; ++j) col_prefix[j + 1] += col_prefix[j];
  const std::uint64_t total = col_prefix[in.grid_cols];

  GridGeometry geo;
  geo.col_bounds.assign(pc + 1, 0);
  geo.col_bounds[pc] = in.grid_cols;
  for (index_t k = 1; k < pc; ++k) {
    index_t j = geo.col_bounds[k - 1] + 1;
    const index_t j_max = in.grid_cols - (pc - k);  // leave one column each
    while (j < j_max &&
           static_cast<unsigned __int128>(col_prefix[j]) * pc <
               static_cast<unsigned __int128>(k) * total)
      ++j;
    geo.col_bounds[k] = j;
  }
  geo.row_bounds.reserve(pc);
  for (index_t j = 0; j < pc; ++j) {
    auto w = partition_row_weight(in, geo.col_bounds[j], geo.col_bounds[j + 1]);
    geo.row_bounds.push_back(minmax_contiguous_split(w, pr));
  }
  PartitionPlan plan = grid_plan(in, SchemeKind::twod_variable, pr, pc, geo,
                                 CoreBalancing::nnz_row_granularity);

  // Greedy cuts are not optimal; never ship a plan worse than the fixed grid.
  PartitionPlan fixed = plan_2d_equally_sized(in, pr, pc);
  if (plan_max_nnz(plan) > plan_max_nnz(fixed)) {
    fixed.scheme.kind = SchemeKind::twod_variable;
    fixed.balancing = CoreBalancing::nnz_row_granularity;
    return fixed;
  }
  return plan;
}

BalanceStats plan_stats(const PartitionPlan& plan, std::size_t value_width) {
  BalanceStats st;
  for (const Tile& t : plan.tiles) {
    st.per_core_nnz.push_back(t.owned_nnz);
    st.per_core_rows.push_back(t.row_span());
    st.per_core_units.push_back(t.owned_units);
    st.vector_segment_bytes += bytes_t(t.col_span()) * value_width;
  }
  if (!st.per_core_nnz.empty()) {
    st.min_nnz = *std::min_element(st.per_core_nnz.begin(), st.per_core_nnz.end());
    st.max_nnz = *std::max_element(st.per_core_nnz.begin(), st.per_core_nnz.end());
    double sum = 0.0;
    for (auto v : st.per_core_nnz) sum += static_cast<double>(v);
    st.mean_nnz = sum / static_cast<double>(st.per_core_nnz.size());
    double var = 0.0;
    for (auto v : st.per_core_nnz) {
      double d = static_cast<double>(v) - st.mean_nnz;
      var += d * d;
    }
    var /= static_cast<double>(st.per_core_nnz.size());
    st.cv_nnz = st.mean_nnz > 0.0 ? std::sqrt(var) / st.mean_nnz : 0.0;
  }
  st.split_rows = plan.merge_map.size();
  return st;
}

void validate_plan(const PartitionPlan& plan, const PlanInput& in) {
  std::uint64_t covered = 0, nnz_covered = 0;
  const bool by_ranges = plan.scheme.kind != SchemeKind::oned ||
                         plan.balancing != CoreBalancing::nnz_exact;
  if (by_ranges) {
    for (std::size_t u = 0; u < in.n_units(); ++u) {
      index_t row = in.unit_row[u] * in.unit_r;
      index_t col = in.unit_col[u] * in.unit_c;
      int owners = 0;
      for (const Tile& t : plan.tiles)
        if (row >= t.row0 && row < t.row1 && col >= t.col0 && col < t.col1) ++owners;
      if (owners != 1)
        throw PlanError("unit " + std::to_string(u) + " covered " +
                        std::to_string(owners) + " times");
    }
  }
  for (const Tile& t : plan.tiles) {
    covered += t.owned_units;
    nnz_covered += t.owned_nnz;
  }
  if (covered != in.n_units() || nnz_covered != in.total_weight())
    throw PlanError("ownership counts do not cover the matrix exactly");
}

std::string plan_to_json(const PartitionPlan& plan, const BalanceStats& stats,
                         int indent) {
  nlohmann::ordered_json j;
  j["scheme"] = std::string(to_string(plan.scheme.kind));
  if (plan.scheme.kind != SchemeKind::oned) {
    j["pr"] = plan.scheme.pr;
    j["pc"] = plan.scheme.pc;
  }
  j["balancing"] = std::string(to_string(plan.balancing));
  j["n_rows"] = plan.n_rows;
  j["n_cols"] = plan.n_cols;
  if (plan.unit_r != 1 || plan.unit_c != 1) {
    j["block_r"] = plan.unit_r;
    j["block_c"] = plan.unit_c;
  }
  auto& tiles = j["tiles"];
  for (const Tile& t : plan.tiles) {
    nlohmann::ordered_json tj;
    tj["core"] = t.core_id;
    tj["rows"] = {t.row0, t.row1};
    tj["cols"] = {t.col0, t.col1};
    tj["units"] = t.owned_units;
    tj["nnz"] = t.owned_nnz;
    tj["partial"] = t.produces_partial;
    tiles.push_back(std::move(tj));
  }
  auto& segs = j["vector_segments"];
  for (const auto& [c0, c1] : plan.vector_segments) segs.push_back({c0, c1});
  auto& mm = j["merge_map"];
  mm = nlohmann::ordered_json::array();
  for (const MergeEntry& e : plan.merge_map) {
    nlohmann::ordered_json mj;
    mj["row"] = e.row;
    mj["cores"] = e.cores;
    mm.push_back(std::move(mj));
  }
  auto& bal = j["balance"];
  bal["per_core_nnz"] = stats.per_core_nnz;
  bal["min_nnz"] = stats.min_nnz;
  bal["max_nnz"] = stats.max_nnz;
  bal["mean_nnz"] = stats.mean_nnz;
  bal["cv_nnz"] = stats.cv_nnz;
  bal["split_rows"] = stats.split_rows;
  bal["vector_segment_bytes"] = stats.vector_segment_bytes;
  return j.dump(indent);
}

}  // namespace pimspmv
