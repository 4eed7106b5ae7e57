#include "pimspmv/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pimspmv {

namespace {

// Value and placement draws go through these helpers instead of the standard
// distributions, which are not pinned by the standard. mt19937_64 itself is.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  std::uint64_t next() { return gen(); }

  // Uniform in [0, n) without modulo bias worth worrying about at desk scale.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  double unit() {  // [0, 1), 53-bit resolution
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double value() { return static_cast<double>(1 + below(9)); }  // 1..9
};

double pattern_value(index_t i, index_t j) {
  return static_cast<double>((i * 31u + j * 17u) % 9u + 1u);
}

// Draws k distinct columns from [0, n_cols), returned sorted.
std::vector<index_t> draw_columns(Rng& rng, index_t n_cols, index_t k) {
  std::vector<index_t> cols;
  cols.reserve(k);
  if (k * 2 >= n_cols) {
    // Dense-ish row: partial Fisher-Yates over the full column range.
    std::vector<index_t> pool(n_cols);
    for (index_t c = 0; c < n_cols; ++c) pool[c] = c;
    for (index_t t = 0; t < k; ++t) {
      std::uint64_t j = t + rng.below(n_cols - t);
      std::swap(pool[t], pool[j]);
      cols.push_back(pool[t]);
    }
  } else {
    while (cols.size() < k) {
      index_t c = static_cast<index_t>(rng.below(n_cols));
      if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    }
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

RawMatrix make_identity(index_t n_rows, index_t n_cols) {
  RawMatrix m{n_rows, n_cols, {}};
  index_t d = std::min(n_rows, n_cols);
  m.entries.reserve(d);
  for (index_t i = 0; i < d; ++i) m.entries.push_back({i, i, 1.0});
  return m;
}

RawMatrix make_dense(index_t n_rows, index_t n_cols) {
  RawMatrix m{n_rows, n_cols, {}};
  m.entries.reserve(static_cast<std::size_t>(n_rows) * n_cols);
  for (index_t i = 0; i < n_rows; ++i)
    for (index_t j = 0; j < n_cols; ++j) m.entries.push_back({i, j, pattern_value(i, j)});
  return m;
}

RawMatrix make_banded(index_t n_rows, index_t n_cols, index_t band) {
  RawMatrix m{n_rows, n_cols, {}};
  for (index_t i = 0; i < n_rows; ++i) {
    index_t j0 = i > band ? i - band : 0;
    index_t j1 = std::min<std::uint64_t>(n_cols, std::uint64_t(i) + band + 1);
    for (index_t j = j0; j < j1; ++j) m.entries.push_back({i, j, pattern_value(i, j)});
  }
  return m;
}

RawMatrix make_uniform(index_t n_rows, index_t n_cols, double density,
                       std::uint64_t seed) {
  Rng rng(seed);
  RawMatrix m{n_rows, n_cols, {}};
  // Threshold comparison on the raw 64-bit draw keeps the stream deterministic.
  const double scaled = density * 0x1.0p64;
  const std::uint64_t threshold =
      scaled >= 0x1.0p64 ? ~std::uint64_t{0}
                         : static_cast<std::uint64_t>(scaled);
  for (index_t i = 0; i < n_rows; ++i)
    for (index_t j = 0; j < n_cols; ++j)
      if (rng.next() < threshold || density >= 1.0)
        m.entries.push_back({i, j, rng.value()});
  return m;
}

// Per-row populations follow a truncated Zipf law rescaled to the requested
// mean. The truncation point is tied to the mean so a handful of heavy rows
// dominate without a single row swallowing the whole matrix.
RawMatrix make_zipf_rows(index_t n_rows, index_t n_cols, double exponent,
                         double avg, std::uint64_t seed) {
  Rng rng(seed);
  const std::uint64_t cap =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(
                                     n_cols, static_cast<std::uint64_t>(16.0 * avg)));
  std::vector<double> cdf(cap);
  double total = 0.0, mean_num = 0.0;
  for (std::uint64_t k = 1; k <= cap; ++k) {
    double w = std::pow(static_cast<double>(k), -exponent);
    total += w;
    mean_num += w * static_cast<double>(k);
    cdf[k - 1] = total;
  }
  const double mean_z = mean_num / total;
  const double scale = avg / mean_z;

  RawMatrix m{n_rows, n_cols, {}};
  for (index_t i = 0; i < n_rows; ++i) {
    double u = rng.unit() * total;
    std::uint64_t z =
        1 + (std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (z > cap) z = cap;
    auto k = static_cast<std::uint64_t>(std::floor(scale * static_cast<double>(z) + 0.5));
    k = std::min<std::uint64_t>(k, n_cols);
    if (k == 0) continue;
    for (index_t c : draw_columns(rng, n_cols, static_cast<index_t>(k)))
      m.entries.push_back({i, c, rng.value()});
  }
  return m;
}

}  // namespace

RawMatrix generate_synthetic(const SynthSpec& spec) {
  if (spec.n_rows == 0 || spec.n_cols == 0)
    throw std::invalid_argument("synthetic matrix dimensions must be positive");
  switch (spec.kind) {
    case SynthKind::identity:
      return make_identity(spec.n_rows, spec.n_cols);
    case SynthKind::dense:
      return make_dense(spec.n_rows, spec.n_cols);
    case SynthKind::banded:
      return make_banded(spec.n_rows, spec.n_cols, spec.band);
    case SynthKind::uniform_random:
      if (!(spec.density > 0.0 && spec.density <= 1.0))
        throw std::invalid_argument("density must be in (0, 1]");
      if (!spec.seed) throw std::invalid_argument("uniform requires seed=");
      return make_uniform(spec.n_rows, spec.n_cols, spec.density, *spec.seed);
    case SynthKind::zipf_rows:
      if (!(spec.exponent > 0.0))
        throw std::invalid_argument("zipf exponent must be > 0");
      if (!(spec.avg_nnz_per_row > 0.0))
        throw std::invalid_argument("zipf avg must be > 0");
      if (!spec.seed) throw std::invalid_argument("zipf requires seed=");
      return make_zipf_rows(spec.n_rows, spec.n_cols, spec.exponent,
                            spec.avg_nnz_per_row, *spec.seed);
  }
  throw std::invalid_argument("unknown synthetic kind");
}

std::string SynthSpec::describe() const {
  std::ostringstream s;
  switch (kind) {
    case SynthKind::identity: s << "identity"; break;
    case SynthKind::dense: s << "dense"; break;
    case SynthKind::banded: s << "banded"; break;
    case SynthKind::uniform_random: s << "uniform"; break;
    case SynthKind::zipf_rows: s << "zipf"; break;
  }
  s << ":" << n_rows << "x" << n_cols;
  if (kind == SynthKind::banded) s << ":b=" << band;
  if (kind == SynthKind::uniform_random) s << ":density=" << density;
  if (kind == SynthKind::zipf_rows)
    s << ":s=" << exponent << ":avg=" << avg_nnz_per_row;
  if (seed) s << ":seed=" << *seed;
  return s.str();
}

SynthSpec parse_synth_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') { parts.push_back(cur); cur.clear(); }
    else cur.push_back(ch);
  }
  parts.push_back(cur);
  if (parts.size() < 2) throw std::invalid_argument("synthetic spec needs kind:SIZE");

  SynthSpec spec;
  const std::string& kind = parts[0];
  if (kind == "identity") spec.kind = SynthKind::identity;
  else if (kind == "dense") spec.kind = SynthKind::dense;
  else if (kind == "banded") spec.kind = SynthKind::banded;
  else if (kind == "uniform") spec.kind = SynthKind::uniform_random;
  else if (kind == "zipf") spec.kind = SynthKind::zipf_rows;
  else throw std::invalid_argument("unknown synthetic kind '" + kind + "'");

  const std::string& size = parts[1];
  auto x = size.find('x');
  try {
    if (x == std::string::npos) {
      spec.n_rows = spec.n_cols = static_cast<index_t>(std::stoul(size));
    } else {
      spec.n_rows = static_cast<index_t>(std::stoul(size.substr(0, x)));
      spec.n_cols = static_cast<index_t>(std::stoul(size.substr(x + 1)));
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("bad size '" + size + "' (want ROWS or ROWSxCOLS)");
  }

  for (std::size_t i = 2; i < parts.size(); ++i) {
    auto eq = parts[i].find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("bad parameter '" + parts[i] + "' (want key=value)");
    std::string key = parts[i].substr(0, eq);
    std::string val = parts[i].substr(eq + 1);
    try {
      if (key == "b") spec.band = static_cast<index_t>(std::stoul(val));
      else if (key == "density") spec.density = std::stod(val);
      else if (key == "s") spec.exponent = std::stod(val);
      else if (key == "avg") spec.avg_nnz_per_row = std::stod(val);
      else if (key == "seed") spec.seed = std::stoull(val);
      else throw std::invalid_argument("unknown parameter '" + key + "'");
    } catch (const std::invalid_argument& e) {
      if (std::string(e.what()).find("unknown") == 0) throw;
      throw std::invalid_argument("bad value for '" + key + "': " + val);
    }
  }
  return spec;
}

}  // namespace pimspmv
