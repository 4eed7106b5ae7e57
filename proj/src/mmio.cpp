#include "pimspmv/mmio.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace pimspmv {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::uint64_t parse_count(const std::string& tok, std::size_t line) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw ParseError(line, "expected a non-negative integer, got '" + tok + "'");
  return v;
}

double parse_value(const std::string& tok, std::size_t line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "malformed value '" + tok + "'");
  }
}

}  // namespace

RawMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++lineno;
  auto header = split_ws(line);
  if (header.size() != 5 || lower(header[0]) != "%%matrixmarket" ||
      lower(header[1]) != "matrix")
    throw ParseError(lineno, "malformed MatrixMarket header");
  const std::string layout = lower(header[2]);
  const std::string field = lower(header[3]);
  const std::string symmetry = lower(header[4]);
  if (layout != "coordinate")
    throw ParseError(lineno, "unsupported layout '" + layout + "' (need coordinate)");
  if (field != "real" && field != "integer" && field != "pattern")
    throw ParseError(lineno, "unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError(lineno, "unsupported symmetry '" + symmetry + "'");
  const bool pattern = field == "pattern";
  const bool symmetric = symmetry == "symmetric";

  // Size line: first non-comment, non-blank line after the header.
  std::uint64_t n_rows = 0, n_cols = 0, declared = 0;
  bool have_size = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 3)
      throw ParseError(lineno, "size line must be 'rows cols nnz'");
    n_rows = parse_count(toks[0], lineno);
    n_cols = parse_count(toks[1], lineno);
    declared = parse_count(toks[2], lineno);
    have_size = true;
    break;
  }
  if (!have_size) throw ParseError(lineno + 1, "missing size line");
  if (n_rows > std::numeric_limits<index_t>::max() ||
      n_cols > std::numeric_limits<index_t>::max())
    throw ParseError(lineno, "matrix dimensions exceed supported range");

  RawMatrix m;
  m.n_rows = static_cast<index_t>(n_rows);
  m.n_cols = static_cast<index_t>(n_cols);
  m.entries.reserve(declared * (symmetric ? 2 : 1));

  std::uint64_t seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (seen == declared)
      throw ParseError(lineno, "entry count mismatch: more entries than declared (" +
                                   std::to_string(declared) + ")");
    const std::size_t want = pattern ? 2 : 3;
    if (toks.size() != want)
      throw ParseError(lineno, "expected " + std::to_string(want) +
                                   " fields on entry line, got " +
                                   std::to_string(toks.size()));
    std::uint64_t i = parse_count(toks[0], lineno);
    std::uint64_t j = parse_count(toks[1], lineno);
    double v = pattern ? 1.0 : parse_value(toks[2], lineno);
    if (i < 1 || i > n_rows || j < 1 || j > n_cols)
      throw ParseError(lineno, "index (" + toks[0] + ", " + toks[1] +
                                   ") out of range for " + std::to_string(n_rows) +
                                   "x" + std::to_string(n_cols));
    index_t r = static_cast<index_t>(i - 1);
    index_t c = static_cast<index_t>(j - 1);
    m.entries.push_back({r, c, v});
    if (symmetric && r != c) m.entries.push_back({c, r, v});
    ++seen;
  }
  if (seen != declared)
    throw ParseError(lineno, "entry count mismatch: declared " +
                                 std::to_string(declared) + ", found " +
                                 std::to_string(seen));

  try {
    sort_and_check_unique(m);
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }
  return m;
}

RawMatrix parse_matrix_market_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open matrix file: " + path);
  return parse_matrix_market(f);
}

void write_matrix_market(std::ostream& out, const RawMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.n_rows << " " << m.n_cols << " " << m.entries.size() << "\n";
  char buf[64];
  for (const auto& e : m.entries) {
    int n = std::snprintf(buf, sizeof(buf), "%u %u %.17g\n", e.row + 1, e.col + 1,
                          e.value);
    out.write(buf, n);
  }
}

}  // namespace pimspmv
