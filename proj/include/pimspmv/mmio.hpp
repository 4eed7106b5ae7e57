#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "pimspmv/triplet.hpp"

namespace pimspmv {

struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_number(line) {}
  std::size_t line_number;
};

// Matrix Market "coordinate" reader. Accepts field real/integer/pattern and
// symmetry general/symmetric; symmetric off-diagonal entries are mirrored,
// pattern entries take value 1, indices are converted to 0-based.
RawMatrix parse_matrix_market(std::istream& in);
RawMatrix parse_matrix_market_file(const std::string& path);

void write_matrix_market(std::ostream& out, const RawMatrix& m);

}  // namespace pimspmv
