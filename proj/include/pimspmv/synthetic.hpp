#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pimspmv/triplet.hpp"

namespace pimspmv {

enum class SynthKind { identity, dense, banded, uniform_random, zipf_rows };

struct SynthSpec {
  SynthKind kind = SynthKind::identity;
  index_t n_rows = 0;
  index_t n_cols = 0;
  index_t band = 1;              // banded: half bandwidth, |i - j| <= band
  double density = 0.0;          // uniform_random: per-cell fill probability
  double exponent = 0.0;         // zipf_rows: Zipf exponent, > 0
  double avg_nnz_per_row = 0.0;  // zipf_rows: target mean row population
  std::optional<std::uint64_t> seed;

  std::string describe() const;
};

// Spec grammar: kind:ROWSxCOLS[:key=value...], e.g.
//   identity:64   dense:32x32   banded:128:b=3
//   uniform:512x512:density=0.02:seed=1
//   zipf:1024x1024:s=1.5:avg=8:seed=7
SynthSpec parse_synth_spec(const std::string& text);

RawMatrix generate_synthetic(const SynthSpec& spec);

}  // namespace pimspmv
