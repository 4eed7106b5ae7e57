#pragma once

#include <cstdint>

#include "pimspmv/types.hpp"

// Function-pointer bundle filled in by the AVX2 translation unit; null
// entries mean "no variant, use scalar".
namespace pimspmv::simd {

struct Avx2Ops {
  void (*acc_i8)(std::int8_t*, const std::int8_t*, std::size_t) = nullptr;
  void (*acc_i16)(std::int16_t*, const std::int16_t*, std::size_t) = nullptr;
  void (*acc_i32)(std::int32_t*, const std::int32_t*, std::size_t) = nullptr;
  void (*acc_i64)(std::int64_t*, const std::int64_t*, std::size_t) = nullptr;
  void (*acc_f32)(float*, const float*, std::size_t) = nullptr;
  void (*acc_f64)(double*, const double*, std::size_t) = nullptr;

  std::int32_t (*dot_i32)(std::int32_t, const std::int32_t*, const index_t*,
                          std::size_t, const std::int32_t*) = nullptr;
  std::int64_t (*dot_i64)(std::int64_t, const std::int64_t*, const index_t*,
                          std::size_t, const std::int64_t*) = nullptr;

  void (*bmac_i32)(std::int32_t*, const std::int32_t*, const std::int32_t*,
                   index_t, index_t) = nullptr;
  void (*bmac_f32)(float*, const float*, const float*, index_t, index_t) = nullptr;
  void (*bmac_f64)(double*, const double*, const double*, index_t, index_t) = nullptr;
};

const Avx2Ops& avx2_ops();

}  // namespace pimspmv::simd
