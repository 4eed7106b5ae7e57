#pragma once

#include <cstddef>
#include <string_view>

#include "pimspmv/types.hpp"

// Arithmetic inner loops of the simulated kernels. Scalar implementations
// are the reference semantics; the AVX2 variants are restricted to
// transformations that cannot change results: element-independent loops
// (accumulate, block_mac vectorized across output rows, which keeps each
// element's accumulation order identical to scalar) and reassociations of
// wrapping integer sums (sparse_dot). Float sparse_dot stays scalar because
// reassociating IEEE sums would change the result.
namespace pimspmv::simd {

enum class Backend { scalar, avx2 };

// Selected once at startup: best supported backend, overridable with
// PIMSPMV_SIMD=scalar|avx2 in the environment.
Backend active_backend();
std::string_view backend_name();
bool cpu_supports_avx2();
void force_backend(Backend b);  // test hook

// dst[i] += src[i], elementwise.
template <typename T>
using AccumulateFn = void (*)(T* dst, const T* src, std::size_t n);

// sum_k values[k] * x[cols[k]] starting from acc.
template <typename T>
using SparseDotFn = T (*)(T acc, const T* values, const index_t* cols,
                          std::size_t n, const T* x);

// y[i] += sum_j tile[i*c + j] * x[j] for i in [0, r).
template <typename T>
using BlockMacFn = void (*)(T* y, const T* tile, const T* x, index_t r, index_t c);

namespace scalar {

template <typename T>
void accumulate(T* dst, const T* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = wrapping_add(dst[i], src[i]);
}

template <typename T>
T sparse_dot(T acc, const T* values, const index_t* cols, std::size_t n,
             const T* x) {
  for (std::size_t k = 0; k < n; ++k)
    acc = wrapping_mul_add(acc, values[k], x[cols[k]]);
  return acc;
}

template <typename T>
void block_mac(T* y, const T* tile, const T* x, index_t r, index_t c) {
  for (index_t i = 0; i < r; ++i) {
    T acc = y[i];
    const T* row = tile + std::size_t(i) * c;
    for (index_t j = 0; j < c; ++j) acc = wrapping_mul_add(acc, row[j], x[j]);
    y[i] = acc;
  }
}

}  // namespace scalar

// Dispatched entry points; resolve to scalar when the backend has no
// variant for the type.
template <typename T> AccumulateFn<T> accumulate_fn();
template <typename T> SparseDotFn<T> sparse_dot_fn();
template <typename T> BlockMacFn<T> block_mac_fn();

template <typename T>
inline void accumulate(T* dst, const T* src, std::size_t n) {
  accumulate_fn<T>()(dst, src, n);
}
template <typename T>
inline T sparse_dot(T acc, const T* values, const index_t* cols, std::size_t n,
                    const T* x) {
  return sparse_dot_fn<T>()(acc, values, cols, n, x);
}
template <typename T>
inline void block_mac(T* y, const T* tile, const T* x, index_t r, index_t c) {
  block_mac_fn<T>()(y, tile, x, r, c);
}

}  // namespace pimspmv::simd
