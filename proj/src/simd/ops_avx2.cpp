// Compiled with -mavx2 (no FMA: fused multiply-add would round differently
// than the scalar mul+add reference).

#include "ops_avx2.hpp"

#include "pimspmv/simd/ops.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace pimspmv::simd {

#if defined(__AVX2__)

namespace {

template <typename T, typename VecAdd>
void acc_int(T* dst, const T* src, std::size_t n, VecAdd add) {
  constexpr std::size_t lanes = 32 / sizeof(T);
  std::size_t i = 0;
  for (; i + lanes <= n; i += lanes) {
    __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), add(a, b));
  }
  for (; i < n; ++i) dst[i] = wrapping_add(dst[i], src[i]);
}

void acc_i8(std::int8_t* d, const std::int8_t* s, std::size_t n) {
  acc_int(d, s, n, [](__m256i a, __m256i b) { return _mm256_add_epi8(a, b); });
}
void acc_i16(std::int16_t* d, const std::int16_t* s, std::size_t n) {
  acc_int(d, s, n, [](__m256i a, __m256i b) { return _mm256_add_epi16(a, b); });
}
void acc_i32(std::int32_t* d, const std::int32_t* s, std::size_t n) {
  acc_int(d, s, n, [](__m256i a, __m256i b) { return _mm256_add_epi32(a, b); });
}
void acc_i64(std::int64_t* d, const std::int64_t* s, std::size_t n) {
  acc_int(d, s, n, [](__m256i a, __m256i b) { return _mm256_add_epi64(a, b); });
}

void acc_f32(float* d, const float* s, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(d + i, _mm256_add_ps(_mm256_loadu_ps(d + i),
                                          _mm256_loadu_ps(s + i)));
  for (; i < n; ++i) d[i] += s[i];
}

void acc_f64(double* d, const double* s, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(d + i, _mm256_add_pd(_mm256_loadu_pd(d + i),
                                          _mm256_loadu_pd(s + i)));
  for (; i < n; ++i) d[i] += s[i];
}

// Wrapping sums are associative, so lane-parallel accumulation is exact.
std::int32_t dot_i32(std::int32_t acc, const std::int32_t* v, const index_t* cols,
                     std::size_t n, const std::int32_t* x) {
  __m256i vacc = _mm256_setzero_si256();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    __m256i idx = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(cols + k));
    __m256i gx = _mm256_i32gather_epi32(reinterpret_cast<const int*>(x), idx, 4);
    __m256i vv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + k));
    vacc = _mm256_add_epi32(vacc, _mm256_mullo_epi32(vv, gx));
  }
  alignas(32) std::int32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), vacc);
  std::uint32_t sum = static_cast<std::uint32_t>(acc);
  for (std::int32_t l : lanes) sum += static_cast<std::uint32_t>(l);
  std::int32_t out = static_cast<std::int32_t>(sum);
  for (; k < n; ++k) out = wrapping_mul_add(out, v[k], x[cols[k]]);
  return out;
}

// 64-bit lane product from 32-bit partial products (AVX2 has no mullo_epi64).
inline __m256i mul_epi64(__m256i a, __m256i b) {
  __m256i lo_hi = _mm256_mul_epu32(a, _mm256_srli_epi64(b, 32));
  __m256i hi_lo = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), b);
  __m256i cross = _mm256_slli_epi64(_mm256_add_epi64(lo_hi, hi_lo), 32);
  return _mm256_add_epi64(cross, _mm256_mul_epu32(a, b));
}

std::int64_t dot_i64(std::int64_t acc, const std::int64_t* v, const index_t* cols,
                     std::size_t n, const std::int64_t* x) {
  __m256i vacc = _mm256_setzero_si256();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + k));
    __m256i gx = _mm256_i32gather_epi64(
        reinterpret_cast<const long long*>(x), idx, 8);
    __m256i vv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + k));
    vacc = _mm256_add_epi64(vacc, mul_epi64(vv, gx));
  }
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), vacc);
  std::uint64_t sum = static_cast<std::uint64_t>(acc);
  for (std::int64_t l : lanes) sum += static_cast<std::uint64_t>(l);
  std::int64_t out = static_cast<std::int64_t>(sum);
  for (; k < n; ++k) out = wrapping_mul_add(out, v[k], x[cols[k]]);
  return out;
}

// Vectorized across output rows: each element keeps the scalar j-order.
void bmac_f64(double* y, const double* tile, const double* x, index_t r,
              index_t c) {
  index_t i = 0;
  const __m128i steps = _mm_setr_epi32(0, 1, 2, 3);
  for (; i + 4 <= r; i += 4) {
    __m256d acc = _mm256_loadu_pd(y + i);
    __m128i rows = _mm_mullo_epi32(steps, _mm_set1_epi32(static_cast<int>(c)));
    const double* base = tile + std::size_t(i) * c;
    for (index_t j = 0; j < c; ++j) {
      __m256d col = _mm256_i32gather_pd(base + j, rows, 8);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(col, _mm256_set1_pd(x[j])));
    }
    _mm256_storeu_pd(y + i, acc);
  }
  if (i < r) scalar::block_mac(y + i, tile + std::size_t(i) * c, x, r - i, c);
}

void bmac_f32(float* y, const float* tile, const float* x, index_t r, index_t c) {
  index_t i = 0;
  for (; i + 8 <= r; i += 8) {
    __m256 acc = _mm256_loadu_ps(y + i);
    __m256i rows = _mm256_mullo_epi32(_mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7),
                                      _mm256_set1_epi32(static_cast<int>(c)));
    const float* base = tile + std::size_t(i) * c;
    for (index_t j = 0; j < c; ++j) {
      __m256 col = _mm256_i32gather_ps(base + j, rows, 4);
      acc = _mm256_add_ps(acc, _mm256_mul_ps(col, _mm256_set1_ps(x[j])));
    }
    _mm256_storeu_ps(y + i, acc);
  }
  if (i < r) scalar::block_mac(y + i, tile + std::size_t(i) * c, x, r - i, c);
}

void bmac_i32(std::int32_t* y, const std::int32_t* tile, const std::int32_t* x,
              index_t r, index_t c) {
  index_t i = 0;
  for (; i + 8 <= r; i += 8) {
    __m256i acc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(y + i));
    __m256i rows = _mm256_mullo_epi32(_mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7),
                                      _mm256_set1_epi32(static_cast<int>(c)));
    const std::int32_t* base = tile + std::size_t(i) * c;
    for (index_t j = 0; j < c; ++j) {
      __m256i col = _mm256_i32gather_epi32(reinterpret_cast<const int*>(base) + j,
                                           rows, 4);
      acc = _mm256_add_epi32(acc,
                             _mm256_mullo_epi32(col, _mm256_set1_epi32(x[j])));
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(y + i), acc);
  }
  if (i < r) scalar::block_mac(y + i, tile + std::size_t(i) * c, x, r - i, c);
}

}  // namespace

const Avx2Ops& avx2_ops() {
  static const Avx2Ops ops = [] {
    Avx2Ops o;
    o.acc_i8 = acc_i8;
    o.acc_i16 = acc_i16;
    o.acc_i32 = acc_i32;
    o.acc_i64 = acc_i64;
    o.acc_f32 = acc_f32;
    o.acc_f64 = acc_f64;
    o.dot_i32 = dot_i32;
    o.dot_i64 = dot_i64;
    o.bmac_i32 = bmac_i32;
    o.bmac_f32 = bmac_f32;
    o.bmac_f64 = bmac_f64;
    return o;
  }();
  return ops;
}

#else

const Avx2Ops& avx2_ops() {
  static const Avx2Ops ops;  // all null: scalar everywhere
  return ops;
}

#endif  // __AVX2__

}  // namespace pimspmv::simd
