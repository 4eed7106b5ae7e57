#include "pimspmv/simd/ops.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "ops_avx2.hpp"

namespace pimspmv::simd {

namespace {

Backend detect_backend() {
  const char* env = std::getenv("PIMSPMV_SIMD");
  if (env) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_supports_avx2()) return Backend::avx2;
    return Backend::scalar;
  }
  return cpu_supports_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{detect_backend()};
  return slot;
}

}  // namespace

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

void force_backend(Backend b) {
  if (b == Backend::avx2 && !cpu_supports_avx2()) b = Backend::scalar;
  backend_slot().store(b, std::memory_order_relaxed);
}

std::string_view backend_name() {
  return active_backend() == Backend::avx2 ? "avx2" : "scalar";
}

template <typename T>
AccumulateFn<T> accumulate_fn() {
  if (active_backend() == Backend::avx2) {
    const Avx2Ops& o = avx2_ops();
    if constexpr (std::is_same_v<T, std::int8_t>) {
      if (o.acc_i8) return o.acc_i8;
    } else if constexpr (std::is_same_v<T, std::int16_t>) {
      if (o.acc_i16) return o.acc_i16;
    } else if constexpr (std::is_same_v<T, std::int32_t>) {
      if (o.acc_i32) return o.acc_i32;
    } else if constexpr (std::is_same_v<T, std::int64_t>) {
      if (o.acc_i64) return o.acc_i64;
    } else if constexpr (std::is_same_v<T, float>) {
      if (o.acc_f32) return o.acc_f32;
    } else if constexpr (std::is_same_v<T, double>) {
      if (o.acc_f64) return o.acc_f64;
    }
  }
  return &scalar::accumulate<T>;
}

template <typename T>
SparseDotFn<T> sparse_dot_fn() {
  if (active_backend() == Backend::avx2) {
    const Avx2Ops& o = avx2_ops();
    if constexpr (std::is_same_v<T, std::int32_t>) {
      if (o.dot_i32) return o.dot_i32;
    } else if constexpr (std::is_same_v<T, std::int64_t>) {
      if (o.dot_i64) return o.dot_i64;
    }
  }
  return &scalar::sparse_dot<T>;
}

template <typename T>
BlockMacFn<T> block_mac_fn() {
  if (active_backend() == Backend::avx2) {
    const Avx2Ops& o = avx2_ops();
    if constexpr (std::is_same_v<T, std::int32_t>) {
      if (o.bmac_i32) return o.bmac_i32;
    } else if constexpr (std::is_same_v<T, float>) {
      if (o.bmac_f32) return o.bmac_f32;
    } else if constexpr (std::is_same_v<T, double>) {
      if (o.bmac_f64) return o.bmac_f64;
    }
  }
  return &scalar::block_mac<T>;
}

template AccumulateFn<std::int8_t> accumulate_fn<std::int8_t>();
template AccumulateFn<std::int16_t> accumulate_fn<std::int16_t>();
template AccumulateFn<std::int32_t> accumulate_fn<std::int32_t>();
template AccumulateFn<std::int64_t> accumulate_fn<std::int64_t>();
template AccumulateFn<float> accumulate_fn<float>();
template AccumulateFn<double> accumulate_fn<double>();

template SparseDotFn<std::int8_t> sparse_dot_fn<std::int8_t>();
template SparseDotFn<std::int16_t> sparse_dot_fn<std::int16_t>();
template SparseDotFn<std::int32_t> sparse_dot_fn<std::int32_t>();
template SparseDotFn<std::int64_t> sparse_dot_fn<std::int64_t>();
template SparseDotFn<float> sparse_dot_fn<float>();
template SparseDotFn<double> sparse_dot_fn<double>();

template BlockMacFn<std::int8_t> block_mac_fn<std::int8_t>();
template BlockMacFn<std::int16_t> block_mac_fn<std::int16_t>();
template BlockMacFn<std::int32_t> block_mac_fn<std::int32_t>();
template BlockMacFn<std::int64_t> block_mac_fn<std::int64_t>();
template BlockMacFn<float> block_mac_fn<float>();
template BlockMacFn<double> block_mac_fn<double>();

}  // namespace pimspmv::simd
