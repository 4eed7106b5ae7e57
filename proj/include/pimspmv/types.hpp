#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace pimspmv {

using index_t = std::uint32_t;
using cycles_t = std::uint64_t;
using bytes_t = std::uint64_t;

// Element types supported by every kernel. Width is the storage width of one
// matrix/vector value; indices and offsets are always 4-byte integers.
enum class ElementType : std::uint8_t {
  int8 = 0,
  int16 = 1,
  int32 = 2,
  int64 = 3,
  float32 = 4,
  float64 = 5,
};

inline constexpr std::array<ElementType, 6> kAllElementTypes = {
    ElementType::int8,  ElementType::int16,   ElementType::int32,
    ElementType::int64, ElementType::float32, ElementType::float64,
};

constexpr std::size_t width_bytes(ElementType t) {
  switch (t) {
    case ElementType::int8: return 1;
    case ElementType::int16: return 2;
    case ElementType::int32: return 4;
    case ElementType::int64: return 8;
    case ElementType::float32: return 4;
    case ElementType::float64: return 8;
  }
  return 0;
}

constexpr std::string_view to_string(ElementType t) {
  switch (t) {
    case ElementType::int8: return "int8";
    case ElementType::int16: return "int16";
    case ElementType::int32: return "int32";
    case ElementType::int64: return "int64";
    case ElementType::float32: return "float32";
    case ElementType::float64: return "float64";
  }
  return "?";
}

inline ElementType element_type_from_string(std::string_view s) {
  for (ElementType t : kAllElementTypes)
    if (to_string(t) == s) return t;
  throw std::invalid_argument("unknown element type: " + std::string(s));
}

template <typename T> struct element_type_of;
template <> struct element_type_of<std::int8_t> {
  static constexpr ElementType value = ElementType::int8;
};
template <> struct element_type_of<std::int16_t> {
  static constexpr ElementType value = ElementType::int16;
};
template <> struct element_type_of<std::int32_t> {
  static constexpr ElementType value = ElementType::int32;
};
template <> struct element_type_of<std::int64_t> {
  static constexpr ElementType value = ElementType::int64;
};
template <> struct element_type_of<float> {
  static constexpr ElementType value = ElementType::float32;
};
template <> struct element_type_of<double> {
  static constexpr ElementType value = ElementType::float64;
};

template <typename T>
inline constexpr ElementType element_type_v = element_type_of<T>::value;

// Integer kernels wrap at the storage width. Doing the arithmetic in the
// unsigned counterpart keeps the wrap well defined, the final narrowing
// conversion back to the signed type is modular in C++20.
template <typename T>
constexpr T wrapping_mul_add(T acc, T a, T b) {
  if constexpr (std::is_floating_point_v<T>) {
    return acc + a * b;
  } else {
    using U = std::make_unsigned_t<T>;
    U prod = static_cast<U>(static_cast<U>(a) * static_cast<U>(b));
    return static_cast<T>(static_cast<U>(static_cast<U>(acc) + prod));
  }
}

template <typename T>
constexpr T wrapping_add(T a, T b) {
  if constexpr (std::is_floating_point_v<T>) {
    return a + b;
  } else {
    using U = std::make_unsigned_t<T>;
    return static_cast<T>(static_cast<U>(static_cast<U>(a) + static_cast<U>(b)));
  }
}

// Raw file/generator values are carried as double. Integer targets truncate
// toward zero and saturate at the type bounds; float32 narrows.
template <typename T>
T convert_value(double v) {
  if constexpr (std::is_same_v<T, double>) {
    return v;
  } else if constexpr (std::is_same_v<T, float>) {
    return static_cast<float>(v);
  } else {
    double t = v < 0 ? -std::floor(-v) : std::floor(v);
    constexpr double lo = static_cast<double>(std::numeric_limits<T>::min());
    constexpr double hi = static_cast<double>(std::numeric_limits<T>::max());
    if (t <= lo) return std::numeric_limits<T>::min();
    if (t >= hi) return std::numeric_limits<T>::max();
    return static_cast<T>(t);
  }
}

constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return b == 0 ? 0 : (a + b - 1) / b;
}

// Invokes fn with one value of type T per ElementType tag.
template <typename Fn>
decltype(auto) dispatch_element_type(ElementType t, Fn&& fn) {
  switch (t) {
    case ElementType::int8: return fn(std::int8_t{});
    case ElementType::int16: return fn(std::int16_t{});
    case ElementType::int32: return fn(std::int32_t{});
    case ElementType::int64: return fn(std::int64_t{});
    case ElementType::float32: return fn(float{});
    case ElementType::float64: return fn(double{});
  }
  throw std::invalid_argument("unknown element type");
}

}  // namespace pimspmv
