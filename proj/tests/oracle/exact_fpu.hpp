#pragma once

// Reference single-precision add and multiply on exact integers.
//
// Operands are decoded to (sign, 24-bit integer mantissa, exponent); the sum
// or product is formed exactly in arbitrary precision and then truncated
// toward zero to 24 significant bits. Saturation and flush-to-zero follow
// the same policy as the unit under test.

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using boost::multiprecision::cpp_int;

struct Decoded {
  bool negative = false;
  bool zero = true;
  std::uint32_t mantissa = 0;  // with the hidden bit
  int exponent = 0;            // biased
};

inline Decoded decode(std::uint32_t w) {
  Decoded d;
  d.negative = (w >> 31) != 0;
  d.exponent = static_cast<int>((w >> 23) & 0xffu);
  if (d.exponent == 0) return d;
  d.zero = false;
  d.mantissa = (w & 0x7fffffu) | 0x800000u;
  return d;
}

/// Value = magnitude * 2^(scale - 150) with sign `negative`.
inline std::uint32_t truncate_to_single(bool negative, cpp_int magnitude, int scale) {
  if (magnitude == 0) return 0;  // exact zero is +0
  const int bits = static_cast<int>(boost::multiprecision::msb(magnitude)) + 1;
  const int biased = bits + scale - 24;
  const std::uint32_t sign = negative ? 0x80000000u : 0u;
  if (biased > 254) return sign | (254u << 23) | 0x7fffffu;
  if (biased < 1) return sign;
  cpp_int top = bits > 24 ? cpp_int(magnitude >> (bits - 24)) : cpp_int(magnitude << (24 - bits));
  const auto m = static_cast<std::uint32_t>(top);
  return sign | (static_cast<std::uint32_t>(biased) << 23) | (m & 0x7fffffu);
}

inline std::uint32_t add(std::uint32_t a, std::uint32_t b) {
  const Decoded x = decode(a);
  const Decoded y = decode(b);
  if (x.zero && y.zero) return (x.negative && y.negative) ? 0x80000000u : 0u;
  if (x.zero) return b;
  if (y.zero) return a;
  const int lo = std::min(x.exponent, y.exponent);
  cpp_int sx = cpp_int(x.mantissa) << (x.exponent - lo);
  cpp_int sy = cpp_int(y.mantissa) << (y.exponent - lo);
  if (x.negative) sx = -sx;
  if (y.negative) sy = -sy;
  const cpp_int s = sx + sy;
  return truncate_to_single(s < 0, boost::multiprecision::abs(s), lo);
}

inline std::uint32_t sub(std::uint32_t a, std::uint32_t b) { return add(a, b ^ 0x80000000u); }

inline std::uint32_t mul(std::uint32_t a, std::uint32_t b) {
  const Decoded x = decode(a);
  const Decoded y = decode(b);
  const bool negative = x.negative != y.negative;
  if (x.zero || y.zero) return negative ? 0x80000000u : 0u;
  const cpp_int p = cpp_int(x.mantissa) * cpp_int(y.mantissa);
  // p * 2^(ex + ey - 300) = p * 2^((ex + ey - 150) - 150)
  return truncate_to_single(negative, p, x.exponent + y.exponent - 150);
}

}  // namespace oracle
