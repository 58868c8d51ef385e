#pragma once

// Bit-level single-precision floating point unit.
//
// Operands are raw 32-bit words. Every operation unpacks sign, exponent and
// the 24-bit mantissa (implicit 1 concatenated to the fraction), works on
// integers only, and repacks. Results are truncated (round toward zero);
// subnormals, infinities and NaN are not modeled. Exponent overflow
// saturates to +-max-normal and underflow flushes to signed zero, each
// raising a status flag.

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace fecg::fpu {

inline constexpr int kBias = 127;
inline constexpr int kFractionBits = 23;
inline constexpr int kMaxExponent = 254;
inline constexpr std::uint32_t kFractionMask = 0x007f'ffffu;
inline constexpr std::uint32_t kImplicitBit = 1u << kFractionBits;

class F32Bits {
 public:
  constexpr F32Bits() = default;
  constexpr explicit F32Bits(std::uint32_t word) : word_(word) {}

  static constexpr F32Bits encode(std::uint32_t sign, std::uint32_t exponent,
                                  std::uint32_t fraction) {
    return F32Bits(((sign & 1u) << 31) | ((exponent & 0xffu) << kFractionBits) |
                   (fraction & kFractionMask));
  }
  static F32Bits from_float(float v) { return F32Bits(std::bit_cast<std::uint32_t>(v)); }
  /// Host conversion (round to nearest). Used only to encode constants and
  /// incoming samples; arithmetic never goes through the host FPU.
  static F32Bits from_double(double v) { return from_float(static_cast<float>(v)); }

  static constexpr F32Bits max_normal(std::uint32_t sign) {
    return encode(sign, kMaxExponent, kFractionMask);
  }

  constexpr std::uint32_t word() const { return word_; }
  constexpr std::uint32_t sign() const { return word_ >> 31; }
  constexpr std::uint32_t exponent() const { return (word_ >> kFractionBits) & 0xffu; }
  constexpr std::uint32_t fraction() const { return word_ & kFractionMask; }
  /// 1.f as a 24-bit integer.
  constexpr std::uint32_t mantissa() const { return kImplicitBit | fraction(); }

  constexpr bool is_zero() const { return (word_ & 0x7fff'ffffu) == 0; }
  constexpr bool is_normal() const { return exponent() >= 1 && exponent() <= kMaxExponent; }

  constexpr F32Bits negated() const { return F32Bits(word_ ^ 0x8000'0000u); }

  float to_float() const { return std::bit_cast<float>(word_); }
  double to_double() const { return static_cast<double>(to_float()); }

  friend constexpr bool operator==(F32Bits, F32Bits) = default;

 private:
  std::uint32_t word_ = 0;
};

enum class Flag : std::uint8_t {
  overflow = 1u << 0,
  underflow = 1u << 1,
  invalid = 1u << 2,  // operand outside the modeled set (subnormal, inf, NaN)
};

class Status {
 public:
  constexpr Status() = default;
  constexpr explicit Status(Flag f) : bits_(static_cast<std::uint8_t>(f)) {}

  constexpr void set(Flag f) { bits_ |= static_cast<std::uint8_t>(f); }
  constexpr bool test(Flag f) const { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
  constexpr bool any() const { return bits_ != 0; }
  constexpr std::uint8_t bits() const { return bits_; }

  constexpr Status& operator|=(Status other) {
    bits_ |= other.bits_;
    return *this;
  }
  friend constexpr bool operator==(Status, Status) = default;

  std::string to_string() const;

 private:
  std::uint8_t bits_ = 0;
};

struct Result {
  F32Bits value;
  Status status;
};

/// The FPU's 2-bit operation selector.
enum class OpCode : std::uint8_t { add = 0b00, sub = 0b01, mul = 0b10, cmp = 0b11 };

/// Throws std::invalid_argument for selectors outside the four defined codes.
OpCode opcode_from_bits(unsigned bits);
OpCode opcode_from_name(std::string_view name);
std::string_view to_string(OpCode op);

/// Comparator output; stored in the low two bits of a 32-bit word.
enum class CmpCode : std::uint32_t { equal = 0b00, greater = 0b01, less = 0b10 };

enum class CmpMode : std::uint8_t {
  literal,    // raw-field magnitude order: mis-orders two negative operands
  corrected,  // magnitude ordering inverted when both operands are negative
};

CmpMode cmp_mode_from_name(std::string_view name);
std::string_view to_string(CmpMode mode);

struct Normalized {
  std::uint32_t fraction = 0;  // 23 bits
  std::uint32_t exponent = 0;  // biased, 8 bits
  Status status;
};

/// Positions the leading 1 of `mantissa` at the implicit-bit slot.
/// The input value is mantissa * 2^-point * 2^(exponent - bias); bits below
/// the 23-bit fraction are dropped. Precondition: mantissa != 0.
Normalized normalize(std::uint64_t mantissa, int exponent, int point = kFractionBits);

Result add(F32Bits a, F32Bits b);
Result sub(F32Bits a, F32Bits b);
Result mul(F32Bits a, F32Bits b);
CmpCode compare(F32Bits a, F32Bits b, CmpMode mode = CmpMode::corrected);

/// Dispatches on the selector. A comparison result is packed into the low
/// two bits of the output word with the upper 30 bits zero.
Result execute(OpCode op, F32Bits a, F32Bits b, CmpMode mode = CmpMode::corrected);

/// Exactly 8 hex digits, optional 0x prefix.
F32Bits parse_hex(std::string_view text);
std::string to_hex(F32Bits value);

}  // namespace fecg::fpu
