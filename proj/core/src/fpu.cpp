#include "fecg/fpu.hpp"

#include <bit>
#include <charconv>
#include <stdexcept>
#include <utility>

namespace fecg::fpu {
namespace {

// Guard, round and sticky positions appended below the mantissa during
// alignment. With them the truncated result equals the exact sum truncated.
constexpr int kGuardBits = 3;

struct Unpacked {
  std::uint32_t sign = 0;
  int exponent = 0;
  std::uint32_t mantissa = 0;  // 24 bits, 0 for zero
  bool zero = true;
};

Unpacked unpack(F32Bits v, Status& status) {
  Unpacked u;
  u.sign = v.sign();
  std::uint32_t e = v.exponent();
  std::uint32_t f = v.fraction();
  if (e == 0) {
    if (f != 0) status.set(Flag::invalid);
    return u;
  }
  if (e == 0xff) {
    status.set(Flag::invalid);
    e = kMaxExponent;
    f = kFractionMask;
  }
  u.exponent = static_cast<int>(e);
  u.mantissa = kImplicitBit | f;
  u.zero = false;
  return u;
}

F32Bits pack(std::uint32_t sign, const Normalized& n) {
  return F32Bits::encode(sign, n.exponent, n.fraction);
}

F32Bits pack(const Unpacked& u) {
  if (u.zero) return F32Bits::encode(u.sign, 0, 0);
  return F32Bits::encode(u.sign, static_cast<std::uint32_t>(u.exponent), u.mantissa);
}

std::uint64_t shift_right_sticky(std::uint64_t v, int n) {
  if (n <= 0) return v;
  if (n >= 64) return v != 0 ? 1 : 0;
  const std::uint64_t lost = v & ((std::uint64_t{1} << n) - 1);
  return (v >> n) | (lost != 0 ? 1 : 0);
}

Result finish(std::uint32_t sign, std::uint64_t mantissa, int exponent, int point,
              Status status) {
  const Normalized n = normalize(mantissa, exponent, point);
  status |= n.status;
  if (n.status.test(Flag::underflow)) return {F32Bits::encode(sign, 0, 0), status};
  return {pack(sign, n), status};
}

CmpCode order(std::uint32_t lhs, std::uint32_t rhs) {
  if (lhs > rhs) return CmpCode::greater;
  if (rhs > lhs) return CmpCode::less;
  return CmpCode::equal;
}

CmpCode invert(CmpCode c) {
  switch (c) {
    case CmpCode::greater: return CmpCode::less;
    case CmpCode::less: return CmpCode::greater;
    case CmpCode::equal: break;
  }
  return CmpCode::equal;
}

}  // namespace

std::string Status::to_string() const {
  if (!any()) return "none";
  std::string out;
  auto append = [&](Flag f, const char* name) {
    if (!test(f)) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  append(Flag::overflow, "overflow");
  append(Flag::underflow, "underflow");
  append(Flag::invalid, "invalid");
  return out;
}

OpCode opcode_from_bits(unsigned bits) {
  if (bits > 0b11) throw std::invalid_argument("FPU selector must be a 2-bit value");
  return static_cast<OpCode>(bits);
}

OpCode opcode_from_name(std::string_view name) {
  if (name == "add") return OpCode::add;
  if (name == "sub") return OpCode::sub;
  if (name == "mul") return OpCode::mul;
  if (name == "cmp") return OpCode::cmp;
  throw std::invalid_argument("unknown FPU operation '" + std::string(name) + "'");
}

std::string_view to_string(OpCode op) {
  switch (op) {
    case OpCode::add: return "add";
    case OpCode::sub: return "sub";
    case OpCode::mul: return "mul";
    case OpCode::cmp: return "cmp";
  }
  return "?";
}

CmpMode cmp_mode_from_name(std::string_view name) {
  if (name == "literal") return CmpMode::literal;
  if (name == "corrected") return CmpMode::corrected;
  throw std::invalid_argument("comparator mode must be 'literal' or 'corrected'");
}

std::string_view to_string(CmpMode mode) {
  return mode == CmpMode::literal ? "literal" : "corrected";
}

Normalized normalize(std::uint64_t mantissa, int exponent, int point) {
  // Closed form of the shift loop: one left shift (and exponent decrement)
  // per leading zero, or right shifts when an add carried past the slot.
  const int lead = std::bit_width(mantissa) - 1;
  const int e = exponent + (lead - point);
  const std::uint64_t aligned = lead >= kFractionBits ? mantissa >> (lead - kFractionBits)
                                                      : mantissa << (kFractionBits - lead);
  Normalized n;
  if (e > kMaxExponent) {
    n.fraction = kFractionMask;
    n.exponent = kMaxExponent;
    n.status.set(Flag::overflow);
    return n;
  }
  if (e < 1) {
    n.status.set(Flag::underflow);
    return n;
  }
  n.fraction = static_cast<std::uint32_t>(aligned) & kFractionMask;
  n.exponent = static_cast<std::uint32_t>(e);
  return n;
}

Result add(F32Bits a, F32Bits b) {
  Status status;
  Unpacked x = unpack(a, status);
  Unpacked y = unpack(b, status);

  if (x.zero && y.zero) return {F32Bits::encode(x.sign & y.sign, 0, 0), status};
  if (x.zero) return {pack(y), status};
  if (y.zero) return {pack(x), status};

  // The larger magnitude keeps its exponent; the other mantissa is shifted
  // right by the exponent difference.
  if (y.exponent > x.exponent || (y.exponent == x.exponent && y.mantissa > x.mantissa)) {
    std::swap(x, y);
  }
  const int d = x.exponent - y.exponent;
  const std::uint64_t big = std::uint64_t{x.mantissa} << kGuardBits;
  const std::uint64_t small = shift_right_sticky(std::uint64_t{y.mantissa} << kGuardBits, d);

  std::uint64_t m = 0;
  if (x.sign == y.sign) {
    m = big + small;
  } else {
    m = big - small;
    if (m == 0) return {F32Bits{}, status};
  }
  return finish(x.sign, m, x.exponent, kFractionBits + kGuardBits, status);
}

Result sub(F32Bits a, F32Bits b) { return add(a, b.negated()); }

Result mul(F32Bits a, F32Bits b) {
  Status status;
  const Unpacked x = unpack(a, status);
  const Unpacked y = unpack(b, status);
  const std::uint32_t sign = x.sign ^ y.sign;
  if (x.zero || y.zero) return {F32Bits::encode(sign, 0, 0), status};

  const std::uint64_t product = std::uint64_t{x.mantissa} * y.mantissa;  // 48 bits
  return finish(sign, product, x.exponent + y.exponent - kBias, 2 * kFractionBits, status);
}

CmpCode compare(F32Bits a, F32Bits b, CmpMode mode) {
  if (mode == CmpMode::corrected && a.is_zero() && b.is_zero()) return CmpCode::equal;

  if (a.sign() > b.sign()) return CmpCode::less;
  if (b.sign() > a.sign()) return CmpCode::greater;

  CmpCode c = order(a.exponent(), b.exponent());
  if (c == CmpCode::equal) c = order(a.fraction(), b.fraction());
  if (mode == CmpMode::corrected && a.sign() == 1) c = invert(c);
  return c;
}

Result execute(OpCode op, F32Bits a, F32Bits b, CmpMode mode) {
  switch (op) {
    case OpCode::add: return add(a, b);
    case OpCode::sub: return sub(a, b);
    case OpCode::mul: return mul(a, b);
    case OpCode::cmp:
      return {F32Bits(static_cast<std::uint32_t>(compare(a, b, mode))), Status{}};
  }
  throw std::invalid_argument("invalid FPU selector");
}

F32Bits parse_hex(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  if (text.size() != 8) throw std::invalid_argument("expected 8 hex digits");
  std::uint32_t word = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), word, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("malformed hex word '" + std::string(text) + "'");
  }
  return F32Bits(word);
}

std::string to_hex(F32Bits value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(8, '0');
  std::uint32_t w = value.word();
  for (int i = 7; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[w & 0xfu];
    w >>= 4;
  }
  return out;
}

}  // namespace fecg::fpu
