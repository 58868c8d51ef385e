#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "exact_fpu.hpp"
#include "fecg/fpu.hpp"
#include "random_words.hpp"

using namespace fecg::fpu;

namespace {

F32Bits f(float v) { return F32Bits::from_float(v); }

constexpr int kPairs = 50'000;

}  // namespace

TEST(F32Bits, EncodeDecodeRoundTrip) {
  for (std::uint32_t s = 0; s <= 1; ++s) {
    for (std::uint32_t e = 0; e <= 255; ++e) {
      for (std::uint32_t frac : {0u, 1u, 0x400000u, 0x7fffffu, 0x123456u}) {
        const auto w = F32Bits::encode(s, e, frac);
        EXPECT_EQ(w.sign(), s);
        EXPECT_EQ(w.exponent(), e);
        EXPECT_EQ(w.fraction(), frac);
      }
    }
  }
}

TEST(F32Bits, ZeroAndNormalViews) {
  EXPECT_TRUE(F32Bits(0u).is_zero());
  EXPECT_TRUE(F32Bits(0x80000000u).is_zero());
  EXPECT_EQ(F32Bits(0x80000000u).sign(), 1u);
  EXPECT_FALSE(F32Bits(0u).is_normal());
  EXPECT_TRUE(f(1.0f).is_normal());
  EXPECT_FALSE(F32Bits::encode(0, 255, 0).is_normal());
  EXPECT_EQ(f(1.5f).mantissa(), 0xc00000u);
}

TEST(FpuAdd, ExactPowerOfTwoSum) { EXPECT_EQ(add(f(1.0f), f(1.0f)).value, f(2.0f)); }

TEST(FpuAdd, ExactCancellationGivesPositiveZero) {
  const auto r = add(f(1.5f), f(-1.5f));
  EXPECT_EQ(r.value.word(), 0u);
  EXPECT_FALSE(r.status.any());
}

TEST(FpuAdd, ZeroIsIdentity) {
  EXPECT_EQ(add(f(0.0f), f(-3.25f)).value, f(-3.25f));
  EXPECT_EQ(add(f(7.0f), f(0.0f)).value, f(7.0f));
  EXPECT_EQ(add(f(-0.0f), f(-0.0f)).value.word(), 0x80000000u);
  EXPECT_EQ(add(f(0.0f), f(-0.0f)).value.word(), 0u);
}

TEST(FpuAdd, FarSmallerOperandTruncatesTowardZero) {
  EXPECT_EQ(add(f(1.0f), f(std::ldexp(1.0f, -30))).value, f(1.0f));
  EXPECT_EQ(add(f(-8.0f), f(-std::ldexp(1.0f, -40))).value, f(-8.0f));
  // Opposite sign: the exact result sits just inside -8, one step toward zero.
  EXPECT_EQ(add(f(std::ldexp(1.0f, -40)), f(-8.0f)).value, f(std::nextafter(-8.0f, 0.0f)));
}

TEST(FpuAdd, TruncatesTowardZero) {
  // 1 + 2^-24 is halfway between 1 and the next float; truncation keeps 1.
  EXPECT_EQ(add(f(1.0f), f(std::ldexp(1.0f, -24))).value, f(1.0f));
  // 1 - 2^-25 rounds to 1 in IEEE, truncates to the float just below 1.
  EXPECT_EQ(add(f(1.0f), f(-std::ldexp(1.0f, -25))).value, F32Bits(0x3f7fffffu));
}

TEST(FpuAdd, OverflowSaturatesWithFlag) {
  const auto big = F32Bits::max_normal(0);
  const auto r = add(big, big);
  EXPECT_EQ(r.value, F32Bits::max_normal(0));
  EXPECT_TRUE(r.status.test(Flag::overflow));
  const auto n = add(big.negated(), big.negated());
  EXPECT_EQ(n.value, F32Bits::max_normal(1));
}

TEST(FpuAdd, UnderflowFlushesToSignedZero) {
  const auto a = F32Bits::encode(1, 1, 0x400000);  // -1.5 * 2^-126
  const auto b = F32Bits::encode(0, 1, 0);         // +1.0 * 2^-126
  const auto r = add(a, b);
  EXPECT_EQ(r.value.word(), 0x80000000u);
  EXPECT_TRUE(r.status.test(Flag::underflow));
}

TEST(FpuAdd, NonModeledInputsRaiseInvalid) {
  EXPECT_TRUE(add(F32Bits(0x00000001u), f(1.0f)).status.test(Flag::invalid));
  EXPECT_EQ(add(F32Bits(0x00000001u), f(1.0f)).value, f(1.0f));
  EXPECT_TRUE(add(F32Bits(0x7f800000u), f(1.0f)).status.test(Flag::invalid));
}

TEST(FpuAdd, Commutative) {
  testing_support::NormalPairs gen(11);
  for (int i = 0; i < kPairs; ++i) {
    const auto [a, b] = gen.pair();
    ASSERT_EQ(add(a, b).value, add(b, a).value) << to_hex(a) << " " << to_hex(b);
  }
}

TEST(FpuAdd, MatchesExactTruncationOracle) {
  testing_support::NormalPairs gen(12);
  for (int i = 0; i < kPairs; ++i) {
    const auto [a, b] = gen.pair();
    ASSERT_EQ(add(a, b).value.word(), oracle::add(a.word(), b.word()))
        << to_hex(a) << " + " << to_hex(b);
  }
}

TEST(FpuSub, ExactSubtraction) { EXPECT_EQ(sub(f(3.0f), f(1.0f)).value, f(2.0f)); }

TEST(FpuSub, SelfCancellation) {
  testing_support::NormalPairs gen(13);
  for (int i = 0; i < 1000; ++i) {
    const auto x = gen.word();
    EXPECT_EQ(sub(x, x).value.word(), 0u);
  }
}

TEST(FpuSub, EqualsAddOfNegation) {
  testing_support::NormalPairs gen(14);
  for (int i = 0; i < kPairs; ++i) {
    const auto [a, b] = gen.pair();
    ASSERT_EQ(sub(a, b).value, add(a, b.negated()).value);
    ASSERT_EQ(sub(a, b).value.word(), oracle::sub(a.word(), b.word()));
  }
}

TEST(FpuMul, Identity) {
  testing_support::NormalPairs gen(15, 1, 254);
  for (int i = 0; i < 1000; ++i) {
    const auto x = gen.word();
    EXPECT_EQ(mul(f(1.0f), x).value, x);
  }
}

TEST(FpuMul, SmallIntegers) { EXPECT_EQ(mul(f(2.0f), f(-3.0f)).value, f(-6.0f)); }

TEST(FpuMul, ZeroAbsorbsWithSign) {
  EXPECT_EQ(mul(f(0.0f), f(5.0f)).value.word(), 0u);
  EXPECT_EQ(mul(f(-0.0f), f(5.0f)).value.word(), 0x80000000u);
  EXPECT_EQ(mul(f(2.0f), f(-0.0f)).value.word(), 0x80000000u);
}

TEST(FpuMul, OverflowAndUnderflow) {
  const auto big = mul(f(1e30f), f(-1e30f));
  EXPECT_EQ(big.value, F32Bits::max_normal(1));
  EXPECT_TRUE(big.status.test(Flag::overflow));
  const auto tiny = mul(f(1e-30f), f(1e-30f));
  EXPECT_TRUE(tiny.value.is_zero());
  EXPECT_TRUE(tiny.status.test(Flag::underflow));
}

TEST(FpuMul, CommutativeAndMatchesOracle) {
  testing_support::NormalPairs gen(16, 60, 194);
  for (int i = 0; i < kPairs; ++i) {
    const auto [a, b] = gen.pair();
    ASSERT_EQ(mul(a, b).value, mul(b, a).value);
    ASSERT_EQ(mul(a, b).value.word(), oracle::mul(a.word(), b.word()))
        << to_hex(a) << " * " << to_hex(b);
  }
}

TEST(FpuAccuracy, WithinOneUlpOfRoundedResult) {
  testing_support::NormalPairs gen(17, 30, 224);
  for (int i = 0; i < kPairs; ++i) {
    const auto [a, b] = gen.pair();
    const float ra = a.to_float() + b.to_float();
    const float rm = a.to_float() * b.to_float();
    if (std::isnormal(ra)) {
      ASSERT_LE(testing_support::ulp_distance(add(a, b).value, F32Bits::from_float(ra)), 1);
    }
    if (std::isnormal(rm)) {
      ASSERT_LE(testing_support::ulp_distance(mul(a, b).value, F32Bits::from_float(rm)), 1);
    }
  }
}

TEST(Normalize, FixedPointForNormalizedMantissa) {
  const auto n = normalize(0xabcdefu | kImplicitBit, 100);
  EXPECT_EQ(n.exponent, 100u);
  EXPECT_EQ(n.fraction, (0xabcdefu | kImplicitBit) & kFractionMask);
  EXPECT_FALSE(n.status.any());
}

TEST(Normalize, SingleLeftShift) {
  // 0.1 in binary at the implicit-bit scale.
  const auto n = normalize(kImplicitBit >> 1, 100);
  EXPECT_EQ(n.exponent, 99u);
  EXPECT_EQ(n.fraction, 0u);
}

TEST(Normalize, WideProductLeadingBitAtImplicitSlot) {
  const std::uint64_t p = std::uint64_t{0xffffff} * 0xffffff;  // 48 bits
  const auto n = normalize(p, 127, 46);
  EXPECT_EQ(n.exponent, 128u);
  EXPECT_EQ(n.fraction, static_cast<std::uint32_t>(p >> 24) & kFractionMask);
}

TEST(Normalize, ExponentOutOfRangeRaisesFlags) {
  EXPECT_TRUE(normalize(kImplicitBit, 255).status.test(Flag::overflow));
  EXPECT_TRUE(normalize(kImplicitBit, 0).status.test(Flag::underflow));
}

TEST(FpuCompare, EqualPattern) {
  EXPECT_EQ(compare(f(3.5f), f(3.5f), CmpMode::literal), CmpCode::equal);
  EXPECT_EQ(compare(f(-3.5f), f(-3.5f), CmpMode::corrected), CmpCode::equal);
}

TEST(FpuCompare, PositiveOrderingBothModes) {
  EXPECT_EQ(compare(f(2.0f), f(1.0f), CmpMode::literal), CmpCode::greater);
  EXPECT_EQ(compare(f(2.0f), f(1.0f), CmpMode::corrected), CmpCode::greater);
}

TEST(FpuCompare, NegativePairDiffersBetweenModes) {
  EXPECT_EQ(compare(f(-1.0f), f(-2.0f), CmpMode::literal), CmpCode::less);
  EXPECT_EQ(compare(f(-1.0f), f(-2.0f), CmpMode::corrected), CmpCode::greater);
}

TEST(FpuCompare, SignsDecideMixedPairs) {
  for (auto mode : {CmpMode::literal, CmpMode::corrected}) {
    EXPECT_EQ(compare(f(-100.0f), f(0.5f), mode), CmpCode::less);
    EXPECT_EQ(compare(f(0.5f), f(-100.0f), mode), CmpCode::greater);
  }
}

TEST(FpuCompare, SignedZerosEqualWhenCorrected) {
  EXPECT_EQ(compare(f(-0.0f), f(0.0f), CmpMode::corrected), CmpCode::equal);
  EXPECT_EQ(compare(f(-0.0f), f(0.0f), CmpMode::literal), CmpCode::less);
}

TEST(FpuCompare, TrichotomyAndAntisymmetry) {
  testing_support::NormalPairs gen(18);
  for (int i = 0; i < kPairs; ++i) {
    const auto [a, b] = gen.pair();
    for (auto mode : {CmpMode::literal, CmpMode::corrected}) {
      const auto ab = compare(a, b, mode);
      const auto ba = compare(b, a, mode);
      ASSERT_TRUE(ab == CmpCode::equal || ab == CmpCode::greater || ab == CmpCode::less);
      ASSERT_EQ(ab == CmpCode::greater, ba == CmpCode::less);
      ASSERT_EQ(ab == CmpCode::equal, ba == CmpCode::equal);
    }
  }
}

TEST(FpuCompare, CorrectedModeMatchesNumericOrder) {
  testing_support::NormalPairs gen(19);
  for (int i = 0; i < kPairs; ++i) {
    const auto [a, b] = gen.pair();
    const float x = a.to_float();
    const float y = b.to_float();
    const CmpCode want = x > y ? CmpCode::greater : (x < y ? CmpCode::less : CmpCode::equal);
    ASSERT_EQ(compare(a, b), want) << to_hex(a) << " " << to_hex(b);
  }
}

TEST(FpuExecute, SelectorDispatchAndPackedCompare) {
  EXPECT_EQ(execute(OpCode::add, f(1.0f), f(2.0f)).value, f(3.0f));
  EXPECT_EQ(execute(OpCode::sub, f(1.0f), f(2.0f)).value, f(-1.0f));
  EXPECT_EQ(execute(OpCode::mul, f(1.5f), f(2.0f)).value, f(3.0f));
  const auto c = execute(OpCode::cmp, f(1.0f), f(2.0f));
  EXPECT_EQ(c.value.word(), 0b10u);
  EXPECT_EQ(c.value.word() & ~0b11u, 0u);
}

TEST(FpuOpCode, OnlyFourSelectors) {
  for (unsigned b = 0; b < 4; ++b) EXPECT_EQ(static_cast<unsigned>(opcode_from_bits(b)), b);
  EXPECT_THROW(opcode_from_bits(4), std::invalid_argument);
  EXPECT_THROW(opcode_from_name("div"), std::invalid_argument);
}

TEST(FpuHex, ParseAndFormat) {
  EXPECT_EQ(parse_hex("3f800000"), f(1.0f));
  EXPECT_EQ(parse_hex("0xC0400000"), f(-3.0f));
  EXPECT_EQ(to_hex(f(1.0f)), "3f800000");
  EXPECT_THROW(parse_hex("3f80000"), std::invalid_argument);
  EXPECT_THROW(parse_hex("3f80000g"), std::invalid_argument);
}
