#pragma once

// Numeric policies shared by the signal-processing stages.
//
// Every stage is written once against this interface and instantiated twice:
// with SoftArith (the hardware-faithful path, all arithmetic through the bit
// level FPU) and with RefArith (host double precision, used to bound the soft
// FPU's drift).

#include <concepts>
#include <cstdint>

#include "fecg/fpu.hpp"

namespace fecg {

template <class A>
concept Arithmetic = requires(A& arith, const A& carith, typename A::value_type v, double d) {
  { arith.add(v, v) } -> std::same_as<typename A::value_type>;
  { arith.sub(v, v) } -> std::same_as<typename A::value_type>;
  { arith.mul(v, v) } -> std::same_as<typename A::value_type>;
  { arith.greater(v, v) } -> std::same_as<bool>;
  { arith.less(v, v) } -> std::same_as<bool>;
  { A::constant(d) } -> std::same_as<typename A::value_type>;
  { A::to_double(v) } -> std::same_as<double>;
  { carith.ops() } -> std::convertible_to<std::uint64_t>;
};

class SoftArith {
 public:
  using value_type = fpu::F32Bits;

  explicit SoftArith(fpu::CmpMode mode = fpu::CmpMode::corrected) : mode_(mode) {}

  value_type add(value_type a, value_type b) { return record(fpu::add(a, b)); }
  value_type sub(value_type a, value_type b) { return record(fpu::sub(a, b)); }
  value_type mul(value_type a, value_type b) { return record(fpu::mul(a, b)); }
  bool greater(value_type a, value_type b) { return compare(a, b) == fpu::CmpCode::greater; }
  bool less(value_type a, value_type b) { return compare(a, b) == fpu::CmpCode::less; }

  static value_type constant(double v) { return fpu::F32Bits::from_double(v); }
  static double to_double(value_type v) { return v.to_double(); }

  std::uint64_t ops() const { return ops_; }
  fpu::Status status() const { return status_; }
  fpu::CmpMode cmp_mode() const { return mode_; }

 private:
  value_type record(fpu::Result r) {
    ++ops_;
    status_ |= r.status;
    return r.value;
  }
  fpu::CmpCode compare(value_type a, value_type b) {
    ++ops_;
    return fpu::compare(a, b, mode_);
  }

  fpu::CmpMode mode_;
  fpu::Status status_;
  std::uint64_t ops_ = 0;
};

class RefArith {
 public:
  using value_type = double;

  value_type add(value_type a, value_type b) { return ++ops_, a + b; }
  value_type sub(value_type a, value_type b) { return ++ops_, a - b; }
  value_type mul(value_type a, value_type b) { return ++ops_, a * b; }
  bool greater(value_type a, value_type b) { return ++ops_, a > b; }
  bool less(value_type a, value_type b) { return ++ops_, a < b; }

  static value_type constant(double v) { return v; }
  static double to_double(value_type v) { return v; }

  std::uint64_t ops() const { return ops_; }

 private:
  std::uint64_t ops_ = 0;
};

static_assert(Arithmetic<SoftArith>);
static_assert(Arithmetic<RefArith>);

}  // namespace fecg
