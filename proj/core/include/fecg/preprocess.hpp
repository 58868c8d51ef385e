#pragma once

// Streaming preprocessing chain: low-pass Butterworth, notch, and the two
// stage moving-average baseline remover. One sample in, one sample out.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fecg/arith.hpp"

namespace fecg::preprocess {

/// Difference-equation coefficients in evaluation order:
/// O[k] = in[0] I[k] + in[1] I[k-1] + ... + out[0] O[k-1] + out[1] O[k-2] + ...
struct IirCoefficients {
  std::vector<double> input;
  std::vector<double> output;
};

/// Fourth-order low pass, 45 Hz cutoff at 1 kHz; single input term.
inline IirCoefficients butterworth_coefficients() {
  return {{0.00308}, {3.28391, -4.08689, 2.28117, -0.48140}};
}

inline IirCoefficients notch_coefficients() {
  return {{0.99405, -1.31278, 0.99405}, {1.31272, -0.98804}};
}

inline constexpr std::size_t kBaselineWindow = 200;

template <Arithmetic A>
class IirFilter {
 public:
  using value_type = typename A::value_type;

  IirFilter(A& arith, const IirCoefficients& c) : arith_(&arith) {
    if (c.input.empty()) throw std::invalid_argument("IIR filter needs an input coefficient");
    for (double v : c.input) in_coef_.push_back(A::constant(v));
    for (double v : c.output) out_coef_.push_back(A::constant(v));
    past_inputs_.assign(c.input.size() - 1, value_type{});
    past_outputs_.assign(c.output.size(), value_type{});
  }

  value_type step(value_type sample) {
    A& a = *arith_;
    value_type acc = a.mul(in_coef_[0], sample);
    for (std::size_t i = 1; i < in_coef_.size(); ++i) {
      acc = a.add(acc, a.mul(in_coef_[i], past_inputs_[i - 1]));
    }
    for (std::size_t j = 0; j < out_coef_.size(); ++j) {
      acc = a.add(acc, a.mul(out_coef_[j], past_outputs_[j]));
    }
    shift_in(past_inputs_, sample);
    shift_in(past_outputs_, acc);
    return acc;
  }

  void reset() {
    std::fill(past_inputs_.begin(), past_inputs_.end(), value_type{});
    std::fill(past_outputs_.begin(), past_outputs_.end(), value_type{});
  }

  std::span<const value_type> past_inputs() const { return past_inputs_; }
  std::span<const value_type> past_outputs() const { return past_outputs_; }

 private:
  static void shift_in(std::vector<value_type>& line, value_type v) {
    if (line.empty()) return;
    for (std::size_t i = line.size() - 1; i > 0; --i) line[i] = line[i - 1];
    line[0] = v;
  }

  A* arith_;
  std::vector<value_type> in_coef_;
  std::vector<value_type> out_coef_;
  std::vector<value_type> past_inputs_;
  std::vector<value_type> past_outputs_;
};

/// Two-stage moving average (running sums over rings of pre-scaled values).
/// Rings start zeroed, so an under-filled ring evicts zeros.
template <Arithmetic A>
class BaselineRemover {
 public:
  using value_type = typename A::value_type;

  struct Output {
    value_type baseline;
    value_type corrected;
  };

  BaselineRemover(A& arith, std::size_t n1 = kBaselineWindow, std::size_t n2 = kBaselineWindow)
      : arith_(&arith),
        inv_n1_(A::constant(1.0 / static_cast<double>(check(n1)))),
        inv_n2_(A::constant(1.0 / static_cast<double>(check(n2)))),
        memory1_(n1, value_type{}),
        memory2_(n2, value_type{}) {}

  Output step(value_type sample) {
    A& a = *arith_;
    const value_type s = a.mul(sample, inv_n1_);
    m1_ = a.add(m1_, a.sub(s, memory1_[pos1_]));
    memory1_[pos1_] = s;
    pos1_ = (pos1_ + 1) % memory1_.size();
    if (pos1_ == 0) m1_ = ring_sum(memory1_);

    const value_type t = a.mul(m1_, inv_n2_);
    m2_ = a.add(m2_, a.sub(t, memory2_[pos2_]));
    memory2_[pos2_] = t;
    pos2_ = (pos2_ + 1) % memory2_.size();
    if (pos2_ == 0) m2_ = ring_sum(memory2_);

    ++steps_;
    return {m2_, a.sub(sample, m2_)};
  }

  value_type first_stage_mean() const { return m1_; }
  value_type second_stage_mean() const { return m2_; }
  std::span<const value_type> memory1() const { return memory1_; }
  std::span<const value_type> memory2() const { return memory2_; }
  std::size_t occupancy1() const { return std::min(steps_, memory1_.size()); }
  std::size_t occupancy2() const { return std::min(steps_, memory2_.size()); }
  std::size_t warmup() const { return memory1_.size() + memory2_.size(); }

 private:
  static std::size_t check(std::size_t n) {
    if (n == 0) throw std::invalid_argument("moving-average window must be positive");
    return n;
  }

  // Truncating adds bias the running sum toward zero; re-summing the ring
  // once per revolution keeps that drift bounded by one window.
  value_type ring_sum(const std::vector<value_type>& ring) const {
    value_type acc{};
    for (const auto& v : ring) acc = arith_->add(acc, v);
    return acc;
  }

  A* arith_;
  value_type inv_n1_;
  value_type inv_n2_;
  std::vector<value_type> memory1_;
  std::vector<value_type> memory2_;
  std::size_t pos1_ = 0;
  std::size_t pos2_ = 0;
  std::size_t steps_ = 0;
  value_type m1_{};
  value_type m2_{};
};

/// Butterworth -> notch -> baseline removal.
template <Arithmetic A>
class Preprocessor {
 public:
  using value_type = typename A::value_type;

  struct Output {
    value_type low_passed;
    value_type notched;
    value_type baseline;
    value_type corrected;
  };

  explicit Preprocessor(A& arith, std::size_t n1 = kBaselineWindow,
                        std::size_t n2 = kBaselineWindow)
      : butterworth_(arith, butterworth_coefficients()),
        notch_(arith, notch_coefficients()),
        baseline_(arith, n1, n2) {}

  Output step(value_type sample) {
    Output out;
    out.low_passed = butterworth_.step(sample);
    out.notched = notch_.step(out.low_passed);
    const auto b = baseline_.step(out.notched);
    out.baseline = b.baseline;
    out.corrected = b.corrected;
    ++samples_;
    return out;
  }

  /// True while the baseline rings have not yet seen N1 + N2 samples.
  bool in_warmup() const { return samples_ <= baseline_.warmup(); }
  std::size_t warmup() const { return baseline_.warmup(); }

 private:
  IirFilter<A> butterworth_;
  IirFilter<A> notch_;
  BaselineRemover<A> baseline_;
  std::size_t samples_ = 0;
};

/// Runs a whole channel through a fresh chain and returns the corrected output.
template <Arithmetic A>
std::vector<typename A::value_type> preprocess_channel(A& arith, std::span<const double> samples) {
  Preprocessor<A> chain(arith);
  std::vector<typename A::value_type> out;
  out.reserve(samples.size());
  for (double x : samples) out.push_back(chain.step(A::constant(x)).corrected);
  return out;
}

}  // namespace fecg::preprocess
