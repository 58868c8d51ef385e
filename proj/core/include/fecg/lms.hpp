#pragma once

// LMS adaptive filter: the plain per-sample update and two cycle-level
// datapath models of it.
//
//   y[n] = sum_i scale(x[n-i]) * w_i          (left to right over taps)
//   e[n] = scale(d[n]) - y[n]
//   w_i += (beta * e[n]) * scale(x[n-i]),     beta = 2 mu
//
// The series model spends 2m+1 cycles per sample and issues a handful of FPU
// operations per cycle; the parallel model issues all 5m+3 operations in one
// cycle. Both follow the same operation order, so their outputs are
// bit-identical to lms_step.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fecg/arith.hpp"
#include "fecg/fpu.hpp"

namespace fecg::lms {

inline constexpr std::size_t kDefaultOrder = 19;
inline constexpr double kDefaultStepSize = 7e-5;
/// Sample after which the weights are treated as converged.
inline constexpr std::size_t kConvergenceIndex = 12'000;

struct LmsConfig {
  std::size_t order = kDefaultOrder;
  double mu = kDefaultStepSize;
  double input_scale = 1.0;    // abdominal channel, x
  double desired_scale = 1.0;  // thoracic channel, d

  double beta() const { return 2.0 * mu; }
  void validate() const;
};

template <class V>
struct LmsConstants {
  V beta;
  V input_scale;
  V desired_scale;
};

template <Arithmetic A>
LmsConstants<typename A::value_type> make_constants(const LmsConfig& cfg) {
  cfg.validate();
  return {A::constant(cfg.beta()), A::constant(cfg.input_scale), A::constant(cfg.desired_scale)};
}

/// Memory 1 (window, most recent first, plus the series staging slot),
/// Memory 2 (weights, aligned with the window) and the desired register.
template <class V>
struct LmsState {
  std::vector<V> window;
  std::vector<V> weights;
  V spare{};
  V desired{};

  explicit LmsState(std::size_t order) : window(order, V{}), weights(order, V{}) {
    if (order == 0) throw std::invalid_argument("LMS order must be at least 1");
  }

  std::size_t order() const { return window.size(); }

  void reset() {
    std::fill(window.begin(), window.end(), V{});
    std::fill(weights.begin(), weights.end(), V{});
    spare = V{};
    desired = V{};
  }
};

template <class V>
struct StepOutput {
  V error;
  V output;
};

template <Arithmetic A>
StepOutput<typename A::value_type> lms_step(A& a, LmsState<typename A::value_type>& s,
                                            const LmsConstants<typename A::value_type>& k,
                                            typename A::value_type x_new,
                                            typename A::value_type d_new) {
  using V = typename A::value_type;
  const std::size_t m = s.order();
  for (std::size_t i = m - 1; i > 0; --i) s.window[i] = s.window[i - 1];
  s.window[0] = x_new;
  s.desired = d_new;

  V y{};
  for (std::size_t i = 0; i < m; ++i) {
    y = a.add(y, a.mul(a.mul(s.window[i], k.input_scale), s.weights[i]));
  }
  const V e = a.sub(a.mul(s.desired, k.desired_scale), y);
  const V be = a.mul(k.beta, e);
  for (std::size_t i = 0; i < m; ++i) {
    s.weights[i] = a.add(s.weights[i], a.mul(be, a.mul(s.window[i], k.input_scale)));
  }
  return {e, y};
}

inline fpu::F32Bits scale(fpu::F32Bits sample, fpu::F32Bits factor) {
  return fpu::mul(sample, factor).value;
}

/// Largest power of two f with (99th-percentile |x|) * f <= target.
/// Returns 1 for an all-zero channel.
double auto_scale_factor(std::span<const double> channel, double target = 2.0,
                         double percentile = 0.99);
double percentile_magnitude(std::span<const double> channel, double percentile);

struct CycleStats {
  std::uint64_t cycles_per_sample = 0;
  std::uint64_t total_cycles = 0;
  std::uint64_t fpu_instances = 0;
  std::uint64_t fpu_ops_issued = 0;
  std::uint64_t samples_processed = 0;
  std::uint64_t peak_ops_per_cycle = 0;

  friend bool operator==(const CycleStats&, const CycleStats&) = default;
};

enum class Architecture { series, parallel };

std::string_view to_string(Architecture arch);

struct SampleResult {
  fpu::F32Bits error;
  fpu::F32Bits output;
};

/// Common bookkeeping for the two datapath models.
class Datapath {
 public:
  virtual ~Datapath() = default;

  virtual SampleResult sample(fpu::F32Bits x_new, fpu::F32Bits d_new) = 0;
  virtual Architecture architecture() const = 0;

  const CycleStats& stats() const { return stats_; }
  const LmsState<fpu::F32Bits>& state() const { return state_; }
  fpu::Status status() const { return arith_.status(); }
  /// Index of the first sample during which an FPU flag was raised.
  std::optional<std::size_t> first_flagged_sample() const { return first_flagged_; }

 protected:
  Datapath(const LmsConfig& cfg, std::uint64_t cycles_per_sample, std::uint64_t instances);

  void begin_cycle() { cycle_start_ops_ = arith_.ops(); }
  void end_cycle();
  void end_sample();

  SoftArith arith_;
  LmsConstants<fpu::F32Bits> k_;
  LmsState<fpu::F32Bits> state_;
  CycleStats stats_;

 private:
  std::uint64_t cycle_start_ops_ = 0;
  std::uint64_t cycles_this_sample_ = 0;
  std::optional<std::size_t> first_flagged_;
};

class SeriesDatapath final : public Datapath {
 public:
  static constexpr std::uint64_t kFpuInstances = 9;

  explicit SeriesDatapath(const LmsConfig& cfg);

  SampleResult sample(fpu::F32Bits x_new, fpu::F32Bits d_new) override;
  Architecture architecture() const override { return Architecture::series; }

  static std::uint64_t cycles_per_sample(std::size_t order) { return 2 * order + 1; }
};

class ParallelDatapath final : public Datapath {
 public:
  explicit ParallelDatapath(const LmsConfig& cfg);

  SampleResult sample(fpu::F32Bits x_new, fpu::F32Bits d_new) override;
  Architecture architecture() const override { return Architecture::parallel; }

  /// One FPU per operation of the single-cycle update: 98 at m = 19.
  static std::uint64_t fpu_instances(std::size_t order) { return 5 * order + 3; }
};

std::unique_ptr<Datapath> make_datapath(Architecture arch, const LmsConfig& cfg);

struct FilterRun {
  std::vector<fpu::F32Bits> error;
  CycleStats stats;
  fpu::Status status;
  std::optional<std::size_t> first_flagged_sample;
  std::vector<fpu::F32Bits> final_weights;
};

/// Streams a whole input/desired pair through one datapath.
FilterRun run_datapath(Architecture arch, const LmsConfig& cfg, std::span<const fpu::F32Bits> x,
                       std::span<const fpu::F32Bits> d);

}  // namespace fecg::lms
