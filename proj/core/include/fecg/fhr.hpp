#pragma once

// Fetal R-peak detection and heart-rate estimation.
//
// Pass 1 streams the LMS error through the enhancer (first difference,
// square, length-P moving sum of sdiff/P) and accumulates m1, the mean of
// sdm. Pass 2 walks the buffered sdm: one local maximum per excursion above
// m1, m2 = mean of those maxima, th = (m1 + m2) / 2, then the survivors above
// th are arbitrated so accepted peaks are more than `gap` samples apart.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fecg/arith.hpp"
#include "fecg/error.hpp"
#include "fecg/fpu.hpp"

namespace fecg::fhr {

inline constexpr std::size_t kEnhanceWindow = 40;
inline constexpr std::size_t kConvergenceIndex = 12'000;
inline constexpr double kArbitrationSeconds = 0.2;  // 200 samples at 1 kHz
inline constexpr double kMatchWindowSeconds = 0.05;
inline constexpr double kMinPlausibleBpm = 50.0;
inline constexpr double kMaxPlausibleBpm = 300.0;

/// Arbitration distance in samples for a sampling rate.
std::size_t arbitration_gap_for(double fs);

template <class V>
struct Peak {
  std::size_t location = 0;
  V value{};

  friend bool operator==(const Peak&, const Peak&) = default;
};

template <class V>
using PeakList = std::vector<Peak<V>>;
using PeakSet = PeakList<fpu::F32Bits>;

/// Sample indices only (annotations, aligned detections).
using Locations = std::vector<std::size_t>;

template <class V>
Locations locations_of(const PeakList<V>& peaks) {
  Locations out;
  out.reserve(peaks.size());
  for (const auto& p : peaks) out.push_back(p.location);
  return out;
}

template <Arithmetic A>
class PeakEnhancer {
 public:
  using value_type = typename A::value_type;

  /// `total` is the stream length N, known before the stream starts.
  PeakEnhancer(A& arith, std::size_t total, std::size_t window = kEnhanceWindow)
      : arith_(&arith), ring_(check(window, "enhancement window"), value_type{}) {
    inv_p_ = A::constant(1.0 / static_cast<double>(window));
    inv_n_ = A::constant(1.0 / static_cast<double>(check(total, "stream length")));
  }

  value_type step(value_type in) {
    A& a = *arith_;
    pval_ = cval_;
    cval_ = in;
    const value_type diff = a.sub(cval_, pval_);
    const value_type sdiff = a.mul(diff, diff);
    const value_type scaled = a.mul(sdiff, inv_p_);
    sdm_ = a.add(sdm_, a.sub(scaled, ring_[pos_]));
    ring_[pos_] = scaled;
    pos_ = (pos_ + 1) % ring_.size();
    if (pos_ == 0) {
      // Re-sum once per revolution so truncation drift stays bounded.
      sdm_ = value_type{};
      for (const auto& v : ring_) sdm_ = a.add(sdm_, v);
    }
    m1_ = a.add(m1_, a.mul(sdm_, inv_n_));
    return sdm_;
  }

  value_type sdm() const { return sdm_; }
  value_type m1() const { return m1_; }
  std::span<const value_type> ring() const { return ring_; }
  std::size_t window() const { return ring_.size(); }

 private:
  static std::size_t check(std::size_t n, const char* what) {
    if (n == 0) throw std::invalid_argument(std::string(what) + " must be positive");
    return n;
  }

  A* arith_;
  std::vector<value_type> ring_;
  std::size_t pos_ = 0;
  value_type inv_p_{};
  value_type inv_n_{};
  value_type pval_{};
  value_type cval_{};
  value_type sdm_{};
  value_type m1_{};
};

template <class V>
struct MaximaResult {
  PeakList<V> maxima;
  V m1{};
  V m2{};
  V th{};
  bool degenerate = false;  // nothing rose above m1; th = m1 / 2
};

/// Tracks the running maximum of each excursion above m1 and emits it on the
/// way back below m1. Ties keep the earliest index. An excursion still open
/// at end of stream is emitted by finish().
template <Arithmetic A>
class LocalMaximaDetector {
 public:
  using value_type = typename A::value_type;

  LocalMaximaDetector(A& arith, value_type m1) : arith_(&arith), m1_(m1) {}

  void step(value_type in) {
    A& a = *arith_;
    const std::size_t index = count_++;
    if (a.greater(in, m1_)) {
      if (!open_ || a.greater(in, current_.value)) current_ = {index, in};
      open_ = true;
    } else if (open_ && a.less(in, m1_)) {
      maxima_.push_back(current_);
      open_ = false;
    }
  }

  MaximaResult<value_type> finish() {
    A& a = *arith_;
    if (open_) {
      maxima_.push_back(current_);
      open_ = false;
    }
    MaximaResult<value_type> r;
    r.maxima = maxima_;
    r.m1 = m1_;
    const value_type half = A::constant(0.5);
    if (maxima_.empty()) {
      r.degenerate = true;
      r.th = a.mul(m1_, half);
      return r;
    }
    const value_type inv_k = A::constant(1.0 / static_cast<double>(maxima_.size()));
    value_type m2{};
    for (const auto& p : maxima_) m2 = a.add(m2, a.mul(p.value, inv_k));
    r.m2 = m2;
    r.th = a.mul(a.add(m1_, m2), half);
    return r;
  }

  std::size_t samples_seen() const { return count_; }

 private:
  A* arith_;
  value_type m1_;
  PeakList<value_type> maxima_;
  Peak<value_type> current_{};
  bool open_ = false;
  std::size_t count_ = 0;
};

template <Arithmetic A>
MaximaResult<typename A::value_type> find_local_maxima(
    A& arith, std::span<const typename A::value_type> sdm, typename A::value_type m1) {
  LocalMaximaDetector<A> det(arith, m1);
  for (const auto& v : sdm) det.step(v);
  return det.finish();
}

/// Drops maxima not above th, then keeps the larger of any two survivors
/// that are at most `gap` samples apart (register R1 holds the pending peak).
template <Arithmetic A>
PeakList<typename A::value_type> select_fetal_peaks(A& arith,
                                                    const PeakList<typename A::value_type>& maxima,
                                                    typename A::value_type th, std::size_t gap) {
  PeakList<typename A::value_type> out;
  std::optional<Peak<typename A::value_type>> r1;
  for (const auto& p : maxima) {
    if (!arith.greater(p.value, th)) continue;
    if (!r1) {
      r1 = p;
    } else if (p.location - r1->location > gap) {
      out.push_back(*r1);
      r1 = p;
    } else if (arith.greater(p.value, r1->value)) {
      r1 = p;
    }
  }
  if (r1) out.push_back(*r1);
  return out;
}

struct FhrParams {
  std::size_t enhance_window = kEnhanceWindow;
  std::size_t gap = 200;
};

template <class V>
struct Detection {
  std::vector<V> sdm;
  MaximaResult<V> maxima;
  PeakList<V> peaks;
  std::vector<std::string> warnings;
};

/// Both passes over a buffered signal.
template <Arithmetic A>
Detection<typename A::value_type> detect_peaks(A& arith,
                                               std::span<const typename A::value_type> signal,
                                               const FhrParams& params) {
  Detection<typename A::value_type> d;
  if (signal.empty()) {
    d.maxima.degenerate = true;
    d.warnings.emplace_back("empty signal: no peaks detected");
    return d;
  }
  PeakEnhancer<A> enh(arith, signal.size(), params.enhance_window);
  d.sdm.reserve(signal.size());
  for (const auto& v : signal) d.sdm.push_back(enh.step(v));
  d.maxima = find_local_maxima(arith, std::span<const typename A::value_type>(d.sdm), enh.m1());
  if (d.maxima.degenerate) d.warnings.emplace_back("degenerate threshold: no sample exceeds m1");
  d.peaks = select_fetal_peaks(arith, d.maxima.maxima, d.maxima.th, params.gap);
  if (d.peaks.empty()) d.warnings.emplace_back("no peak survived thresholding");
  return d;
}

/// Single-mean comparison detector: every local maximum above m1 counts,
/// with no second mean and no arbitration.
template <class V>
Locations single_mean_detections(const MaximaResult<V>& maxima) {
  return locations_of(maxima.maxima);
}

struct FhrResult {
  double fhr_bpm = 0.0;
  double mean_rr_seconds = 0.0;
  std::vector<std::size_t> rr_intervals;
  Locations peaks_used;
  std::vector<std::string> warnings;
};

/// Mean RR over consecutive peaks strictly after `convergence_index`.
/// Throws NoEstimateError with fewer than two such peaks.
FhrResult compute_fhr(std::span<const std::size_t> peaks, double fs,
                      std::size_t convergence_index = kConvergenceIndex);

struct Metrics {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t maternal = 0;
  double sensitivity = 0.0;  // percent
  double specificity = 0.0;
  double accuracy = 0.0;
};

/// Greedy one-to-one matching (closest pairs first) within +-window samples.
/// Fetal truths are the positive class, maternal truths the negative class:
/// a maternal truth counts as a true negative unless a false-positive
/// detection lies within the window. Only indices after `scored_after` take
/// part when it is set.
Metrics score_detection(std::span<const std::size_t> detected,
                        std::span<const std::size_t> truth_fetal,
                        std::span<const std::size_t> truth_maternal, std::size_t window,
                        std::optional<std::size_t> scored_after = std::nullopt);

/// Shifts every location back by `delay`, dropping those that would go
/// negative.
Locations align(std::span<const std::size_t> locations, std::size_t delay);

}  // namespace fecg::fhr
