#include "fecg/fhr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

namespace fecg::fhr {

std::size_t arbitration_gap_for(double fs) {
  if (!(fs > 0.0)) throw std::invalid_argument("sampling rate must be positive");
  return static_cast<std::size_t>(std::lround(kArbitrationSeconds * fs));
}

FhrResult compute_fhr(std::span<const std::size_t> peaks, double fs,
                      std::size_t convergence_index) {
  if (!(fs > 0.0)) throw std::invalid_argument("sampling rate must be positive");
  FhrResult r;
  for (std::size_t loc : peaks) {
    if (loc > convergence_index) r.peaks_used.push_back(loc);
  }
  if (r.peaks_used.size() < 2) {
    throw NoEstimateError("fewer than two peaks after sample " + std::to_string(convergence_index));
  }
  std::size_t sum = 0;
  for (std::size_t i = 1; i < r.peaks_used.size(); ++i) {
    if (r.peaks_used[i] <= r.peaks_used[i - 1]) {
      throw ValidationError("peak locations must be strictly increasing");
    }
    const std::size_t rr = r.peaks_used[i] - r.peaks_used[i - 1];
    r.rr_intervals.push_back(rr);
    sum += rr;
  }
  const double mean_rr = static_cast<double>(sum) / static_cast<double>(r.rr_intervals.size());
  r.mean_rr_seconds = mean_rr / fs;
  r.fhr_bpm = 60.0 / r.mean_rr_seconds;
  if (r.fhr_bpm < kMinPlausibleBpm || r.fhr_bpm > kMaxPlausibleBpm) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "implausible heart rate %.2f bpm", r.fhr_bpm);
    r.warnings.emplace_back(buf);
  }
  return r;
}

namespace {

Locations in_region(std::span<const std::size_t> v, std::optional<std::size_t> after) {
  Locations out;
  for (std::size_t i : v) {
    if (!after || i > *after) out.push_back(i);
  }
  return out;
}

std::size_t distance(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

bool any_within(const Locations& sorted, std::size_t x, std::size_t window) {
  const std::size_t lo_val = x > window ? x - window : 0;
  auto it = std::lower_bound(sorted.begin(), sorted.end(), lo_val);
  return it != sorted.end() && *it <= x + window;
}

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 100.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Metrics score_detection(std::span<const std::size_t> detected,
                        std::span<const std::size_t> truth_fetal,
                        std::span<const std::size_t> truth_maternal, std::size_t window,
                        std::optional<std::size_t> scored_after) {
  if (truth_fetal.empty()) throw ValidationError("no fetal annotations to score against");
  Locations det = in_region(detected, scored_after);
  Locations fetal = in_region(truth_fetal, scored_after);
  Locations maternal = in_region(truth_maternal, scored_after);
  if (fetal.empty()) throw ValidationError("no fetal annotations inside the scored region");
  std::sort(det.begin(), det.end());
  std::sort(fetal.begin(), fetal.end());
  std::sort(maternal.begin(), maternal.end());

  // Candidate pairs, closest first; ties by truth then detection index.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> pairs;
  for (std::size_t d = 0; d < det.size(); ++d) {
    const std::size_t lo_val = det[d] > window ? det[d] - window : 0;
    for (auto it = std::lower_bound(fetal.begin(), fetal.end(), lo_val);
         it != fetal.end() && *it <= det[d] + window; ++it) {
      const auto t = static_cast<std::size_t>(it - fetal.begin());
      pairs.emplace_back(distance(det[d], *it), t, d);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> det_used(det.size(), false), truth_used(fetal.size(), false);
  Metrics m;
  for (const auto& [dist, t, d] : pairs) {
    if (det_used[d] || truth_used[t]) continue;
    det_used[d] = truth_used[t] = true;
    ++m.tp;
  }
  m.fn = fetal.size() - m.tp;

  Locations false_pos;
  for (std::size_t d = 0; d < det.size(); ++d) {
    if (!det_used[d]) false_pos.push_back(det[d]);
  }
  m.fp = false_pos.size();
  m.maternal = maternal.size();
  for (std::size_t t : maternal) {
    if (!any_within(false_pos, t, window)) ++m.tn;
  }

  m.sensitivity = percent(m.tp, m.tp + m.fn);
  m.specificity = percent(m.tn, m.tn + m.fp);
  m.accuracy = percent(m.tp, m.tp + m.fn + m.fp);
  return m;
}

Locations align(std::span<const std::size_t> locations, std::size_t delay) {
  Locations out;
  out.reserve(locations.size());
  for (std::size_t l : locations) {
    if (l >= delay) out.push_back(l - delay);
  }
  return out;
}

}  // namespace fecg::fhr
