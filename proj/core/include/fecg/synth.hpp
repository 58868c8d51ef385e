#pragma once

// Synthetic thoracic/abdominal recording with known R-peak positions.
//
// Each beat is a gaussian-windowed cosine, cos(pi t / W) exp(-t^2 / (2 (W/2)^2))
// for |t| <= W, where W is the main-lobe width (40 ms maternal, 25 ms fetal).
// This morphology only serves the R-peak logic; it is not physiological.
//
//   thoracic  = maternal train + noise
//   abdominal = gain * maternal + ratio * gain * fetal
//               + baseline sinusoid + 50 Hz sinusoid + noise

#include <cstdint>

#include <nlohmann/json_fwd.hpp>

#include "fecg/signal_io.hpp"

namespace fecg::synth {

inline constexpr double kMaternalPulseWidth = 0.040;
inline constexpr double kFetalPulseWidth = 0.025;
inline constexpr double kPowerlineHz = 50.0;

struct SynthSpec {
  double duration_s = 30.0;
  double fs = 1000.0;
  double maternal_bpm = 80.0;
  double fetal_bpm = 115.0;
  double fetal_amplitude_ratio = 0.2;    // fetal / maternal, on the abdominal lead
  double maternal_abdominal_gain = 0.7;  // abdominal maternal / thoracic maternal
  double noise_rms = 0.005;
  double baseline_amp = 0.1;
  double baseline_freq_hz = 0.3;
  double powerline_amp = 0.02;
  double jitter = 0.03;  // RR intervals vary uniformly by +-jitter
  std::uint64_t seed = 1;

  /// Throws ConfigError.
  void validate() const;

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

void to_json(nlohmann::json& j, const SynthSpec& s);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
void from_json(const nlohmann::json& j, SynthSpec& s);

/// Channels "thoracic" and "abdominal"; annotations hold the pulse centres.
io::Recording generate(const SynthSpec& spec);

}  // namespace fecg::synth
