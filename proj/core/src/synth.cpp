#include "fecg/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "fecg/error.hpp"

namespace fecg::synth {
namespace {

std::vector<std::size_t> beat_train(std::mt19937_64& rng, double bpm, double fs, double jitter,
                                    std::size_t n) {
  std::uniform_real_distribution<double> jit(-jitter, jitter);
  const double rr = 60.0 * fs / bpm;
  std::vector<std::size_t> beats;
  for (double t = 0.5 * rr; t < static_cast<double>(n); t += rr * (1.0 + jit(rng))) {
    const auto i = static_cast<std::size_t>(std::lround(t));
    if (i < n) beats.push_back(i);
  }
  return beats;
}

void render(std::vector<double>& out, const std::vector<std::size_t>& centres, double width_s,
            double fs, double amp) {
  const double w = width_s * fs;
  const double sigma = w / 2.0;
  const auto half = static_cast<long>(std::ceil(w));
  const auto n = static_cast<long>(out.size());
  for (std::size_t c : centres) {
    for (long t = -half; t <= half; ++t) {
      const long i = static_cast<long>(c) + t;
      if (i < 0 || i >= n) continue;
      const double td = static_cast<double>(t);
      out[static_cast<std::size_t>(i)] +=
          amp * std::exp(-td * td / (2.0 * sigma * sigma)) * std::cos(std::numbers::pi * td / w);
    }
  }
}

}  // namespace

void SynthSpec::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
  };
  auto non_negative = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be >= 0");
  };
  positive(duration_s, "duration_s");
  positive(fs, "fs");
  positive(maternal_bpm, "maternal_bpm");
  if (!(fetal_bpm >= 50.0 && fetal_bpm <= 300.0)) throw ConfigError("fetal_bpm must lie in [50, 300]");
  non_negative(fetal_amplitude_ratio, "fetal_amplitude_ratio");
  non_negative(maternal_abdominal_gain, "maternal_abdominal_gain");
  non_negative(noise_rms, "noise_rms");
  non_negative(baseline_amp, "baseline_amp");
  non_negative(baseline_freq_hz, "baseline_freq_hz");
  non_negative(powerline_amp, "powerline_amp");
  if (!(jitter >= 0.0 && jitter < 0.5)) throw ConfigError("jitter must lie in [0, 0.5)");
  if (duration_s * fs < 1.0) throw ConfigError("synthetic recording would be empty");
}

void to_json(nlohmann::json& j, const SynthSpec& s) {
  j = nlohmann::json{{"duration_s", s.duration_s},
                     {"fs", s.fs},
                     {"maternal_bpm", s.maternal_bpm},
                     {"fetal_bpm", s.fetal_bpm},
                     {"fetal_amplitude_ratio", s.fetal_amplitude_ratio},
                     {"maternal_abdominal_gain", s.maternal_abdominal_gain},
                     {"noise_rms", s.noise_rms},
                     {"baseline_amp", s.baseline_amp},
                     {"baseline_freq_hz", s.baseline_freq_hz},
                     {"powerline_amp", s.powerline_amp},
                     {"jitter", s.jitter},
                     {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SynthSpec& s) {
  if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  static const std::set<std::string> known = {
      "duration_s",  "fs",           "maternal_bpm",     "fetal_bpm",
      "fetal_amplitude_ratio",       "maternal_abdominal_gain", "noise_rms",
      "baseline_amp", "baseline_freq_hz", "powerline_amp", "jitter", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown synthetic spec key '" + key + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("synthetic spec key '") + key + "' has the wrong type");
    }
  };
  get("duration_s", s.duration_s);
  get("fs", s.fs);
  get("maternal_bpm", s.maternal_bpm);
  get("fetal_bpm", s.fetal_bpm);
  get("fetal_amplitude_ratio", s.fetal_amplitude_ratio);
  get("maternal_abdominal_gain", s.maternal_abdominal_gain);
  get("noise_rms", s.noise_rms);
  get("baseline_amp", s.baseline_amp);
  get("baseline_freq_hz", s.baseline_freq_hz);
  get("powerline_amp", s.powerline_amp);
  get("jitter", s.jitter);
  get("seed", s.seed);
}

io::Recording generate(const SynthSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(std::lround(spec.duration_s * spec.fs));
  std::mt19937_64 rng(spec.seed);

  const auto maternal = beat_train(rng, spec.maternal_bpm, spec.fs, spec.jitter, n);
  const auto fetal = beat_train(rng, spec.fetal_bpm, spec.fs, spec.jitter, n);

  std::vector<double> mat(n, 0.0);
  std::vector<double> fet(n, 0.0);
  render(mat, maternal, kMaternalPulseWidth, spec.fs, 1.0);
  render(fet, fetal, kFetalPulseWidth, spec.fs, 1.0);

  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> thoracic(n);
  for (std::size_t i = 0; i < n; ++i) thoracic[i] = mat[i] + spec.noise_rms * noise(rng);

  std::vector<double> abdominal(n);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.fs;
    abdominal[i] = spec.maternal_abdominal_gain * mat[i] +
                   spec.fetal_amplitude_ratio * spec.maternal_abdominal_gain * fet[i] +
                   spec.baseline_amp * std::sin(two_pi * spec.baseline_freq_hz * t) +
                   spec.powerline_amp * std::sin(two_pi * kPowerlineHz * t) +
                   spec.noise_rms * noise(rng);
  }

  io::Recording rec;
  rec.fs = spec.fs;
  rec.channels.push_back({"thoracic", std::move(thoracic)});
  rec.channels.push_back({"abdominal", std::move(abdominal)});
  rec.annotations = io::Annotations{fetal, maternal};
  rec.provenance = "synthetic seed " + std::to_string(spec.seed);
  return rec;
}

}  // namespace fecg::synth
