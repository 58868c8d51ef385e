#include "fecg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "fecg/arith.hpp"
#include "fecg/error.hpp"
#include "fecg/preprocess.hpp"

namespace fecg::pipeline {

using fpu::F32Bits;

ArchSelection arch_selection_from_name(std::string_view name) {
  if (name == "series") return ArchSelection::series;
  if (name == "parallel") return ArchSelection::parallel;
  if (name == "both") return ArchSelection::both;
  throw ConfigError("architecture must be series, parallel or both");
}

std::string_view to_string(ArchSelection a) {
  switch (a) {
    case ArchSelection::series: return "series";
    case ArchSelection::parallel: return "parallel";
    case ArchSelection::both: return "both";
  }
  return "?";
}

const std::vector<std::string>& trace_stages() {
  static const std::vector<std::string> stages = {"preprocess", "lms", "sdm", "peaks"};
  return stages;
}

void RunConfig::validate() const {
  if (input && synth) throw ConfigError("give either an input file or a synthetic spec, not both");
  if (!input && !synth) throw ConfigError("no input: give an input file or a synthetic spec");
  if (synth) synth->validate();
  if (input && input->empty()) throw ConfigError("input path is empty");
  if (thoracic.empty() || abdominal.empty()) throw ConfigError("channel names must not be empty");
  if (thoracic == abdominal) throw ConfigError("thoracic and abdominal channels must differ");
  if (fs && (!(*fs > 0.0) || !std::isfinite(*fs))) throw ConfigError("fs must be positive");
  if (input && !fs && format.value_or(io::format_for_path(*input)) == io::Format::csv) {
    throw ConfigError("CSV input needs a sampling rate (--fs)");
  }
  if (order < 1 || order > 4096) throw ConfigError("LMS order must lie in [1, 4096]");
  if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("step size mu must lie in (0, 1)");
  if (!(clock_hz > 0.0) || !std::isfinite(clock_hz)) throw ConfigError("clock_hz must be positive");
  if (!(scale_target > 0.0) || !std::isfinite(scale_target)) {
    throw ConfigError("scale_target must be positive");
  }
  if (convergence_index == 0) throw ConfigError("convergence_index must be positive");
  const auto& known = trace_stages();
  for (const auto& t : traces) {
    if (std::find(known.begin(), known.end(), t) == known.end()) {
      throw ConfigError("unknown trace stage '" + t + "'");
    }
  }
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json::object();
  if (c.input) j["input"] = *c.input;
  if (c.synth) j["synth"] = *c.synth;
  if (c.format) j["format"] = std::string(io::to_string(*c.format));
  j["thoracic"] = c.thoracic;
  j["abdominal"] = c.abdominal;
  if (c.fs) j["fs"] = *c.fs;
  j["order"] = c.order;
  j["mu"] = c.mu;
  j["arch"] = std::string(to_string(c.arch));
  j["cmp_mode"] = std::string(fpu::to_string(c.cmp_mode));
  j["clock_hz"] = c.clock_hz;
  if (c.annotations) j["annotations"] = *c.annotations;
  j["out"] = c.out_dir;
  j["trace"] = c.traces;
  j["scale_target"] = c.scale_target;
  j["convergence_index"] = c.convergence_index;
  j["reference_path"] = c.reference_path;
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  static const std::set<std::string> known = {
      "input", "synth",    "format",      "thoracic", "abdominal",    "fs",
      "order", "mu",       "arch",        "cmp_mode", "clock_hz",     "annotations",
      "out",   "trace",    "scale_target", "convergence_index", "reference_path"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
  };
  if (j.contains("input")) {
    std::string s;
    get("input", s);
    c.input = s;
  }
  if (j.contains("synth")) {
    synth::SynthSpec s;
    synth::from_json(j.at("synth"), s);
    c.synth = s;
  }
  if (j.contains("format")) {
    std::string s;
    get("format", s);
    try {
      c.format = io::format_from_name(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  get("thoracic", c.thoracic);
  get("abdominal", c.abdominal);
  if (j.contains("fs")) {
    double v = 0.0;
    get("fs", v);
    c.fs = v;
  }
  get("order", c.order);
  get("mu", c.mu);
  if (j.contains("arch")) {
    std::string s;
    get("arch", s);
    c.arch = arch_selection_from_name(s);
  }
  if (j.contains("cmp_mode")) {
    std::string s;
    get("cmp_mode", s);
    try {
      c.cmp_mode = fpu::cmp_mode_from_name(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  get("clock_hz", c.clock_hz);
  if (j.contains("annotations")) {
    std::string s;
    get("annotations", s);
    c.annotations = s;
  }
  get("out", c.out_dir);
  get("trace", c.traces);
  get("scale_target", c.scale_target);
  get("convergence_index", c.convergence_index);
  get("reference_path", c.reference_path);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  RunConfig c;
  from_json(j, c);
  return c;
}

io::Recording load_input(const RunConfig& cfg) {
  cfg.validate();
  io::Recording rec;
  if (cfg.synth) {
    rec = synth::generate(*cfg.synth);
  } else {
    const io::Format f = cfg.format.value_or(io::format_for_path(*cfg.input));
    rec = io::load_recording(*cfg.input, f, cfg.fs.value_or(0.0));
  }
  for (const auto& name : {cfg.thoracic, cfg.abdominal}) {
    if (!rec.has_channel(name)) {
      std::string have;
      for (const auto& n : rec.channel_names()) have += (have.empty() ? "" : ", ") + n;
      throw ConfigError("unknown channel '" + name + "' (available: " + have + ")");
    }
  }
  if (cfg.annotations) {
    rec.annotations = io::load_annotations(*cfg.annotations);
    io::validate_annotations(*rec.annotations, rec.length());
  }
  return rec;
}

namespace {

std::vector<double> decode(std::span<const F32Bits> v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (F32Bits x : v) out.push_back(x.to_double());
  return out;
}

std::vector<F32Bits> preprocess_soft(std::span<const double> samples, fpu::Status& status) {
  SoftArith arith;
  auto out = preprocess::preprocess_channel(arith, samples);
  status |= arith.status();
  return out;
}

std::vector<double> reference_error(const RunConfig& cfg, const lms::LmsConfig& lcfg,
                                    std::span<const double> thoracic,
                                    std::span<const double> abdominal) {
  RefArith a;
  const auto d = preprocess::preprocess_channel(a, thoracic);
  const auto x = preprocess::preprocess_channel(a, abdominal);
  const auto k = lms::make_constants<RefArith>(lcfg);
  lms::LmsState<double> state(cfg.order);
  std::vector<double> e;
  e.reserve(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) e.push_back(lms::lms_step(a, state, k, x[n], d[n]).error);
  return e;
}

double relative_rms(std::span<const F32Bits> soft, std::span<const double> ref) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < soft.size(); ++i) {
    const double diff = soft[i].to_double() - ref[i];
    num += diff * diff;
    den += ref[i] * ref[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

ArchitectureRun summarize(const lms::FilterRun& run, lms::Architecture arch, double clock_hz,
                          std::size_t convergence_index) {
  ArchitectureRun r;
  r.arch = arch;
  r.stats = run.stats;
  r.status = run.status;
  r.first_flagged_sample = run.first_flagged_sample;
  r.convergence_cycles = run.stats.cycles_per_sample * convergence_index;
  r.convergence_time_ms = static_cast<double>(r.convergence_cycles) / clock_hz * 1000.0;
  r.nominal_time_ms = arch == lms::Architecture::series ? kNominalSeriesMs : kNominalParallelMs;
  return r;
}

std::size_t enhance_window_for(double fs) {
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(kEnhanceWindowSeconds * fs)));
}

}  // namespace

ArchitectureComparison compare_runs(const lms::FilterRun& series, const lms::FilterRun& parallel,
                                    std::size_t order) {
  ArchitectureComparison c;
  const std::size_t n = std::min(series.error.size(), parallel.error.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (series.error[i] != parallel.error[i]) {
      c.first_divergence = i;
      break;
    }
  }
  if (!c.first_divergence && series.error.size() != parallel.error.size()) c.first_divergence = n;
  c.bit_identical = !c.first_divergence;
  c.weights_identical = series.final_weights == parallel.final_weights;
  if (parallel.stats.total_cycles > 0) {
    c.cycle_ratio = static_cast<double>(series.stats.total_cycles) /
                    static_cast<double>(parallel.stats.total_cycles);
  }
  c.series_instances = lms::SeriesDatapath::kFpuInstances;
  c.parallel_instances = lms::ParallelDatapath::fpu_instances(order);
  return c;
}

void run_detection(RunReport& report, std::span<const F32Bits> error, double fs,
                   fpu::CmpMode cmp_mode, std::size_t convergence_index,
                   const io::Annotations* annotations, Artifacts* artifacts) {
  SoftArith arith(cmp_mode);
  fhr::FhrParams params;
  params.enhance_window = enhance_window_for(fs);
  params.gap = fhr::arbitration_gap_for(fs);
  auto det = fhr::detect_peaks(arith, error, params);
  for (auto& w : det.warnings) report.warnings.push_back("fhr: " + w);

  DetectionSummary s;
  s.m1 = det.maxima.m1.to_double();
  s.m2 = det.maxima.m2.to_double();
  s.th = det.maxima.th.to_double();
  s.degenerate = det.maxima.degenerate;
  s.maxima = det.maxima.maxima.size();
  s.enhance_window = params.enhance_window;
  s.gap = params.gap;
  s.peaks = det.peaks;
  const std::size_t delay = params.enhance_window / 2;
  const auto raw = fhr::locations_of(det.peaks);
  s.aligned = fhr::align(raw, delay);
  s.single_mean_aligned = fhr::align(fhr::single_mean_detections(det.maxima), delay);

  try {
    report.fhr = fhr::compute_fhr(s.aligned, fs, convergence_index);
    for (const auto& w : report.fhr->warnings) report.warnings.push_back("fhr: " + w);
  } catch (const NoEstimateError& e) {
    report.failures.push_back({"fhr", e.what()});
  }

  if (annotations) {
    const auto window = static_cast<std::size_t>(std::lround(fhr::kMatchWindowSeconds * fs));
    try {
      report.metrics = fhr::score_detection(s.aligned, annotations->fetal, annotations->maternal,
                                            window, convergence_index);
      report.single_mean_metrics =
          fhr::score_detection(s.single_mean_aligned, annotations->fetal, annotations->maternal,
                               window, convergence_index);
    } catch (const ValidationError& e) {
      report.failures.push_back({"metrics", e.what()});
    }
  }
  report.detection = std::move(s);
  if (artifacts) artifacts->sdm = std::move(det.sdm);
}

RunReport run_recording(const RunConfig& cfg, const io::Recording& rec, Artifacts* artifacts) {
  cfg.validate();
  rec.validate();
  RunReport report;
  report.source = cfg.synth ? "synthetic" : *cfg.input;
  report.fs = rec.fs;
  report.samples = rec.length();
  report.convergence_index = cfg.convergence_index;
  if (report.samples <= cfg.convergence_index) {
    report.convergence_index = report.samples / 2;
    report.warnings.push_back("recording shorter than the convergence index " +
                              std::to_string(cfg.convergence_index) + "; using sample " +
                              std::to_string(report.convergence_index));
  }
  const auto& thoracic = rec.channel(cfg.thoracic).samples;
  const auto& abdominal = rec.channel(cfg.abdominal).samples;

  fpu::Status pre_status;
  const auto d_bits = preprocess_soft(thoracic, pre_status);
  const auto x_bits = preprocess_soft(abdominal, pre_status);
  if (pre_status.any()) report.warnings.push_back("preprocess: FPU flags " + pre_status.to_string());
  const auto d_dec = decode(d_bits);
  const auto x_dec = decode(x_bits);

  lms::LmsConfig lcfg;
  lcfg.order = cfg.order;
  lcfg.mu = cfg.mu;
  lcfg.input_scale = lms::auto_scale_factor(x_dec, cfg.scale_target);
  lcfg.desired_scale = lms::auto_scale_factor(d_dec, cfg.scale_target);
  report.input_scale = lcfg.input_scale;
  report.desired_scale = lcfg.desired_scale;

  std::vector<lms::Architecture> archs;
  if (cfg.arch != ArchSelection::parallel) archs.push_back(lms::Architecture::series);
  if (cfg.arch != ArchSelection::series) archs.push_back(lms::Architecture::parallel);
  std::vector<lms::FilterRun> runs;
  for (auto arch : archs) {
    runs.push_back(lms::run_datapath(arch, lcfg, x_bits, d_bits));
    report.architectures.push_back(summarize(runs.back(), arch, cfg.clock_hz, report.convergence_index));
    const auto& r = runs.back();
    if (r.status.any()) {
      report.warnings.push_back("lms " + std::string(lms::to_string(arch)) + ": FPU flags " +
                                r.status.to_string() + " first raised at sample " +
                                std::to_string(r.first_flagged_sample.value_or(0)));
    }
  }
  if (runs.size() == 2) {
    report.comparison = compare_runs(runs[0], runs[1], cfg.order);
    if (!report.comparison->bit_identical) {
      report.failures.push_back(
          {"lms", DivergenceError("series and parallel error streams differ",
                                  *report.comparison->first_divergence)
                      .what()});
    }
  }
  const auto& error = runs.back().error;

  if (cfg.reference_path) {
    const auto ref = reference_error(cfg, lcfg, thoracic, abdominal);
    report.reference_drift = relative_rms(error, ref);
    if (artifacts) artifacts->reference_error = ref;
  }

  run_detection(report, error, rec.fs, cfg.cmp_mode, report.convergence_index,
                rec.annotations ? &*rec.annotations : nullptr, artifacts);

  if (artifacts) {
    artifacts->thoracic = d_dec;
    artifacts->abdominal = x_dec;
    artifacts->error = error;
    artifacts->weights = runs.back().final_weights;
  }
  return report;
}

RunReport run_pipeline(const RunConfig& cfg, Artifacts* artifacts) {
  cfg.validate();
  io::Recording rec;
  try {
    rec = load_input(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    RunReport report;
    report.source = cfg.input.value_or("synthetic");
    report.failures.push_back({"input", e.what()});
    return report;
  }
  return run_recording(cfg, rec, artifacts);
}

ComparisonReport compare_architectures(const RunConfig& cfg) {
  cfg.validate();
  const io::Recording rec = load_input(cfg);
  RunConfig scfg = cfg;
  scfg.arch = ArchSelection::series;
  RunConfig pcfg = cfg;
  pcfg.arch = ArchSelection::parallel;
  Artifacts sa;
  Artifacts pa;
  ComparisonReport out;
  out.series = run_recording(scfg, rec, &sa);
  out.parallel = run_recording(pcfg, rec, &pa);

  lms::FilterRun s;
  s.error = sa.error;
  s.final_weights = sa.weights;
  s.stats = out.series.architectures.front().stats;
  lms::FilterRun p;
  p.error = pa.error;
  p.final_weights = pa.weights;
  p.stats = out.parallel.architectures.front().stats;
  out.diff = compare_runs(s, p, cfg.order);
  if (!out.diff.bit_identical) {
    throw DivergenceError("series and parallel error streams differ", *out.diff.first_divergence);
  }
  return out;
}

}  // namespace fecg::pipeline
