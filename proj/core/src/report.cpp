#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fecg/error.hpp"
#include "fecg/pipeline.hpp"

namespace fecg::pipeline {
namespace {

using nlohmann::json;

json stats_json(const lms::CycleStats& s) {
  return {{"cycles_per_sample", s.cycles_per_sample},
          {"total_cycles", s.total_cycles},
          {"fpu_instances", s.fpu_instances},
          {"fpu_ops_issued", s.fpu_ops_issued},
          {"samples_processed", s.samples_processed},
          {"peak_ops_per_cycle", s.peak_ops_per_cycle}};
}

json metrics_json(const fhr::Metrics& m) {
  return {{"tp", m.tp},
          {"fn", m.fn},
          {"fp", m.fp},
          {"tn", m.tn},
          {"maternal", m.maternal},
          {"sensitivity", m.sensitivity},
          {"specificity", m.specificity},
          {"accuracy", m.accuracy}};
}

void put_number(std::ostream& out, double v) {
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.write(buf.data(), r.ptr - buf.data());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

json report_to_json(const RunReport& r, const RunConfig& cfg) {
  json j;
  j["ok"] = r.ok();
  j["config"] = cfg;
  j["input"] = {{"source", r.source}, {"fs", r.fs}, {"samples", r.samples}};
  j["convergence_index"] = r.convergence_index;
  j["scaling"] = {{"input_scale", r.input_scale}, {"desired_scale", r.desired_scale}};

  json archs = json::array();
  for (const auto& a : r.architectures) {
    json e = {{"architecture", std::string(lms::to_string(a.arch))},
              {"cycle_stats", stats_json(a.stats)},
              {"convergence_cycles", a.convergence_cycles},
              {"convergence_time_ms", a.convergence_time_ms},
              {"nominal_convergence_time_ms", a.nominal_time_ms},
              {"fpu_status", a.status.to_string()}};
    e["first_flagged_sample"] =
        a.first_flagged_sample ? json(*a.first_flagged_sample) : json(nullptr);
    archs.push_back(std::move(e));
  }
  j["architectures"] = std::move(archs);

  if (r.comparison) {
    const auto& c = *r.comparison;
    j["comparison"] = {{"bit_identical", c.bit_identical},
                       {"weights_identical", c.weights_identical},
                       {"cycle_ratio", c.cycle_ratio},
                       {"fpu_instances", {{"series", c.series_instances},
                                          {"parallel", c.parallel_instances}}}};
    j["comparison"]["first_divergence"] =
        c.first_divergence ? json(*c.first_divergence) : json(nullptr);
  }

  if (r.detection) {
    const auto& d = *r.detection;
    json peaks = json::array();
    for (std::size_t i = 0; i < d.peaks.size(); ++i) {
      peaks.push_back({{"index", d.peaks[i].location},
                       {"aligned_index", i < d.aligned.size() ? json(d.aligned[i]) : json(nullptr)},
                       {"time_s", static_cast<double>(d.peaks[i].location) / r.fs},
                       {"sdm_value", d.peaks[i].value.to_double()}});
    }
    j["detection"] = {{"m1", d.m1},
                      {"m2", d.m2},
                      {"th", d.th},
                      {"degenerate", d.degenerate},
                      {"local_maxima", d.maxima},
                      {"enhance_window", d.enhance_window},
                      {"arbitration_gap", d.gap},
                      {"peaks", std::move(peaks)}};
  }

  if (r.fhr) {
    j["fhr"] = {{"fhr_bpm", r.fhr->fhr_bpm},
                {"mean_rr_seconds", r.fhr->mean_rr_seconds},
                {"rr_intervals", r.fhr->rr_intervals},
                {"peaks_used", r.fhr->peaks_used}};
  } else {
    j["fhr"] = nullptr;
  }

  if (r.metrics) {
    j["metrics"] = {{"two_mean", metrics_json(*r.metrics)}};
    if (r.single_mean_metrics) j["metrics"]["single_mean"] = metrics_json(*r.single_mean_metrics);
  } else {
    j["metrics"] = nullptr;
  }
  j["reference_drift_relative_rms"] = r.reference_drift ? json(*r.reference_drift) : json(nullptr);
  j["warnings"] = r.warnings;
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"stage", f.stage}, {"message", f.message}});
  j["failures"] = std::move(failures);
  return j;
}

std::string report_to_text(const RunReport& r) {
  std::ostringstream out;
  char buf[256];
  out << "source: " << r.source << "  samples: " << r.samples << "  fs: " << r.fs << " Hz\n";
  std::snprintf(buf, sizeof buf, "scaling: input x%g  desired x%g\n", r.input_scale, r.desired_scale);
  out << buf;
  for (const auto& a : r.architectures) {
    std::snprintf(buf, sizeof buf,
                  "%-8s cycles/sample %llu  total %llu  instances %llu  convergence %.4g ms "
                  "(%llu cycles; nominal %.4g ms)\n",
                  std::string(lms::to_string(a.arch)).c_str(),
                  static_cast<unsigned long long>(a.stats.cycles_per_sample),
                  static_cast<unsigned long long>(a.stats.total_cycles),
                  static_cast<unsigned long long>(a.stats.fpu_instances), a.convergence_time_ms,
                  static_cast<unsigned long long>(a.convergence_cycles), a.nominal_time_ms);
    out << buf;
  }
  if (r.comparison) {
    std::snprintf(buf, sizeof buf, "series/parallel: %s, cycle ratio %g, instances %llu vs %llu\n",
                  r.comparison->bit_identical ? "bit-identical" : "DIVERGED",
                  r.comparison->cycle_ratio,
                  static_cast<unsigned long long>(r.comparison->series_instances),
                  static_cast<unsigned long long>(r.comparison->parallel_instances));
    out << buf;
  }
  if (r.detection) {
    std::snprintf(buf, sizeof buf, "detection: m1 %.4g  m2 %.4g  th %.4g  maxima %zu  peaks %zu\n",
                  r.detection->m1, r.detection->m2, r.detection->th, r.detection->maxima,
                  r.detection->peaks.size());
    out << buf;
  }
  if (r.fhr) {
    std::snprintf(buf, sizeof buf, "FHR: %.2f bpm (mean RR %.4f s over %zu intervals)\n",
                  r.fhr->fhr_bpm, r.fhr->mean_rr_seconds, r.fhr->rr_intervals.size());
    out << buf;
  }
  auto metrics_line = [&](const char* name, const fhr::Metrics& m) {
    std::snprintf(buf, sizeof buf,
                  "%-12s Se %.2f%%  Sp %.2f%%  Acc %.2f%%  (TP %zu FN %zu FP %zu TN %zu)\n", name,
                  m.sensitivity, m.specificity, m.accuracy, m.tp, m.fn, m.fp, m.tn);
    out << buf;
  };
  if (r.metrics) metrics_line("two-mean", *r.metrics);
  if (r.single_mean_metrics) metrics_line("single-mean", *r.single_mean_metrics);
  if (r.reference_drift) {
    std::snprintf(buf, sizeof buf, "soft vs double drift: %.3g relative RMS\n", *r.reference_drift);
    out << buf;
  }
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  for (const auto& f : r.failures) out << "FAILED " << f.stage << ": " << f.message << '\n';
  return out.str();
}

void write_peaks_csv(std::ostream& out, const fhr::PeakSet& peaks, double fs) {
  out << "index,time_s,sdm_value\n";
  for (const auto& p : peaks) {
    out << p.location << ',';
    put_number(out, static_cast<double>(p.location) / fs);
    out << ',';
    put_number(out, p.value.to_double());
    out << '\n';
  }
}

void write_error_trace(std::ostream& out, std::span<const fpu::F32Bits> error) {
  out << "index,e_hex,e\n";
  for (std::size_t i = 0; i < error.size(); ++i) {
    out << i << ',' << fpu::to_hex(error[i]) << ',';
    put_number(out, error[i].to_double());
    out << '\n';
  }
}

std::vector<fpu::F32Bits> read_error_trace(std::istream& in) {
  std::vector<fpu::F32Bits> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("index", 0) == 0) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c1 == std::string::npos) throw ParseError("expected index,e_hex[,e]", lineno);
    try {
      out.push_back(fpu::parse_hex(line.substr(c1 + 1, c2 == std::string::npos ? c2 : c2 - c1 - 1)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

void write_outputs(const std::filesystem::path& dir, const RunReport& report, const RunConfig& cfg,
                   const Artifacts& a) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "report.json");
    out << report_to_json(report, cfg).dump(2) << '\n';
  }
  auto wants = [&](const std::string& stage) {
    return std::find(cfg.traces.begin(), cfg.traces.end(), stage) != cfg.traces.end();
  };
  if (wants("preprocess")) {
    auto out = open_out(dir / "preprocess.csv");
    out << "index,thoracic,abdominal\n";
    for (std::size_t i = 0; i < a.thoracic.size() && i < a.abdominal.size(); ++i) {
      out << i << ',';
      put_number(out, a.thoracic[i]);
      out << ',';
      put_number(out, a.abdominal[i]);
      out << '\n';
    }
  }
  if (wants("lms")) {
    auto out = open_out(dir / "lms.csv");
    write_error_trace(out, a.error);
  }
  if (wants("sdm")) {
    auto out = open_out(dir / "sdm.csv");
    out << "index,sdm_hex,sdm\n";
    for (std::size_t i = 0; i < a.sdm.size(); ++i) {
      out << i << ',' << fpu::to_hex(a.sdm[i]) << ',';
      put_number(out, a.sdm[i].to_double());
      out << '\n';
    }
  }
  if (wants("peaks") && report.detection) {
    auto out = open_out(dir / "peaks.csv");
    write_peaks_csv(out, report.detection->peaks, report.fs);
  }
}

}  // namespace fecg::pipeline
