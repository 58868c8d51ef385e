// fecg: run the monitoring pipeline, poke the FPU, write synthetic
// recordings, or re-run detection on a saved LMS trace.
//
// Exit status: 0 success, 1 a stage failed, 2 bad configuration.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fecg/error.hpp"
#include "fecg/fpu.hpp"
#include "fecg/pipeline.hpp"
#include "fecg/signal_io.hpp"
#include "fecg/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStageFailure = 1;
constexpr int kExitConfig = 2;

using fecg::pipeline::RunConfig;

fecg::synth::SynthSpec load_synth_spec(const std::string& arg) {
  fecg::synth::SynthSpec spec;
  if (arg.empty() || arg == "default") return spec;
  std::ifstream in(arg);
  if (!in) throw fecg::ConfigError("cannot open synthetic spec '" + arg + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw fecg::ConfigError("synthetic spec '" + arg + "' is not valid JSON: " + e.what());
  }
  fecg::synth::from_json(j, spec);
  return spec;
}

void print_report(const fecg::pipeline::RunReport& report, const RunConfig& cfg,
                  const std::string& mode) {
  if (mode == "json") {
    std::cout << fecg::pipeline::report_to_json(report, cfg).dump(2) << '\n';
  } else if (mode == "text") {
    std::cout << fecg::pipeline::report_to_text(report);
  }
}

struct RunFlags {
  std::string config_path;
  std::string input;
  std::string synth;
  std::string format;
  std::string thoracic;
  std::string abdominal;
  double fs = 0.0;
  std::size_t order = 0;
  double mu = 0.0;
  std::string arch;
  std::string cmp_mode;
  double clock_hz = 0.0;
  std::string annotations;
  std::string out;
  std::vector<std::string> traces;
  double scale_target = 0.0;
  std::size_t convergence_index = 0;
  bool no_reference = false;
  std::string print = "text";
};

RunConfig build_config(const CLI::App& app, const RunFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) cfg = fecg::pipeline::load_config(f.config_path);
  auto given = [&](const char* name) { return app.count(name) > 0; };

  if (given("--input")) {
    cfg.input = f.input;
    cfg.synth.reset();
  }
  if (given("--synth")) {
    cfg.synth = load_synth_spec(f.synth);
    cfg.input.reset();
  }
  if (given("--format")) cfg.format = fecg::io::format_from_name(f.format);
  if (given("--thoracic")) cfg.thoracic = f.thoracic;
  if (given("--abdominal")) cfg.abdominal = f.abdominal;
  if (given("--fs")) cfg.fs = f.fs;
  if (given("--order")) cfg.order = f.order;
  if (given("--mu")) cfg.mu = f.mu;
  if (given("--arch")) cfg.arch = fecg::pipeline::arch_selection_from_name(f.arch);
  if (given("--cmp-mode")) cfg.cmp_mode = fecg::fpu::cmp_mode_from_name(f.cmp_mode);
  if (given("--clock-hz")) cfg.clock_hz = f.clock_hz;
  if (given("--annotations")) cfg.annotations = f.annotations;
  if (given("--out")) cfg.out_dir = f.out;
  if (given("--trace")) cfg.traces = f.traces;
  if (given("--scale-target")) cfg.scale_target = f.scale_target;
  if (given("--convergence-index")) cfg.convergence_index = f.convergence_index;
  if (f.no_reference) cfg.reference_path = false;
  cfg.validate();
  return cfg;
}

int run(const CLI::App& app, const RunFlags& flags) {
  const RunConfig cfg = build_config(app, flags);
  fecg::pipeline::Artifacts artifacts;
  const auto report = fecg::pipeline::run_pipeline(cfg, &artifacts);
  if (!cfg.out_dir.empty()) fecg::pipeline::write_outputs(cfg.out_dir, report, cfg, artifacts);
  print_report(report, cfg, flags.print);
  return report.ok() ? kExitOk : kExitStageFailure;
}

int run_fpu(const std::string& op, const std::string& a, const std::string& b,
            const std::string& mode) {
  using namespace fecg::fpu;
  const auto opcode = opcode_from_name(op);
  const auto r = execute(opcode, parse_hex(a), parse_hex(b), cmp_mode_from_name(mode));
  if (opcode == OpCode::cmp) {
    static const char* names[] = {"equal", "greater", "less"};
    std::printf("%s %s\n", to_hex(r.value).c_str(), names[r.value.word() & 3u]);
  } else {
    std::printf("%s %.9g flags=%s\n", to_hex(r.value).c_str(), r.value.to_double(),
                r.status.to_string().c_str());
  }
  return kExitOk;
}

struct SynthFlags {
  std::string spec;
  std::string out;
  std::string annotations;
  std::string format = "csv";
};

int run_synth(const SynthFlags& f) {
  const auto spec = load_synth_spec(f.spec);
  const auto rec = fecg::synth::generate(spec);
  fecg::io::write_recording(f.out, rec, fecg::io::format_from_name(f.format));
  if (!f.annotations.empty()) {
    std::ofstream out(f.annotations);
    if (!out) throw fecg::Error("cannot write '" + f.annotations + "'");
    fecg::io::write_annotations(out, *rec.annotations);
  }
  std::printf("wrote %zu samples x %zu channels to %s\n", rec.length(), rec.channels.size(),
              f.out.c_str());
  return kExitOk;
}

struct DetectFlags {
  std::string trace;
  double fs = 1000.0;
  std::size_t convergence_index = fecg::lms::kConvergenceIndex;
  std::string annotations;
  std::string cmp_mode = "corrected";
  std::string peaks;
  std::string print = "text";
};

int run_detect(const DetectFlags& f) {
  std::ifstream in(f.trace);
  if (!in) throw fecg::ConfigError("cannot open trace '" + f.trace + "'");
  const auto error = fecg::pipeline::read_error_trace(in);
  std::optional<fecg::io::Annotations> ann;
  if (!f.annotations.empty()) {
    ann = fecg::io::load_annotations(f.annotations);
    fecg::io::validate_annotations(*ann, error.size());
  }
  fecg::pipeline::RunReport report;
  report.source = f.trace;
  report.fs = f.fs;
  report.samples = error.size();
  report.convergence_index = f.convergence_index;
  fecg::pipeline::run_detection(report, error, f.fs, fecg::fpu::cmp_mode_from_name(f.cmp_mode),
                                f.convergence_index, ann ? &*ann : nullptr);
  if (!f.peaks.empty() && report.detection) {
    std::ofstream out(f.peaks);
    if (!out) throw fecg::Error("cannot write '" + f.peaks + "'");
    fecg::pipeline::write_peaks_csv(out, report.detection->peaks, f.fs);
  }
  RunConfig cfg;
  cfg.input = f.trace;
  cfg.fs = f.fs;
  print_report(report, cfg, f.print);
  return report.ok() ? kExitOk : kExitStageFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fetal ECG extraction and heart-rate pipeline on a bit-level FPU model"};
  app.require_subcommand(0, 1);

  RunFlags rf;
  app.add_option("--config", rf.config_path, "JSON run config; flags override its fields");
  auto* input = app.add_option("--input", rf.input, "Recording file (CSV or raw)");
  auto* synth = app.add_option("--synth", rf.synth, "Synthetic spec JSON, or 'default'");
  input->excludes(synth);
  app.add_option("--format", rf.format, "Recording format (default: from extension)")
      ->check(CLI::IsMember({"csv", "raw"}));
  app.add_option("--thoracic", rf.thoracic, "Thoracic (desired) channel name");
  app.add_option("--abdominal", rf.abdominal, "Abdominal (input) channel name");
  app.add_option("--fs", rf.fs, "Sampling rate in Hz");
  app.add_option("--order", rf.order, "LMS order m");
  app.add_option("--mu", rf.mu, "LMS step size");
  app.add_option("--arch", rf.arch, "LMS datapath")->check(CLI::IsMember({"series", "parallel", "both"}));
  app.add_option("--cmp-mode", rf.cmp_mode, "FPU comparator mode")
      ->check(CLI::IsMember({"literal", "corrected"}));
  app.add_option("--clock-hz", rf.clock_hz, "Clock used to convert cycles to time");
  app.add_option("--annotations", rf.annotations, "Annotation file (<index>,<fetal|maternal>)");
  app.add_option("--out", rf.out, "Output directory for report.json and traces");
  app.add_option("--trace", rf.traces, "Stage traces to write: preprocess,lms,sdm,peaks")
      ->delimiter(',');
  app.add_option("--scale-target", rf.scale_target, "Bound for the p99 of each scaled lead");
  app.add_option("--convergence-index", rf.convergence_index, "Sample after which RR intervals count");
  app.add_flag("--no-reference", rf.no_reference, "Skip the double-precision drift path");
  app.add_option("--print", rf.print, "Report on stdout")->check(CLI::IsMember({"text", "json", "none"}));

  auto* fpu_cmd = app.add_subcommand("fpu", "Run one FPU operation on hex words");
  std::string op, a, b, fpu_mode = "corrected";
  fpu_cmd->add_option("op", op, "add, sub, mul or cmp")->required();
  fpu_cmd->add_option("a", a, "8 hex digits")->required();
  fpu_cmd->add_option("b", b, "8 hex digits")->required();
  fpu_cmd->add_option("--cmp-mode", fpu_mode)->check(CLI::IsMember({"literal", "corrected"}));

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic recording");
  SynthFlags sf;
  synth_cmd->add_option("--spec", sf.spec, "Synthetic spec JSON (default spec if omitted)");
  synth_cmd->add_option("--out", sf.out, "Recording path")->required();
  synth_cmd->add_option("--annotations", sf.annotations, "Also write ground-truth annotations");
  synth_cmd->add_option("--format", sf.format)->check(CLI::IsMember({"csv", "raw"}));

  auto* detect_cmd = app.add_subcommand("detect", "Peak detection and FHR on a saved lms.csv");
  DetectFlags df;
  detect_cmd->add_option("--lms", df.trace, "lms.csv trace")->required();
  detect_cmd->add_option("--fs", df.fs, "Sampling rate in Hz");
  detect_cmd->add_option("--convergence-index", df.convergence_index);
  detect_cmd->add_option("--annotations", df.annotations);
  detect_cmd->add_option("--cmp-mode", df.cmp_mode)->check(CLI::IsMember({"literal", "corrected"}));
  detect_cmd->add_option("--peaks", df.peaks, "Write peaks.csv here");
  detect_cmd->add_option("--print", df.print)->check(CLI::IsMember({"text", "json", "none"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*fpu_cmd) return run_fpu(op, a, b, fpu_mode);
    if (*synth_cmd) return run_synth(sf);
    if (*detect_cmd) return run_detect(df);
    return run(app, rf);
  } catch (const fecg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStageFailure;
  }
}
