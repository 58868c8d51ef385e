#pragma once

// End-to-end run: preprocess both leads, scale, LMS (series, parallel or
// both), peak detection and heart rate on the LMS error, scoring against
// annotations when present.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fecg/fhr.hpp"
#include "fecg/fpu.hpp"
#include "fecg/lms.hpp"
#include "fecg/signal_io.hpp"
#include "fecg/synth.hpp"

namespace fecg::pipeline {

inline constexpr double kDefaultClockHz = 50e6;
/// p99 of each preprocessed lead is mapped into (target/2, target].
inline constexpr double kDefaultScaleTarget = 8.0;
inline constexpr double kEnhanceWindowSeconds = 0.040;
/// Nominal end-to-end convergence times of the reference hardware at 50 MHz,
/// reported next to the simulated figures.
inline constexpr double kNominalParallelMs = 0.48;
inline constexpr double kNominalSeriesMs = 18.72;

enum class ArchSelection { series, parallel, both };

ArchSelection arch_selection_from_name(std::string_view name);
std::string_view to_string(ArchSelection a);

/// Stage names accepted by RunConfig::traces.
const std::vector<std::string>& trace_stages();

struct RunConfig {
  std::optional<std::string> input;
  std::optional<synth::SynthSpec> synth;
  std::optional<io::Format> format;  // default: from the input file extension
  std::string thoracic = "thoracic";
  std::string abdominal = "abdominal";
  std::optional<double> fs;  // required for CSV input; overrides a raw header
  std::size_t order = lms::kDefaultOrder;
  double mu = lms::kDefaultStepSize;
  ArchSelection arch = ArchSelection::parallel;
  fpu::CmpMode cmp_mode = fpu::CmpMode::corrected;
  double clock_hz = kDefaultClockHz;
  std::optional<std::string> annotations;
  std::string out_dir;
  std::vector<std::string> traces;
  double scale_target = kDefaultScaleTarget;
  std::size_t convergence_index = lms::kConvergenceIndex;
  bool reference_path = true;  // also run the double-precision chain

  /// Throws ConfigError.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);

struct ArchitectureRun {
  lms::Architecture arch = lms::Architecture::parallel;
  lms::CycleStats stats;
  fpu::Status status;
  std::optional<std::size_t> first_flagged_sample;
  std::uint64_t convergence_cycles = 0;
  double convergence_time_ms = 0.0;
  double nominal_time_ms = 0.0;
};

struct ArchitectureComparison {
  bool bit_identical = true;
  bool weights_identical = true;
  std::optional<std::size_t> first_divergence;
  double cycle_ratio = 0.0;
  std::uint64_t series_instances = 0;
  std::uint64_t parallel_instances = 0;
};

struct DetectionSummary {
  double m1 = 0.0;
  double m2 = 0.0;
  double th = 0.0;
  bool degenerate = false;
  std::size_t maxima = 0;
  std::size_t enhance_window = 0;
  std::size_t gap = 0;
  fhr::PeakSet peaks;      // sdm index and value
  fhr::Locations aligned;  // peaks shifted back by enhance_window / 2
  fhr::Locations single_mean_aligned;
};

struct StageFailure {
  std::string stage;
  std::string message;
};

struct RunReport {
  std::string source;
  double fs = 0.0;
  std::size_t samples = 0;
  std::size_t convergence_index = 0;
  double input_scale = 1.0;
  double desired_scale = 1.0;
  std::vector<ArchitectureRun> architectures;
  std::optional<ArchitectureComparison> comparison;
  std::optional<DetectionSummary> detection;
  std::optional<fhr::FhrResult> fhr;
  std::optional<fhr::Metrics> metrics;
  std::optional<fhr::Metrics> single_mean_metrics;
  std::optional<double> reference_drift;  // relative RMS of e, soft vs double
  std::vector<std::string> warnings;
  std::vector<StageFailure> failures;

  bool ok() const { return failures.empty(); }
};

/// Per-stage signals kept for traces and tests.
struct Artifacts {
  std::vector<double> thoracic;   // preprocessed, soft path
  std::vector<double> abdominal;
  std::vector<fpu::F32Bits> error;
  std::vector<fpu::F32Bits> weights;  // final LMS weights
  std::vector<double> reference_error;
  std::vector<fpu::F32Bits> sdm;
};

/// Synthesises or loads the recording and attaches annotations. Unknown
/// channel names raise ConfigError; unreadable files raise ParseError.
io::Recording load_input(const RunConfig& cfg);

RunReport run_pipeline(const RunConfig& cfg, Artifacts* artifacts = nullptr);
RunReport run_recording(const RunConfig& cfg, const io::Recording& rec,
                        Artifacts* artifacts = nullptr);

/// Detection, heart rate and scoring on an LMS error stream. Fills the
/// detection, fhr and metrics fields of `report`, recording failures there.
void run_detection(RunReport& report, std::span<const fpu::F32Bits> error, double fs,
                   fpu::CmpMode cmp_mode, std::size_t convergence_index,
                   const io::Annotations* annotations, Artifacts* artifacts = nullptr);

/// Compares two error streams; first_divergence names the first differing
/// sample.
ArchitectureComparison compare_runs(const lms::FilterRun& series, const lms::FilterRun& parallel,
                                    std::size_t order);

struct ComparisonReport {
  RunReport series;
  RunReport parallel;
  ArchitectureComparison diff;
};

/// Runs the pipeline once per architecture on identical inputs. Throws
/// DivergenceError on the first differing error sample.
ComparisonReport compare_architectures(const RunConfig& cfg);

nlohmann::json report_to_json(const RunReport& report, const RunConfig& cfg);
std::string report_to_text(const RunReport& report);

/// report.json plus the requested <stage>.csv traces.
void write_outputs(const std::filesystem::path& dir, const RunReport& report, const RunConfig& cfg,
                   const Artifacts& artifacts);
void write_peaks_csv(std::ostream& out, const fhr::PeakSet& peaks, double fs);
void write_error_trace(std::ostream& out, std::span<const fpu::F32Bits> error);
/// Reads the e_hex column of an lms.csv trace.
std::vector<fpu::F32Bits> read_error_trace(std::istream& in);

}  // namespace fecg::pipeline
