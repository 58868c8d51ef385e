#include "fecg/lms.hpp"

#include <cmath>
#include <vector>

namespace fecg::lms {

using fpu::F32Bits;

void LmsConfig::validate() const {
  if (order < 1) throw std::invalid_argument("LMS order must be at least 1");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("LMS step size must be positive");
  auto check_scale = [](double s, const char* what) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument(std::string(what) + " scaling factor must be positive and finite");
    }
  };
  check_scale(input_scale, "input");
  check_scale(desired_scale, "desired");
}

double percentile_magnitude(std::span<const double> channel, double percentile) {
  if (channel.empty()) return 0.0;
  if (!(percentile >= 0.0 && percentile <= 1.0)) {
    throw std::invalid_argument("percentile must lie in [0, 1]");
  }
  std::vector<double> mag(channel.size());
  std::transform(channel.begin(), channel.end(), mag.begin(), [](double v) { return std::fabs(v); });
  // Linear interpolation between closest ranks.
  const double rank = percentile * static_cast<double>(mag.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, mag.size() - 1);
  std::nth_element(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(lo), mag.end());
  const double a = mag[lo];
  double b = a;
  if (hi != lo) b = *std::min_element(mag.begin() + static_cast<std::ptrdiff_t>(hi), mag.end());
  return a + (rank - static_cast<double>(lo)) * (b - a);
}

double auto_scale_factor(std::span<const double> channel, double target, double percentile) {
  if (!(target > 0.0)) throw std::invalid_argument("scaling target must be positive");
  const double p = percentile_magnitude(channel, percentile);
  if (!(p > 0.0) || !std::isfinite(p)) return 1.0;
  return std::exp2(std::floor(std::log2(target / p)));
}

std::string_view to_string(Architecture arch) {
  return arch == Architecture::series ? "series" : "parallel";
}

Datapath::Datapath(const LmsConfig& cfg, std::uint64_t cycles_per_sample, std::uint64_t instances)
    : k_(make_constants<SoftArith>(cfg)), state_(cfg.order) {
  stats_.cycles_per_sample = cycles_per_sample;
  stats_.fpu_instances = instances;
}

void Datapath::end_cycle() {
  const std::uint64_t issued = arith_.ops() - cycle_start_ops_;
  stats_.fpu_ops_issued += issued;
  stats_.peak_ops_per_cycle = std::max(stats_.peak_ops_per_cycle, issued);
  ++stats_.total_cycles;
  ++cycles_this_sample_;
}

void Datapath::end_sample() {
  if (cycles_this_sample_ != stats_.cycles_per_sample) {
    throw std::logic_error("datapath schedule issued an unexpected number of cycles");
  }
  cycles_this_sample_ = 0;
  if (!first_flagged_ && arith_.status().any()) first_flagged_ = stats_.samples_processed;
  ++stats_.samples_processed;
}

SeriesDatapath::SeriesDatapath(const LmsConfig& cfg)
    : Datapath(cfg, cycles_per_sample(cfg.order), kFpuInstances) {}

SampleResult SeriesDatapath::sample(F32Bits x_new, F32Bits d_new) {
  SoftArith& a = arith_;
  auto& s = state_;
  const std::size_t m = s.order();
  s.spare = x_new;
  s.desired = d_new;

  // Cycles 0..m-1: copy the staged sample forward one slot and accumulate
  // that slot's tap.
  F32Bits y{};
  for (std::size_t c = 0; c < m; ++c) {
    begin_cycle();
    std::swap(s.spare, s.window[c]);
    y = a.add(y, a.mul(a.mul(s.window[c], k_.input_scale), s.weights[c]));
    end_cycle();
  }

  // Cycle m: error, beta*e, and the first weight update.
  begin_cycle();
  const F32Bits e = a.sub(a.mul(s.desired, k_.desired_scale), y);
  const F32Bits be = a.mul(k_.beta, e);
  F32Bits pending = a.add(s.weights[0], a.mul(be, a.mul(s.window[0], k_.input_scale)));
  end_cycle();

  // Cycles m+1..2m: write back the pending weight, compute the next one.
  for (std::size_t i = 1; i <= m; ++i) {
    begin_cycle();
    s.weights[i - 1] = pending;
    if (i < m) pending = a.add(s.weights[i], a.mul(be, a.mul(s.window[i], k_.input_scale)));
    end_cycle();
  }
  end_sample();
  return {e, y};
}

ParallelDatapath::ParallelDatapath(const LmsConfig& cfg)
    : Datapath(cfg, 1, fpu_instances(cfg.order)) {}

SampleResult ParallelDatapath::sample(F32Bits x_new, F32Bits d_new) {
  SoftArith& a = arith_;
  auto& s = state_;
  const std::size_t m = s.order();

  begin_cycle();
  for (std::size_t i = m - 1; i > 0; --i) s.window[i] = s.window[i - 1];
  s.window[0] = x_new;
  s.desired = d_new;

  std::vector<F32Bits> xs(m);
  for (std::size_t i = 0; i < m; ++i) xs[i] = a.mul(s.window[i], k_.input_scale);
  F32Bits y{};
  for (std::size_t i = 0; i < m; ++i) y = a.add(y, a.mul(xs[i], s.weights[i]));
  const F32Bits e = a.sub(a.mul(s.desired, k_.desired_scale), y);
  const F32Bits be = a.mul(k_.beta, e);
  for (std::size_t i = 0; i < m; ++i) s.weights[i] = a.add(s.weights[i], a.mul(be, xs[i]));
  end_cycle();
  end_sample();
  return {e, y};
}

std::unique_ptr<Datapath> make_datapath(Architecture arch, const LmsConfig& cfg) {
  if (arch == Architecture::series) return std::make_unique<SeriesDatapath>(cfg);
  return std::make_unique<ParallelDatapath>(cfg);
}

FilterRun run_datapath(Architecture arch, const LmsConfig& cfg, std::span<const F32Bits> x,
                       std::span<const F32Bits> d) {
  if (x.size() != d.size()) throw std::invalid_argument("input and desired lengths differ");
  auto dp = make_datapath(arch, cfg);
  FilterRun run;
  run.error.reserve(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) run.error.push_back(dp->sample(x[n], d[n]).error);
  run.stats = dp->stats();
  run.status = dp->status();
  run.first_flagged_sample = dp->first_flagged_sample();
  run.final_weights = dp->state().weights;
  return run;
}

}  // namespace fecg::lms
