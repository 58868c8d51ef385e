#pragma once

// Direct (non-recursive) evaluations used as references for the streaming
// stages. Windows reach back before index 0 as zeros.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

/// y[n] = (1/len) * sum_{k=0}^{len-1} x[n-k]
inline std::vector<double> trailing_mean(std::span<const double> x, std::size_t len) {
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    long double acc = 0.0L;
    const std::size_t first = n + 1 >= len ? n + 1 - len : 0;
    for (std::size_t k = first; k <= n; ++k) acc += x[k];
    y[n] = static_cast<double>(acc / static_cast<long double>(len));
  }
  return y;
}

struct TwoStage {
  std::vector<double> m1;
  std::vector<double> m2;
};

inline TwoStage two_stage_mean(std::span<const double> x, std::size_t n1, std::size_t n2) {
  TwoStage t;
  t.m1 = trailing_mean(x, n1);
  t.m2 = trailing_mean(t.m1, n2);
  return t;
}

/// Squared first difference (x[-1] = 0) followed by a length-P trailing
/// sum of sdiff / P.
inline std::vector<double> enhanced(std::span<const double> x, std::size_t p) {
  std::vector<double> sd(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double d = x[n] - (n ? x[n - 1] : 0.0);
    sd[n] = d * d;
  }
  return trailing_mean(sd, p);
}

/// |H(e^{jw})| for O[k] = sum_i b_i I[k-i] + sum_j a_j O[k-1-j].
inline double magnitude_response(std::span<const double> b, std::span<const double> a,
                                 double freq_hz, double fs) {
  const double w = 2.0 * std::numbers::pi * freq_hz / fs;
  std::complex<double> num = 0.0;
  std::complex<double> den = 1.0;
  for (std::size_t i = 0; i < b.size(); ++i) num += b[i] * std::polar(1.0, -w * static_cast<double>(i));
  for (std::size_t j = 0; j < a.size(); ++j) {
    den -= a[j] * std::polar(1.0, -w * static_cast<double>(j + 1));
  }
  return std::abs(num / den);
}

/// Amplitude of the freq_hz component of y over an integer number of periods.
inline double tone_amplitude(std::span<const double> y, double freq_hz, double fs) {
  double s = 0.0;
  double c = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    const double ph = 2.0 * std::numbers::pi * freq_hz * static_cast<double>(n) / fs;
    s += y[n] * std::sin(ph);
    c += y[n] * std::cos(ph);
  }
  return 2.0 * std::hypot(s, c) / static_cast<double>(y.size());
}

}  // namespace oracle
