#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "sns/noise.hpp"
#include "sns/specfit.hpp"

namespace sns::test {

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

// Spectrum sampled from a model; no noise.
inline Spectrum synthetic(PeakModel m, std::vector<double> params, double lo, double hi, std::size_t n = 1201) {
  Spectrum s;
  s.freqs_hz = linspace(lo, hi, n);
  for (double f : s.freqs_hz) s.psd.push_back(evaluate_model(m, params, f));
  s.rbw_hz = s.bin_width_hz();
  return s;
}

// |sum_k x_k exp(-i 2pi f t_k)| on a trace sampled at dt.
inline double dft_magnitude(const std::vector<double>& x, double dt, double f) {
  std::complex<double> acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * std::polar(1.0, -2.0 * M_PI * f * dt * static_cast<double>(k));
  return std::abs(acc);
}

// Frequency of the largest DFT magnitude in [lo, hi], golden-refined.
inline double dft_peak(const std::vector<double>& x, double dt, double lo, double hi) {
  double best_f = lo, best = -1.0;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    const double f = lo + (hi - lo) * i / n;
    const double v = dft_magnitude(x, dt, f);
    if (v > best) best = v, best_f = f;
  }
  double a = best_f - (hi - lo) / n, b = best_f + (hi - lo) / n;
  for (int it = 0; it < 60; ++it) {
    const double c = b - 0.618033988749895 * (b - a), d = a + 0.618033988749895 * (b - a);
    if (dft_magnitude(x, dt, c) > dft_magnitude(x, dt, d)) b = d;
    else a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace sns::test
