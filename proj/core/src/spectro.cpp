/* Copyright 2026 The htnmr Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "htnmr/spectro.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "htnmr/errors.hpp"
#include "htnmr/rng.hpp"
#include "htnmr/sensitivity.hpp"

namespace htnmr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sample_interval(const SignalTrace& trace) {
  if (trace.times.size() < 2) throw ValidationError("spectrum: trace too short");
  const double dt = trace.times[1] - trace.times[0];
  for (std::size_t k = 1; k + 1 < trace.times.size(); ++k) {
    const double d = trace.times[k + 1] - trace.times[k];
    if (std::abs(d - dt) > 1e-9 * dt) throw ValidationError("spectrum: non-uniform sampling");
  }
  return dt;
}

// Lorentzian line in the power spectrum; the magnitude model is its square
// root, which also reproduces the 1/delta amplitude tails of a decaying
// oscillation. Peaks of real traces come in +-f pairs, so the mirror at -c
// is part of the model.
double model_magnitude(double f, const PeakFit& p) {
  const double u = (f - p.center) / p.width;
  const double v = (f + p.center) / p.width;
  return std::sqrt(p.height * p.height / (1.0 + u * u) +
                   p.height * p.height / (1.0 + v * v));
}

// Least-squares refinement of (height, center, width): damped Gauss-Newton of
// a Lorentzian against the squared magnitudes around the detected maximum.
PeakFit refine_peak(const Spectrum& s, std::size_t i0, std::size_t half_window) {
  const std::size_t lo = i0 > half_window ? i0 - half_window : 0;
  const std::size_t hi = std::min(s.freqs.size() - 1, i0 + half_window);
  const double bin = s.freqs[1] - s.freqs[0];

  double h2 = s.magnitudes[i0] * s.magnitudes[i0];  // power height
  double c = s.freqs[i0];
  double w = std::max(2.0 * bin, s.resolution / 2.0);
  double lambda = 1e-3;

  auto cost = [&](double hh, double cc, double ww) {
    double acc = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      const double u = (s.freqs[i] - cc) / ww;
      const double v = (s.freqs[i] + cc) / ww;
      const double r =
          hh / (1.0 + u * u) + hh / (1.0 + v * v) - s.magnitudes[i] * s.magnitudes[i];
      acc += r * r;
    }
    return acc;
  };

  double best = cost(h2, c, w);
  for (int iter = 0; iter < 80; ++iter) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (std::size_t i = lo; i <= hi; ++i) {
      const double u = (s.freqs[i] - c) / w;
      const double v = (s.freqs[i] + c) / w;
      const double den_u = 1.0 + u * u;
      const double den_v = 1.0 + v * v;
      const double model = h2 / den_u + h2 / den_v;
      const double r = model - s.magnitudes[i] * s.magnitudes[i];
      Eigen::Vector3d g;
      g(0) = 1.0 / den_u + 1.0 / den_v;
      g(1) = h2 * 2.0 * (u / (den_u * den_u) - v / (den_v * den_v)) / w;
      g(2) = h2 * 2.0 * (u * u / (den_u * den_u) + v * v / (den_v * den_v)) / w;
      jtj += g * g.transpose();
      jtr += g * r;
    }
    Eigen::Matrix3d damped = jtj;
    for (int d = 0; d < 3; ++d) damped(d, d) += lambda * (jtj(d, d) + 1e-30);
    const Eigen::Vector3d step = damped.ldlt().solve(jtr);
    const double h_new = h2 - step(0);
    const double c_new = c - step(1);
    double w_new = w - step(2);
    if (!(w_new > bin * 1e-3)) w_new = bin * 1e-3;
    const double trial = cost(h_new, c_new, w_new);
    if (trial < best && h_new > 0.0) {
      best = trial;
      h2 = h_new;
      c = c_new;
      w = w_new;
      lambda = std::max(lambda * 0.5, 1e-9);
    } else {
      lambda *= 4.0;
      if (lambda > 1e9) break;
    }
  }
  return PeakFit{c, std::sqrt(std::max(h2, 0.0)), std::abs(w)};
}

}  // namespace

Spectrum spectrum(const SignalTrace& trace, int pad_factor) {
  if (pad_factor < 1) throw ValidationError("spectrum: pad_factor must be >= 1");
  const double dt = sample_interval(trace);
  const std::size_t n = trace.values.size();
  const std::size_t len = n * static_cast<std::size_t>(pad_factor);
  Spectrum s;
  s.resolution = 1.0 / (static_cast<double>(n) * dt);
  const std::size_t n_bins = len / 2 + 1;
  s.freqs.resize(n_bins);
  s.magnitudes.resize(n_bins);
  for (std::size_t f = 0; f < n_bins; ++f) {
    std::complex<double> acc{0.0, 0.0};
    const double w = kTwoPi * static_cast<double>(f) / static_cast<double>(len);
    for (std::size_t j = 0; j < n; ++j)
      acc += trace.values[j] * std::exp(std::complex<double>(0.0, -w * static_cast<double>(j)));
    s.freqs[f] = static_cast<double>(f) / (static_cast<double>(len) * dt);
    s.magnitudes[f] = std::abs(acc);
  }
  return s;
}

std::vector<PeakFit> fit_peaks(const Spectrum& s, int k) {
  if (k < 1) throw ValidationError("fit_peaks: k must be >= 1");
  if (s.magnitudes.size() < 3) throw ValidationError("fit_peaks: spectrum too short");
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < s.magnitudes.size(); ++i)
    if (s.magnitudes[i] > s.magnitudes[i - 1] && s.magnitudes[i] >= s.magnitudes[i + 1] &&
        s.magnitudes[i] > 0.0)
      maxima.push_back(i);
  std::sort(maxima.begin(), maxima.end(),
            [&](std::size_t a, std::size_t b) { return s.magnitudes[a] > s.magnitudes[b]; });

  const double bin = s.freqs[1] - s.freqs[0];
  const std::size_t pad = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                       std::round(s.resolution / bin)));
  const std::size_t min_sep = std::max<std::size_t>(2, pad);
  std::vector<std::size_t> chosen;
  for (std::size_t i : maxima) {
    bool close = false;
    for (std::size_t c : chosen)
      if ((i > c ? i - c : c - i) < min_sep) close = true;
    if (!close) chosen.push_back(i);
    if (chosen.size() == static_cast<std::size_t>(k)) break;
  }
  if (chosen.size() < static_cast<std::size_t>(k))
    throw ValidationError("fit_peaks: fewer local maxima than requested peaks");

  std::vector<PeakFit> fits;
  for (std::size_t i : chosen) {
    std::size_t half_window = 3 * pad;
    for (std::size_t c : chosen)
      if (c != i) half_window = std::min(half_window, (i > c ? i - c : c - i) / 2);
    half_window = std::max<std::size_t>(half_window, 3);
    fits.push_back(refine_peak(s, i, half_window));
  }
  return fits;
}

SnrEstimate snr(const Spectrum& s, const std::vector<PeakFit>& all_peaks,
                std::size_t peak_index) {
  if (peak_index >= all_peaks.size()) throw ValidationError("snr: bad peak index");
  // Floor region: at least five fitted linewidths from every peak. The fitted
  // model (mirror included) is subtracted and the noise deviation is taken
  // from residual differences one unpadded bin apart, so that any smooth
  // lineshape leftover cancels while independent noise survives.
  const double bin = s.freqs[1] - s.freqs[0];
  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::round(s.resolution / bin)));
  std::vector<bool> in_floor(s.freqs.size(), true);
  std::vector<double> residual(s.freqs.size(), 0.0);
  std::size_t floor_bins = 0;
  for (std::size_t i = 0; i < s.freqs.size(); ++i) {
    double model = 0.0;
    for (const auto& p : all_peaks) {
      if (std::abs(s.freqs[i] - p.center) < 5.0 * p.width) in_floor[i] = false;
      model += model_magnitude(s.freqs[i], p);
    }
    residual[i] = s.magnitudes[i] - model;
    if (in_floor[i]) ++floor_bins;
  }
  auto diff_sigma = [&](const std::vector<bool>& mask) {
    std::vector<double> diffs;
    for (std::size_t i = 0; i + stride < s.freqs.size(); ++i)
      if (mask[i] && mask[i + stride]) diffs.push_back(residual[i + stride] - residual[i]);
    if (diffs.size() < 16) return std::pair<double, bool>{0.0, false};
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    var /= static_cast<double>(diffs.size() - 1);
    return std::pair<double, bool>{std::sqrt(var / 2.0), true};
  };

  const auto [sigma0, ok0] = diff_sigma(in_floor);
  if (floor_bins < 16 || !ok0)
    throw ValidationError("snr: not enough noise-floor bins away from the peaks");
  // Second pass over bins whose modeled tail sits below the first-pass noise
  // level: there the magnitude statistics are signal-free for both strong and
  // weak peaks, which keeps protocol comparisons consistent.
  std::vector<bool> quiet = in_floor;
  for (std::size_t i = 0; i < s.freqs.size(); ++i) {
    double model = 0.0;
    for (const auto& p : all_peaks) model += model_magnitude(s.freqs[i], p);
    if (model > sigma0) quiet[i] = false;
  }
  const auto [sigma1, ok1] = diff_sigma(quiet);
  const double sigma = ok1 ? sigma1 : sigma0;
  const double height = all_peaks[peak_index].height;
  if (sigma < 1e-9 * std::abs(height)) return {1e9, true};
  return {height / sigma, false};
}

SnrRatioResult snr_ratio(const Molecule& molecule, const Environment& env,
                         const SequenceConfig& ours, const SequenceConfig& standard,
                         const ReadoutConfig& readout, int n_seeds, std::uint64_t seed) {
  if (n_seeds < 1) throw ValidationError("snr_ratio: need at least one seed");
  if (ours.loading_time != standard.loading_time || ours.blocks != standard.blocks)
    throw ValidationError("snr_ratio: both protocols must share tau and n");
  const int expected_peaks = ours.pi_pulses ? 1 : 2;

  const SignalTrace trace_h = apply_dephasing(run_protocol(molecule, env, ours), molecule, ours);
  const SignalTrace trace_1 =
      apply_dephasing(run_standard_protocol(molecule, env, standard), molecule, standard);

  auto top_snr = [&](const SignalTrace& noisy) {
    const Spectrum sp = spectrum(noisy);
    const auto fits = fit_peaks(sp, expected_peaks);
    std::size_t best = 0;
    for (std::size_t i = 1; i < fits.size(); ++i)
      if (fits[i].height > fits[best].height) best = i;
    return snr(sp, fits, best).value;
  };

  double sum_h = 0.0;
  double sum_1 = 0.0;
  for (int sdx = 0; sdx < n_seeds; ++sdx) {
    sum_h += top_snr(
        sample_readout(trace_h, molecule, env, ours, readout, derive_seed(seed, 2 * sdx)));
    sum_1 += top_snr(sample_readout(trace_1, molecule, env, standard, readout,
                                    derive_seed(seed, 2 * sdx + 1)));
  }

  SnrRatioResult result;
  result.seeds = n_seeds;
  result.mean_snr_h = sum_h / n_seeds;
  result.mean_snr_1 = sum_1 / n_seeds;
  result.measured = result.mean_snr_h / result.mean_snr_1;
  result.predicted = 1.0 / eta_ratio(make_params(molecule, ours, standard, readout));
  return result;
}

}  // namespace htnmr
