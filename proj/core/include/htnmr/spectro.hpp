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

#pragma once

#include <cstdint>
#include <vector>

#include "htnmr/molecule.hpp"
#include "htnmr/nv_readout.hpp"
#include "htnmr/sequence.hpp"

namespace htnmr {

struct Spectrum {
  std::vector<double> freqs;       // Hz, [0, 1/(2 tau)]
  std::vector<double> magnitudes;  // |DFT|
  double resolution = 0.0;         // 1/(n tau), Hz
};

// One-sided magnitude spectrum of a uniformly sampled trace, zero-padded by
// pad_factor (default 4), no window.
Spectrum spectrum(const SignalTrace& trace, int pad_factor = 4);

struct PeakFit {
  double center = 0.0;  // Hz
  double height = 0.0;
  double width = 0.0;   // Hz, half width at half maximum
};

// The k highest local maxima, each refined by a least-squares Lorentzian fit
// h / (1 + ((f - c)/w)^2). Deterministic; throws when fewer than k maxima
// exist.
std::vector<PeakFit> fit_peaks(const Spectrum& spectrum, int k);

struct SnrEstimate {
  double value = 0.0;
  bool capped = false;  // noise floor below resolution: formally infinite SNR
};

// Peak height over the noise-floor standard deviation. The floor is taken
// from bins at least five fitted linewidths away from every peak, after
// subtracting the fitted model there (raw tails would otherwise leak into
// the estimate).
SnrEstimate snr(const Spectrum& spectrum, const std::vector<PeakFit>& all_peaks,
                std::size_t peak_index);

struct SnrRatioResult {
  double measured = 0.0;   // mean SNR_H / mean SNR_1 across seeds
  double predicted = 0.0;  // 1 / eta_ratio at the configured counts
  double mean_snr_h = 0.0;
  double mean_snr_1 = 0.0;
  int seeds = 0;
};

// Runs both protocol pipelines end to end (trace, dephasing, noisy readout,
// spectrum, peak fit, SNR) over n_seeds noise realizations and compares the
// measured SNR ratio with the closed-form prediction. Both runs share tau, n
// and the experiment time.
SnrRatioResult snr_ratio(const Molecule& molecule, const Environment& env,
                         const SequenceConfig& ours, const SequenceConfig& standard,
                         const ReadoutConfig& readout, int n_seeds, std::uint64_t seed);

}  // namespace htnmr
