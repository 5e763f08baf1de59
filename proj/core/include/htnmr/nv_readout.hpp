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
#include "htnmr/sequence.hpp"

namespace htnmr {

// Sensor-side model: the emitter's oscillating polarization is reinterpreted
// as a classical field whose phase a driven NV ensemble accumulates within
// its coherence time.
struct ReadoutConfig {
  double omega = 0.0;            // hydrogen-channel RF Rabi frequency, rad/s
  double t2_nv = 1.0e-5;         // NV ensemble coherence time, s
  double contrast = 0.07;        // fluorescence contrast, (0, 1]
  double t_exp = 1.0e3;          // total experiment time, s
  double rho_h = 6.6e28;         // hydrogen number density, m^-3
  double f3 = 4.1;               // sample geometry factor
  // Per-shot standard deviation of the fluorescence <sigma_y> estimate. Not
  // fixed by the physical inputs above; calibrated so single runs show
  // spectra with realistic signal-to-noise. All reported SNR ratios are
  // invariant under rescaling it.
  double noise_per_shot = 3.0e-6;
  double dead_time = 0.0;        // extra idle time per detection unit, s
};

// Classical field amplitude (Tesla) produced by the emitter spins at unit
// drive, for a per-nucleus polarization `normalized_expectation` in [-1, 1].
double b0_amplitude(const Environment& env, const ReadoutConfig& readout, double gamma_emitter,
                    double normalized_expectation);

// NV phase observable for one detection window:
//   A = (2 gamma_e gamma_nuc / omega) * expectation * [1 - cos(pi t2_nv omega)].
double nv_phase_factor(double gamma_nuc, double omega, double t2_nv, double expectation);

double electron_gamma();  // rad s^-1 T^-1

// Rabi frequency of the emitter channel at fixed drive field: the configured
// hydrogen omega scaled by gamma_emitter / gamma_hydrogen.
double emitter_omega(const Molecule& molecule, const ReadoutConfig& readout, Role emitter);
double emitter_gamma(const Molecule& molecule, Role emitter);

struct FieldSample {
  double t = 0.0;      // s
  double value = 0.0;  // gamma * B field drive, rad/s
};

// Time-domain field emitted during the detection windows: per window, an
// amplitude-modulated sinusoid at the emitter Rabi frequency, alternating
// sign for the +2pi / -2pi rotation pairs. At least `min_points_per_period`
// samples per period (guarded).
std::vector<FieldSample> synthesize_field(const SignalTrace& trace, const Molecule& molecule,
                                          const Environment& env, const SequenceConfig& config,
                                          const ReadoutConfig& readout,
                                          int min_points_per_period = 20);

// Noiseless NV expectation per block: A(k) from the chain above.
SignalTrace nv_signal_trace(const SignalTrace& trace, const Molecule& molecule,
                            const Environment& env, const SequenceConfig& config,
                            const ReadoutConfig& readout);

// Adds shot noise with standard deviation
//   noise_per_shot / (contrast * sqrt(V * M)),
// where V = t_exp / (n * block_duration) is the number of full-protocol
// averages. Deterministic for a fixed seed.
SignalTrace sample_readout(const SignalTrace& trace, const Molecule& molecule,
                           const Environment& env, const SequenceConfig& config,
                           const ReadoutConfig& readout, std::uint64_t seed);

// V as above; throws when the experiment is shorter than one protocol run.
double averaging_count(const SequenceConfig& config, Role emitter, const ReadoutConfig& readout);

}  // namespace htnmr
