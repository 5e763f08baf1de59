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

#include <utility>
#include <vector>

#include "htnmr/molecule.hpp"
#include "htnmr/nv_readout.hpp"
#include "htnmr/sequence.hpp"

namespace htnmr {

enum class ProtocolKind { hydrogen_transfer, direct };

// Everything the sensitivity calculus needs, with decoherence times already
// resolved for the detection mode (t2_target is T2 with loading pi pulses,
// T2* without).
struct SensitivityParams {
  double transfer_time = 1.9e-3;  // t, s
  double loading_time = 1.0e-3;   // tau, s
  int blocks = 240;               // n (held equal across protocols)
  int m = 1;                      // detections per block, hydrogen protocol
  int m1 = 1;                     // detections per block, direct protocol
  double t_h = 5.0e-5;            // per-detection rotation time, hydrogen, s
  double t_1 = 1.9907e-4;         // per-detection rotation time, target, s
  double t2_hydrogen = 1.0;       // s
  double t2_target = 4.0;         // s, mode-resolved
  double t2_nv = 1.0e-5;          // s
  double omega_h = 1.2566371e5;   // rad/s
  double omega_1 = 3.1563307e4;   // rad/s
  double gamma_h = 2.676636941e8; // rad s^-1 T^-1 (magnitudes)
  double gamma_1 = 6.723008279e7;
  double amplitude_factor = 1.0;  // first-order transfer amplitude
};

// Effective decoherence times referred to the spectroscopically useful
// loading time:
//   hydrogen protocol: T2H T21 tau / ((2t + M tH) T21 + tau T2H)
//   direct protocol:   T21 tau / (tau + M1 t1)
double t2_eff(ProtocolKind protocol, const SensitivityParams& params);

// A1/AH at fixed drive field: (gamma_1/gamma_H) x
// [1 - cos(pi T2NV Omega_1)] / [1 - cos(pi T2NV Omega_H)]. One net power of
// gamma: the explicit gamma/Omega factors cancel and the field amplitude
// contributes the remaining one.
double nv_amplitude_ratio(const SensitivityParams& params);

// Sensitivity ratio (hydrogen protocol over direct interrogation); < 1 means
// the hydrogen route wins. Divided by amplitude_factor.
double eta_ratio(const SensitivityParams& params);

// Per-protocol absolute sensitivity shapes (common factors dropped); used by
// the measurement-count optimizer and exposed for tests.
double eta_shape_hydrogen(const SensitivityParams& params, int m);
double eta_shape_direct(const SensitivityParams& params, int m1);

// Grid search of each protocol's own eta over [1, m_max]; ties break toward
// smaller counts.
std::pair<int, int> optimize_measurements(const SensitivityParams& params, int m_max);

struct SweepPoint {
  double t2_nv = 0.0;
  double eta = 0.0;
  int m = 0;
  int m1 = 0;
};

// Sensitivity ratio against the NV coherence time on the given grid
// (log-spaced grids come from log_grid). By default the drive is retuned per
// point, keeping t2_nv * omega_h at its reference value, with the rotation
// times following 2pi/omega and the measurement counts re-optimized; this
// mirrors an experiment that adapts its RF drive to the sensor. A fixed-drive
// sweep is available but crosses the zeros of the accumulated-phase factor.
std::vector<SweepPoint> sweep_t2nv(const SensitivityParams& params, const std::vector<double>& grid,
                                   int m_max, bool retune_omega = true);

std::vector<double> log_grid(double lo, double hi, int n);

struct SensitivityReport {
  double t2_eff_h = 0.0;
  double t2_eff_1 = 0.0;
  double eta = 0.0;
  double snr_ratio_pred = 0.0;  // always 1 / eta
  int optimal_m = 0;
  int optimal_m1 = 0;
  double amplitude_factor = 1.0;
};

// pin_counts = true evaluates at params.m / params.m1; otherwise the report
// uses the optimizer's counts.
SensitivityReport make_report(SensitivityParams params, int m_max, bool pin_counts);

// Resolves molecule- and config-level inputs into SensitivityParams (T2
// choice by pi-pulse mode, Rabi frequencies at fixed drive field, transfer
// amplitude from the closed form).
SensitivityParams make_params(const Molecule& molecule, const SequenceConfig& ours,
                              const SequenceConfig& standard, const ReadoutConfig& readout);

}  // namespace htnmr
