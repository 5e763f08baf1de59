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

#include <vector>

#include "htnmr/molecule.hpp"
#include "htnmr/spin_ops.hpp"

namespace htnmr {

// effective:       evolve under the stage Hamiltonians the pulse pattern is
//                  designed to leave behind (zz couplings only).
// explicit_pulses: evolve under the full interaction-picture Hamiltonian,
//                  chemical shifts included, with every pi and pi/2 pulse
//                  inserted as an instantaneous ideal rotation.
enum class EngineMode { effective, explicit_pulses };

enum class Stage { transfer, loading };
enum class TransferDirection { forward, rewind };

struct SequenceConfig {
  double transfer_time = 1.9e-3;    // t, seconds
  double loading_time = 1.0e-3;     // tau, seconds
  int blocks = 240;                 // n
  int detections_per_block = 70;    // M
  double rf_rotation_time = 5.0e-5; // t_RF, one 2pi (or -2pi) rotation
  bool pi_pulses = true;            // midway pi pulses during loading
  EngineMode engine_mode = EngineMode::effective;
};

// Block-indexed emitter polarization <sum_i sigma_i^z>(k tau). Pre-noise
// values obey |v| <= B_H/2 times the transfer amplitude.
struct SignalTrace {
  std::vector<double> times;   // k*tau, strictly increasing
  std::vector<double> values;  // dimensionless polarization
  Role emitter = Role::hydrogen;
  bool attenuation_applied = false;
};

// Stage Hamiltonians that remain once the pulse pattern has refocused
// everything else. Transfer keeps hydrogen-target zz couplings; loading with
// pi pulses keeps the zz couplings among distinct-frequency non-hydrogens,
// and without them additionally the non-hydrogen chemical shifts.
SpinOperator effective_hamiltonian(const Molecule& molecule, Stage stage, bool with_pi_pulses);

// One transfer stage (pi/2 brackets plus the refocused zz evolution) applied
// to an arbitrary state; rewind applies the exact inverse.
DensityMatrix run_transfer(const DensityMatrix& rho, const Molecule& molecule, double t,
                           TransferDirection direction);

// The hydrogen-transfer protocol: transfer, then n blocks of
// loading/transfer/detection/rewind. Detection leaves the nuclear state
// unchanged, so values are sampled right after each block's transfer stage.
SignalTrace run_protocol(const Molecule& molecule, const Environment& env,
                         const SequenceConfig& config);

// Direct interrogation of the target nuclei, prepolarized to the hydrogen
// Boltzmann factor for a like-for-like comparison.
SignalTrace run_standard_protocol(const Molecule& molecule, const Environment& env,
                                  const SequenceConfig& config);

// Same protocol with every pulse explicit under the full Hamiltonian.
// Validation-scale only (<= 4 spins); must match effective mode.
SignalTrace run_explicit_pulse_check(const Molecule& molecule, const Environment& env,
                                     const SequenceConfig& config);

// Multiplies value k by exp(-k tau / T2_eff) with the protocol-appropriate
// effective decoherence time. Refuses double application.
SignalTrace apply_dephasing(const SignalTrace& trace, const Molecule& molecule,
                            const SequenceConfig& config);

// Wall-clock duration of one block: 2t + tau + M t_RF for the
// hydrogen-transfer protocol, tau + M t_RF for direct interrogation.
double block_duration(const SequenceConfig& config, Role emitter);

}  // namespace htnmr
