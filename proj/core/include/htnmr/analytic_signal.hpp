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
#include "htnmr/sequence.hpp"

namespace htnmr {

// Closed-form transfer amplitude, broken down per (hydrogen, target) route.
// first_order sums sin^2(J_ij t/2) prod_{k != j} cos^2(J_ik t/2) over routes;
// third_order collects the triple-route correction (nonzero only with three
// or more targets) and is reported separately, never silently summed.
struct AmplitudeBreakdown {
  struct Term {
    int hydrogen = 0;
    int target = 0;
    double value = 0.0;
  };
  double first_order = 0.0;
  double third_order = 0.0;
  std::vector<Term> terms;
};

// Product of cos(J_{target,m} k tau / 2) over the target's distinct-frequency
// non-hydrogen partners, times cos(shift * k tau) when shifts survive the
// loading stage.
double c_factor(const Molecule& molecule, double k_tau, bool with_shifts, int target);

AmplitudeBreakdown general_amplitude(const Molecule& molecule, double t);

// Closed-form counterpart of run_protocol:
//   value(k) = -1/2 B_H sum_routes amplitude_route * C_target(k tau).
// The third-order correction is excluded unless requested; it only matters
// for highly symmetric multi-target molecules.
SignalTrace oracle_trace(const Molecule& molecule, const Environment& env,
                         const SequenceConfig& config, bool include_third_order = false);

}  // namespace htnmr
