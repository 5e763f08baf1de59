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

#include "htnmr/analytic_signal.hpp"

#include <cmath>

#include "htnmr/errors.hpp"

namespace htnmr {

namespace {

double route_angle(const Molecule& mol, int hydrogen, int target, double t) {
  return mol.coupling(hydrogen, target) * t / 2.0;
}

}  // namespace

double c_factor(const Molecule& molecule, double k_tau, bool with_shifts, int target) {
  if (target < 0 || target >= molecule.size() || molecule.nuclei[target].role != Role::target)
    throw ValidationError("c_factor: index is not a target nucleus");
  double c = 1.0;
  for (int m = 0; m < molecule.size(); ++m) {
    if (m == target || molecule.nuclei[m].role == Role::hydrogen) continue;
    if (classify_pair(molecule, target, m) != PairClass::neq) continue;
    const double j = molecule.coupling(target, m);
    if (j != 0.0) c *= std::cos(j * k_tau / 2.0);
  }
  if (with_shifts) c *= std::cos(molecule.nuclei[target].shift * k_tau);
  return c;
}

AmplitudeBreakdown general_amplitude(const Molecule& molecule, double t) {
  AmplitudeBreakdown out;
  const auto hydrogens = molecule.sites_with(Role::hydrogen);
  const auto targets = molecule.sites_with(Role::target);
  for (int i : hydrogens) {
    for (std::size_t jt = 0; jt < targets.size(); ++jt) {
      const int j = targets[jt];
      const double s = std::sin(route_angle(molecule, i, j, t));
      double value = s * s;
      for (std::size_t kt = 0; kt < targets.size(); ++kt) {
        if (kt == jt) continue;
        const double c = std::cos(route_angle(molecule, i, targets[kt], t));
        value *= c * c;
      }
      out.first_order += value;
      out.terms.push_back({i, j, value});
    }
    // Triple-route correction: three distinct targets carry the coherence.
    for (std::size_t a = 0; a < targets.size(); ++a)
      for (std::size_t b = a + 1; b < targets.size(); ++b)
        for (std::size_t c = b + 1; c < targets.size(); ++c) {
          double value = 1.0;
          for (std::size_t kt = 0; kt < targets.size(); ++kt) {
            const double angle = route_angle(molecule, i, targets[kt], t);
            const double f = (kt == a || kt == b || kt == c) ? std::sin(angle) : std::cos(angle);
            value *= f * f;
          }
          out.third_order += value;
        }
  }
  return out;
}

SignalTrace oracle_trace(const Molecule& molecule, const Environment& env,
                         const SequenceConfig& config, bool include_third_order) {
  if (molecule.sites_with(Role::hydrogen).empty() || molecule.sites_with(Role::target).empty())
    throw ValidationError("oracle_trace: molecule needs hydrogen and target roles");
  double b_h = 0.0;
  for (const auto& n : molecule.nuclei)
    if (n.role == Role::hydrogen) b_h = boltzmann_factor(n.gamma, env);

  const AmplitudeBreakdown amp = general_amplitude(molecule, config.transfer_time);
  const auto targets = molecule.sites_with(Role::target);
  const bool with_shifts = !config.pi_pulses;

  SignalTrace trace;
  trace.emitter = Role::hydrogen;
  trace.times.reserve(config.blocks);
  trace.values.reserve(config.blocks);
  for (int k = 1; k <= config.blocks; ++k) {
    const double k_tau = k * config.loading_time;
    double signal = 0.0;
    for (const auto& term : amp.terms)
      signal += term.value * c_factor(molecule, k_tau, with_shifts, term.target);
    if (include_third_order) {
      for (const auto& n : molecule.sites_with(Role::hydrogen)) {
        (void)n;
        for (std::size_t a = 0; a < targets.size(); ++a)
          for (std::size_t b = a + 1; b < targets.size(); ++b)
            for (std::size_t c = b + 1; c < targets.size(); ++c) {
              double value = 1.0;
              for (std::size_t kt = 0; kt < targets.size(); ++kt) {
                const double angle =
                    route_angle(molecule, n, targets[kt], config.transfer_time);
                const double f =
                    (kt == a || kt == b || kt == c) ? std::sin(angle) : std::cos(angle);
                value *= f * f;
              }
              signal += value * c_factor(molecule, k_tau, with_shifts, targets[a]) *
                        c_factor(molecule, k_tau, with_shifts, targets[b]) *
                        c_factor(molecule, k_tau, with_shifts, targets[c]);
            }
      }
    }
    trace.times.push_back(k_tau);
    trace.values.push_back(-0.5 * b_h * signal);
  }
  return trace;
}

}  // namespace htnmr
