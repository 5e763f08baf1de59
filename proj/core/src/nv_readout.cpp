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

#include "htnmr/nv_readout.hpp"

#include <cmath>
#include <numbers>

#include "htnmr/errors.hpp"
#include "htnmr/rng.hpp"

namespace htnmr {

namespace {

constexpr double kHbar = 1.054571817e-34;       // J s
constexpr double kBoltzmann = 1.380649e-23;     // J / K
constexpr double kMu0 = 4.0e-7 * std::numbers::pi;  // H / m
constexpr double kGammaE = 1.76085963e11;       // rad s^-1 T^-1
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int emitter_count(const Molecule& mol, Role emitter) {
  const int n = static_cast<int>(mol.sites_with(emitter).size());
  if (n == 0) throw ValidationError("molecule has no emitter of the requested role");
  return n;
}

}  // namespace

double electron_gamma() { return kGammaE; }

double b0_amplitude(const Environment& env, const ReadoutConfig& readout, double gamma_emitter,
                    double normalized_expectation) {
  if (std::abs(normalized_expectation) > 1.0)
    throw ValidationError("b0_amplitude: expectation outside [-1, 1]");
  const double prefactor = kTwoPi * kTwoPi * kHbar * kHbar * gamma_emitter * kMu0 * readout.rho_h *
                           env.b_field /
                           (16.0 * std::numbers::pi * kBoltzmann * env.temperature);
  return prefactor * readout.f3 * normalized_expectation;
}

double nv_phase_factor(double gamma_nuc, double omega, double t2_nv, double expectation) {
  if (!(omega > 0.0) || !(t2_nv > 0.0)) throw ValidationError("nv_phase_factor: omega and t2_nv must be positive");
  return 2.0 * kGammaE * gamma_nuc / omega * expectation *
         (1.0 - std::cos(std::numbers::pi * t2_nv * omega));
}

double emitter_gamma(const Molecule& molecule, Role emitter) {
  const auto sites = molecule.sites_with(emitter);
  if (sites.empty()) throw ValidationError("molecule has no emitter of the requested role");
  return std::abs(molecule.nuclei[sites.front()].gamma);
}

double emitter_omega(const Molecule& molecule, const ReadoutConfig& readout, Role emitter) {
  const double g_h = emitter_gamma(molecule, Role::hydrogen);
  const double g_e = emitter_gamma(molecule, emitter);
  return readout.omega * g_e / g_h;
}

double averaging_count(const SequenceConfig& config, Role emitter, const ReadoutConfig& readout) {
  const double protocol_time = config.blocks * block_duration(config, emitter);
  const double v = readout.t_exp / protocol_time;
  if (!(v > 0.0) || readout.t_exp <= protocol_time)
    throw ValidationError("total experiment time must exceed one protocol duration");
  return v;
}

SignalTrace nv_signal_trace(const SignalTrace& trace, const Molecule& molecule,
                            const Environment& env, const SequenceConfig& config,
                            const ReadoutConfig& readout) {
  (void)config;
  const Role emitter = trace.emitter;
  const double gamma = emitter_gamma(molecule, emitter);
  const double omega = emitter_omega(molecule, readout, emitter);
  const int count = emitter_count(molecule, emitter);
  // The configured density is the hydrogen density; other emitters scale by
  // their per-molecule abundance.
  ReadoutConfig scaled = readout;
  scaled.rho_h = readout.rho_h * count / emitter_count(molecule, Role::hydrogen);
  SignalTrace out = trace;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const double pol = trace.values[k] / count;
    const double b0 = b0_amplitude(env, scaled, gamma, pol);
    out.values[k] = nv_phase_factor(gamma, omega, readout.t2_nv, b0);
  }
  return out;
}

SignalTrace sample_readout(const SignalTrace& trace, const Molecule& molecule,
                           const Environment& env, const SequenceConfig& config,
                           const ReadoutConfig& readout, std::uint64_t seed) {
  const double v = averaging_count(config, trace.emitter, readout);
  if (readout.contrast <= 0.0 || readout.contrast > 1.0)
    throw ValidationError("contrast must lie in (0, 1]");
  SignalTrace out = nv_signal_trace(trace, molecule, env, config, readout);
  const double sigma =
      readout.noise_per_shot /
      (readout.contrast * std::sqrt(v * static_cast<double>(config.detections_per_block)));
  Rng rng(seed);
  for (double& value : out.values) value += sigma * rng.gaussian();
  return out;
}

std::vector<FieldSample> synthesize_field(const SignalTrace& trace, const Molecule& molecule,
                                          const Environment& env, const SequenceConfig& config,
                                          const ReadoutConfig& readout,
                                          int min_points_per_period) {
  if (min_points_per_period < 20)
    throw ValidationError("synthesize_field: at least 20 points per period required");
  const Role emitter = trace.emitter;
  const double gamma = emitter_gamma(molecule, emitter);
  const double omega = emitter_omega(molecule, readout, emitter);
  const int count = emitter_count(molecule, emitter);
  const double t_rot = config.rf_rotation_time;
  const double period = kTwoPi / omega;
  const int per_rotation =
      static_cast<int>(std::ceil(min_points_per_period * t_rot / period));
  ReadoutConfig scaled = readout;
  scaled.rho_h = readout.rho_h * count / emitter_count(molecule, Role::hydrogen);

  const double dur_block = block_duration(config, emitter);
  const bool has_transfer = emitter == Role::hydrogen;
  std::vector<FieldSample> samples;
  samples.reserve(trace.values.size() * config.detections_per_block * per_rotation);
  for (std::size_t k = 0; k < trace.values.size(); ++k) {
    const double b0 = b0_amplitude(env, scaled, gamma, trace.values[k] / count);
    // Detection begins after stage 0, k-1 full blocks, and this block's
    // loading and transfer stages.
    double t0 = (has_transfer ? config.transfer_time : 0.0) + k * dur_block +
                config.loading_time + (has_transfer ? config.transfer_time : 0.0);
    for (int m = 0; m < config.detections_per_block; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;  // +2pi then -2pi rotation
      for (int p = 0; p < per_rotation; ++p) {
        const double dt = (p + 0.5) * t_rot / per_rotation;
        samples.push_back({t0 + dt, gamma * b0 * sign * std::sin(omega * dt)});
      }
      t0 += t_rot + readout.dead_time;
    }
  }
  return samples;
}

}  // namespace htnmr
