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

#include "htnmr/sensitivity.hpp"

#include <cmath>
#include <numbers>

#include "htnmr/analytic_signal.hpp"
#include "htnmr/errors.hpp"

namespace htnmr {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double phase_window(double t2_nv, double omega) {
  return 1.0 - std::cos(kPi * t2_nv * omega);
}

void check(const SensitivityParams& p) {
  if (p.loading_time <= 0.0 || p.transfer_time < 0.0 || p.blocks < 1 || p.m < 1 || p.m1 < 1 ||
      p.t_h <= 0.0 || p.t_1 <= 0.0 || p.t2_hydrogen <= 0.0 || p.t2_target <= 0.0 ||
      p.t2_nv <= 0.0 || p.omega_h <= 0.0 || p.omega_1 <= 0.0)
    throw ValidationError("sensitivity parameters out of range");
}

}  // namespace

double t2_eff(ProtocolKind protocol, const SensitivityParams& p) {
  if (protocol == ProtocolKind::hydrogen_transfer) {
    const double busy = 2.0 * p.transfer_time + p.m * p.t_h;
    return p.t2_hydrogen * p.t2_target * p.loading_time /
           (busy * p.t2_target + p.loading_time * p.t2_hydrogen);
  }
  return p.t2_target * p.loading_time / (p.loading_time + p.m1 * p.t_1);
}

double nv_amplitude_ratio(const SensitivityParams& p) {
  return (p.gamma_1 / p.gamma_h) * phase_window(p.t2_nv, p.omega_1) /
         phase_window(p.t2_nv, p.omega_h);
}

// Peak-height factor T2eff (1 - e^{-n tau / T2eff}) of an attenuated
// oscillation's spectrum.
static double peak_height_factor(double t2eff, double n_tau) {
  return t2eff * (1.0 - std::exp(-n_tau / t2eff));
}

double eta_shape_hydrogen(const SensitivityParams& p, int m) {
  SensitivityParams q = p;
  q.m = m;
  const double t2 = t2_eff(ProtocolKind::hydrogen_transfer, q);
  const double block = 2.0 * p.transfer_time + p.loading_time + m * p.t_h;
  return std::sqrt(block / m) / peak_height_factor(t2, p.blocks * p.loading_time);
}

double eta_shape_direct(const SensitivityParams& p, int m1) {
  SensitivityParams q = p;
  q.m1 = m1;
  const double t2 = t2_eff(ProtocolKind::direct, q);
  const double block = p.loading_time + m1 * p.t_1;
  return std::sqrt(block / m1) / peak_height_factor(t2, p.blocks * p.loading_time);
}

double eta_ratio(const SensitivityParams& p) {
  check(p);
  const double n_tau = p.blocks * p.loading_time;
  const double t2_h = t2_eff(ProtocolKind::hydrogen_transfer, p);
  const double t2_1 = t2_eff(ProtocolKind::direct, p);
  const double attenuation_bracket =
      (1.0 - std::exp(-n_tau / t2_1)) / (1.0 - std::exp(-n_tau / t2_h));
  const double duration_ratio =
      std::sqrt((2.0 * p.transfer_time + p.loading_time + p.m * p.t_h) /
                (p.loading_time + p.m1 * p.t_1));
  return attenuation_bracket * (t2_1 / t2_h) * nv_amplitude_ratio(p) * duration_ratio *
         std::sqrt(static_cast<double>(p.m1) / static_cast<double>(p.m)) / p.amplitude_factor;
}

std::pair<int, int> optimize_measurements(const SensitivityParams& p, int m_max) {
  if (m_max < 1) throw ValidationError("optimize_measurements: m_max must be >= 1");
  int best_m = 1;
  int best_m1 = 1;
  double best_h = eta_shape_hydrogen(p, 1);
  double best_1 = eta_shape_direct(p, 1);
  for (int m = 2; m <= m_max; ++m) {
    const double v = eta_shape_hydrogen(p, m);
    if (v < best_h) {
      best_h = v;
      best_m = m;
    }
  }
  for (int m1 = 2; m1 <= m_max; ++m1) {
    const double v = eta_shape_direct(p, m1);
    if (v < best_1) {
      best_1 = v;
      best_m1 = m1;
    }
  }
  return {best_m, best_m1};
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ValidationError("log_grid: bad range");
  std::vector<double> g(n);
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[i] = lo * std::exp(i * step);
  return g;
}

std::vector<SweepPoint> sweep_t2nv(const SensitivityParams& params, const std::vector<double>& grid,
                                   int m_max, bool retune_omega) {
  for (double g : grid)
    if (g < 1.0e-7 || g > 1.0e-3)
      throw ValidationError("sweep_t2nv: grid must stay within [0.1 us, 1 ms]");
  std::vector<SweepPoint> out;
  out.reserve(grid.size());
  for (double t2_nv : grid) {
    SensitivityParams p = params;
    p.t2_nv = t2_nv;
    if (retune_omega) {
      // Keep t2_nv * omega at its reference value so the accumulated-phase
      // window never crosses a zero; rotation times track the drive.
      const double scale = params.t2_nv / t2_nv;
      p.omega_h = params.omega_h * scale;
      p.omega_1 = params.omega_1 * scale;
      p.t_h = kTwoPi / p.omega_h;
      p.t_1 = kTwoPi / p.omega_1;
    }
    const auto [m, m1] = optimize_measurements(p, m_max);
    p.m = m;
    p.m1 = m1;
    out.push_back({t2_nv, eta_ratio(p), m, m1});
  }
  return out;
}

SensitivityReport make_report(SensitivityParams params, int m_max, bool pin_counts) {
  const auto [m_opt, m1_opt] = optimize_measurements(params, m_max);
  if (!pin_counts) {
    params.m = m_opt;
    params.m1 = m1_opt;
  }
  SensitivityReport report;
  report.t2_eff_h = t2_eff(ProtocolKind::hydrogen_transfer, params);
  report.t2_eff_1 = t2_eff(ProtocolKind::direct, params);
  report.eta = eta_ratio(params);
  report.snr_ratio_pred = 1.0 / report.eta;
  report.optimal_m = m_opt;
  report.optimal_m1 = m1_opt;
  report.amplitude_factor = params.amplitude_factor;
  return report;
}

SensitivityParams make_params(const Molecule& molecule, const SequenceConfig& ours,
                              const SequenceConfig& standard, const ReadoutConfig& readout) {
  SensitivityParams p;
  p.transfer_time = ours.transfer_time;
  p.loading_time = ours.loading_time;
  p.blocks = ours.blocks;
  p.m = ours.detections_per_block;
  p.m1 = standard.detections_per_block;
  p.t_h = ours.rf_rotation_time + readout.dead_time;
  p.t_1 = standard.rf_rotation_time + readout.dead_time;
  p.gamma_h = emitter_gamma(molecule, Role::hydrogen);
  p.gamma_1 = emitter_gamma(molecule, Role::target);
  p.omega_h = readout.omega;
  p.omega_1 = emitter_omega(molecule, readout, Role::target);
  p.t2_nv = readout.t2_nv;
  const auto hydrogens = molecule.sites_with(Role::hydrogen);
  const auto targets = molecule.sites_with(Role::target);
  if (hydrogens.empty() || targets.empty())
    throw ValidationError("make_params: molecule needs hydrogen and target roles");
  p.t2_hydrogen = molecule.t2_for(molecule.nuclei[hydrogens.front()].species).t2;
  const T2Times& tt = molecule.t2_for(molecule.nuclei[targets.front()].species);
  p.t2_target = ours.pi_pulses ? tt.t2 : tt.t2_star;
  p.amplitude_factor = general_amplitude(molecule, ours.transfer_time).first_order;
  return p;
}

}  // namespace htnmr
