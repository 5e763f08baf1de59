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

#include "htnmr/sequence.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <utility>

#include "htnmr/analytic_signal.hpp"
#include "htnmr/errors.hpp"
#include "htnmr/sensitivity.hpp"

namespace htnmr {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

double spin_z(int state, int site) { return (state >> site) & 1 ? -0.5 : 0.5; }

// A stage propagator as a time-ordered list of cheap factors. Diagonal
// evolutions and single-site pulses apply in O(dim^2); a dense factor is only
// needed when dot-product (eq) couplings make a segment non-diagonal.
struct Factor {
  enum class Kind { diag, pulse, dense } kind = Kind::diag;
  Eigen::VectorXcd phases;   // diag: exp(-i h_a t)
  std::vector<int> sites;    // pulse
  Eigen::Matrix2cd u2;       // pulse
  Matrix u;                  // dense
};

struct Propagator {
  int dim = 0;
  std::vector<Factor> factors;

  void apply(Matrix& rho) const {
    for (const auto& f : factors) apply_factor(rho, f, false);
  }
  void apply_inverse(Matrix& rho) const {
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) apply_factor(rho, *it, true);
  }
  // obs <- V^dagger obs V
  void conjugate_observable(Matrix& obs) const {
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) apply_factor(obs, *it, true);
  }

 private:
  static void apply_factor(Matrix& m, const Factor& f, bool inverse) {
    switch (f.kind) {
      case Factor::Kind::diag: {
        const Eigen::Index d = m.rows();
        for (Eigen::Index b = 0; b < d; ++b) {
          const Complex pb = inverse ? f.phases(b) : std::conj(f.phases(b));
          for (Eigen::Index a = 0; a < d; ++a) {
            const Complex pa = inverse ? std::conj(f.phases(a)) : f.phases(a);
            m(a, b) *= pa * pb;
          }
        }
        break;
      }
      case Factor::Kind::pulse: {
        Eigen::Matrix2cd u = f.u2;
        if (inverse) u = f.u2.adjoint();
        for (int s : f.sites) {
          apply_site_left(m, s, u);
          apply_site_right_dagger(m, s, u);
        }
        break;
      }
      case Factor::Kind::dense: {
        if (inverse)
          m = (f.u.adjoint() * m * f.u).eval();
        else
          m = (f.u * m * f.u.adjoint()).eval();
        break;
      }
    }
  }
};

Factor diag_factor(const Eigen::VectorXd& h, double t) {
  Factor f;
  f.kind = Factor::Kind::diag;
  f.phases.resize(h.size());
  for (Eigen::Index a = 0; a < h.size(); ++a) f.phases(a) = std::exp(-kI * h(a) * t);
  return f;
}

Factor pulse_factor(std::vector<int> sites, Axis axis, double angle) {
  Factor f;
  f.kind = Factor::Kind::pulse;
  f.sites = std::move(sites);
  f.u2 = rotation2(axis, angle);
  return f;
}

// Diagonal of the effective stage Hamiltonian over basis states.
Eigen::VectorXd effective_stage_diagonal(const Molecule& mol, Stage stage, bool with_pi) {
  const int n = mol.size();
  const int dim = 1 << n;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(dim);
  if (stage == Stage::transfer) {
    for (int i : mol.sites_with(Role::hydrogen))
      for (int j : mol.sites_with(Role::target)) {
        const double j_ij = mol.coupling(i, j);
        if (j_ij == 0.0) continue;
        for (int a = 0; a < dim; ++a) h(a) += j_ij * spin_z(a, i) * spin_z(a, j);
      }
    return h;
  }
  for (int i = 0; i < n; ++i) {
    if (mol.nuclei[i].role == Role::hydrogen) continue;
    for (int j = i + 1; j < n; ++j) {
      if (mol.nuclei[j].role == Role::hydrogen) continue;
      if (classify_pair(mol, i, j) != PairClass::neq) continue;
      const double j_ij = mol.coupling(i, j);
      if (j_ij == 0.0) continue;
      for (int a = 0; a < dim; ++a) h(a) += j_ij * spin_z(a, i) * spin_z(a, j);
    }
    if (!with_pi) {
      const double d = mol.nuclei[i].shift;
      if (d != 0.0)
        for (int a = 0; a < dim; ++a) h(a) += d * spin_z(a, i);
    }
  }
  return h;
}

bool has_eq_couplings(const Molecule& mol) {
  for (int i = 0; i < mol.size(); ++i)
    for (int j = i + 1; j < mol.size(); ++j)
      if (mol.coupling(i, j) != 0.0 && classify_pair(mol, i, j) == PairClass::eq) return true;
  return false;
}

// Full interaction-picture Hamiltonian: all chemical shifts, zz couplings for
// neq and heteronuclear pairs, full dot products for eq pairs.
Matrix full_interaction_matrix(const Molecule& mol) {
  const int n = mol.size();
  const int dim = 1 << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    const double d = mol.nuclei[i].shift;
    if (d == 0.0) continue;
    for (int a = 0; a < dim; ++a) h(a, a) += d * spin_z(a, i);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double j_ij = mol.coupling(i, j);
      if (j_ij == 0.0) continue;
      if (classify_pair(mol, i, j) == PairClass::eq) {
        for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
          const SpinOperator a = embed_pauli(n, i, axis);
          const SpinOperator b = embed_pauli(n, j, axis);
          h += j_ij * (a.entries * b.entries);
        }
      } else {
        for (int a = 0; a < dim; ++a) h(a, a) += j_ij * spin_z(a, i) * spin_z(a, j);
      }
    }
  }
  return h;
}

// Evolution segment under the full Hamiltonian; diagonal unless eq couplings
// are present.
Factor full_evolution_factor(const Matrix& h_full, bool dense, double t) {
  if (!dense) {
    Eigen::VectorXd h(h_full.rows());
    for (Eigen::Index a = 0; a < h_full.rows(); ++a) h(a) = h_full(a, a).real();
    return diag_factor(h, t);
  }
  Factor f;
  f.kind = Factor::Kind::dense;
  f.u = hermitian_propagator(h_full, t);
  return f;
}

// pi/2 brackets of the transfer stage. Hydrogen polarization maps onto
// hydrogen-target two-spin coherence on the way in and back onto (minus)
// hydrogen polarization on the way out, which fixes the pulse phases below.
void add_transfer_brackets_pre(Propagator& p, const std::vector<int>& hydrogens,
                               const std::vector<int>& targets) {
  p.factors.push_back(pulse_factor(hydrogens, Axis::x, -kPi / 2.0));
  p.factors.push_back(pulse_factor(targets, Axis::y, kPi / 2.0));
}

void add_transfer_brackets_post(Propagator& p, const std::vector<int>& hydrogens,
                                const std::vector<int>& targets) {
  p.factors.push_back(pulse_factor(hydrogens, Axis::y, -kPi / 2.0));
  p.factors.push_back(pulse_factor(targets, Axis::y, kPi / 2.0));
}

Propagator make_transfer_propagator(const Molecule& mol, double t, EngineMode mode) {
  Propagator p;
  p.dim = 1 << mol.size();
  const auto hydrogens = mol.sites_with(Role::hydrogen);
  const auto targets = mol.sites_with(Role::target);
  add_transfer_brackets_pre(p, hydrogens, targets);
  if (mode == EngineMode::effective) {
    p.factors.push_back(diag_factor(effective_stage_diagonal(mol, Stage::transfer, true), t));
  } else {
    // Simultaneous pi pulses on the hydrogen and target channels at t/2 and t
    // refocus everything that couples those channels to the rest.
    const Matrix h_full = full_interaction_matrix(mol);
    const bool dense = has_eq_couplings(mol);
    std::vector<int> pulsed = hydrogens;
    pulsed.insert(pulsed.end(), targets.begin(), targets.end());
    p.factors.push_back(full_evolution_factor(h_full, dense, t / 2.0));
    p.factors.push_back(pulse_factor(pulsed, Axis::x, kPi));
    p.factors.push_back(full_evolution_factor(h_full, dense, t / 2.0));
    p.factors.push_back(pulse_factor(pulsed, Axis::x, kPi));
  }
  add_transfer_brackets_post(p, hydrogens, targets);
  return p;
}

Propagator make_loading_propagator(const Molecule& mol, double tau, bool with_pi,
                                   EngineMode mode) {
  Propagator p;
  p.dim = 1 << mol.size();
  if (mode == EngineMode::effective) {
    p.factors.push_back(diag_factor(effective_stage_diagonal(mol, Stage::loading, with_pi), tau));
    return p;
  }
  const auto hydrogens = mol.sites_with(Role::hydrogen);
  std::vector<int> non_h;
  for (int i = 0; i < mol.size(); ++i)
    if (mol.nuclei[i].role != Role::hydrogen) non_h.push_back(i);
  const Matrix h_full = full_interaction_matrix(mol);
  const bool dense = has_eq_couplings(mol);
  if (with_pi) {
    // pi on all non-hydrogens at tau/4 and 3tau/4 (kills their shifts, keeps
    // their mutual zz couplings), pi on the hydrogen channel at tau/2 and tau
    // (decouples it and refocuses the heteronuclear terms).
    for (int quarter = 0; quarter < 4; ++quarter) {
      p.factors.push_back(full_evolution_factor(h_full, dense, tau / 4.0));
      if (quarter % 2 == 0)
        p.factors.push_back(pulse_factor(non_h, Axis::x, kPi));
      else
        p.factors.push_back(pulse_factor(hydrogens, Axis::x, kPi));
    }
  } else {
    // Hydrogen channel still decoupled; non-hydrogen shifts evolve freely.
    for (int half = 0; half < 2; ++half) {
      p.factors.push_back(full_evolution_factor(h_full, dense, tau / 2.0));
      p.factors.push_back(pulse_factor(hydrogens, Axis::x, kPi));
    }
  }
  return p;
}

// The direct-interrogation "transfer" is just the pi/2 that turns target
// polarization into transverse coherence (and back).
Propagator make_standard_swap(const Molecule& mol) {
  Propagator p;
  p.dim = 1 << mol.size();
  p.factors.push_back(pulse_factor(mol.sites_with(Role::target), Axis::x, -kPi / 2.0));
  return p;
}

Matrix emitter_observable(const Molecule& mol, Role emitter) {
  const int dim = 1 << mol.size();
  Matrix obs = Matrix::Zero(dim, dim);
  for (int i : mol.sites_with(emitter))
    for (int a = 0; a < dim; ++a) obs(a, a) += 2.0 * spin_z(a, i);
  return obs;
}

double re_trace_product(const Matrix& a, const Matrix& b) {
  return a.cwiseProduct(b.transpose()).sum().real();
}

void check_protocol_preconditions(const Molecule& mol, const SequenceConfig& cfg) {
  if (mol.sites_with(Role::hydrogen).empty())
    throw ValidationError("protocol needs at least one hydrogen");
  if (mol.sites_with(Role::target).empty())
    throw ValidationError("protocol needs at least one target nucleus");
  if (mol.size() > kMaxSpins) throw CapacityError("molecule exceeds spin cap");
  if (cfg.transfer_time <= 0.0 || cfg.loading_time <= 0.0)
    throw ValidationError("transfer and loading times must be positive");
  if (cfg.blocks < 1 || cfg.detections_per_block < 1)
    throw ValidationError("blocks and detections per block must be >= 1");
}

DensityMatrix prepolarized_state(const Molecule& mol, const Environment& env) {
  const int n = mol.size();
  const int dim = 1 << n;
  double b_h = 0.0;
  for (const auto& nuc : mol.nuclei)
    if (nuc.role == Role::hydrogen) b_h = boltzmann_factor(nuc.gamma, env);
  Matrix rho = Matrix::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    double dev = 0.0;
    for (int i = 0; i < n; ++i) {
      const double b = mol.nuclei[i].role == Role::target
                           ? b_h
                           : boltzmann_factor(mol.nuclei[i].gamma, env);
      dev += b * spin_z(a, i);
    }
    rho(a, a) = (1.0 + dev) / static_cast<double>(dim);
  }
  return DensityMatrix{dim, std::move(rho)};
}

// Shared block loop. After stage rewinds, the state entering detection at
// block k equals V L^k V rho0 (V L^k V)^dagger, so one loading application
// per block suffices.
SignalTrace run_blocks(const DensityMatrix& rho0, const Propagator& swap, const Propagator& load,
                       const Matrix& raw_obs, Role emitter, const SequenceConfig& cfg) {
  Matrix sigma = rho0.entries;
  swap.apply(sigma);
  Matrix obs = raw_obs;
  swap.conjugate_observable(obs);
  SignalTrace trace;
  trace.emitter = emitter;
  trace.times.reserve(cfg.blocks);
  trace.values.reserve(cfg.blocks);
  for (int k = 1; k <= cfg.blocks; ++k) {
    load.apply(sigma);
    trace.times.push_back(k * cfg.loading_time);
    trace.values.push_back(re_trace_product(sigma, obs));
  }
  return trace;
}

void warn_if_third_order_large(const Molecule& mol, const SequenceConfig& cfg) {
  const AmplitudeBreakdown amp = general_amplitude(mol, cfg.transfer_time);
  if (std::abs(amp.third_order) > 0.1 * std::abs(amp.first_order) && amp.first_order != 0.0)
    std::cerr << "htnmr: warning: third-order transfer amplitude is "
              << amp.third_order / amp.first_order
              << " of first order; the first-order picture is unreliable here\n";
}

}  // namespace

SpinOperator effective_hamiltonian(const Molecule& molecule, Stage stage, bool with_pi_pulses) {
  const int dim = 1 << molecule.size();
  const Eigen::VectorXd h = effective_stage_diagonal(molecule, stage, with_pi_pulses);
  Matrix m = Matrix::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) m(a, a) = h(a);
  return SpinOperator{dim, std::move(m), true};
}

DensityMatrix run_transfer(const DensityMatrix& rho, const Molecule& molecule, double t,
                           TransferDirection direction) {
  if (t < 0.0) throw ValidationError("run_transfer: negative time");
  if (rho.dim != (1 << molecule.size()))
    throw ValidationError("run_transfer: state does not match molecule");
  const Propagator v = make_transfer_propagator(molecule, t, EngineMode::effective);
  DensityMatrix out{rho.dim, rho.entries};
  if (direction == TransferDirection::forward)
    v.apply(out.entries);
  else
    v.apply_inverse(out.entries);
  return out;
}

SignalTrace run_protocol(const Molecule& molecule, const Environment& env,
                         const SequenceConfig& config) {
  check_protocol_preconditions(molecule, config);
  warn_if_third_order_large(molecule, config);
  const DensityMatrix rho0 = thermal_state(molecule, env);
  const Propagator v =
      make_transfer_propagator(molecule, config.transfer_time, config.engine_mode);
  const Propagator l = make_loading_propagator(molecule, config.loading_time, config.pi_pulses,
                                               config.engine_mode);
  return run_blocks(rho0, v, l, emitter_observable(molecule, Role::hydrogen), Role::hydrogen,
                    config);
}

SignalTrace run_standard_protocol(const Molecule& molecule, const Environment& env,
                                  const SequenceConfig& config) {
  check_protocol_preconditions(molecule, config);
  const DensityMatrix rho0 = prepolarized_state(molecule, env);
  const Propagator v = make_standard_swap(molecule);
  const Propagator l = make_loading_propagator(molecule, config.loading_time, config.pi_pulses,
                                               config.engine_mode);
  return run_blocks(rho0, v, l, emitter_observable(molecule, Role::target), Role::target, config);
}

SignalTrace run_explicit_pulse_check(const Molecule& molecule, const Environment& env,
                                     const SequenceConfig& config) {
  if (molecule.size() > 4)
    throw CapacityError("explicit pulse check is limited to 4 spins");
  SequenceConfig cfg = config;
  cfg.engine_mode = EngineMode::explicit_pulses;
  return run_protocol(molecule, env, cfg);
}

SignalTrace apply_dephasing(const SignalTrace& trace, const Molecule& molecule,
                            const SequenceConfig& config) {
  if (trace.attenuation_applied)
    throw ValidationError("apply_dephasing: attenuation already applied");
  SensitivityParams params;
  params.transfer_time = config.transfer_time;
  params.loading_time = config.loading_time;
  params.blocks = config.blocks;
  params.m = config.detections_per_block;
  params.m1 = config.detections_per_block;
  params.t_h = config.rf_rotation_time;
  params.t_1 = config.rf_rotation_time;
  const auto hydrogens = molecule.sites_with(Role::hydrogen);
  const auto targets = molecule.sites_with(Role::target);
  if (!hydrogens.empty())
    params.t2_hydrogen = molecule.t2_for(molecule.nuclei[hydrogens.front()].species).t2;
  if (targets.empty()) throw ValidationError("apply_dephasing: molecule has no target");
  const T2Times& tt = molecule.t2_for(molecule.nuclei[targets.front()].species);
  params.t2_target = config.pi_pulses ? tt.t2 : tt.t2_star;
  const double t2eff = t2_eff(
      trace.emitter == Role::hydrogen ? ProtocolKind::hydrogen_transfer : ProtocolKind::direct,
      params);
  SignalTrace out = trace;
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] *= std::exp(-out.times[k] / t2eff);
  out.attenuation_applied = true;
  return out;
}

double block_duration(const SequenceConfig& config, Role emitter) {
  const double detection = config.detections_per_block * config.rf_rotation_time;
  if (emitter == Role::hydrogen)
    return 2.0 * config.transfer_time + config.loading_time + detection;
  return config.loading_time + detection;
}

}  // namespace htnmr
