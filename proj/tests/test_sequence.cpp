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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "htnmr/analytic_signal.hpp"
#include "htnmr/errors.hpp"
#include "htnmr/sensitivity.hpp"
#include "htnmr/sequence.hpp"
#include "test_util.hpp"

using namespace htnmr;
using htnmr_test::hcn;
using htnmr_test::hcn_doc;
using htnmr_test::hcn_env;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

SequenceConfig hcn_config() {
  SequenceConfig cfg;
  cfg.transfer_time = 1.9e-3;
  cfg.loading_time = 1.0e-3;
  cfg.blocks = 48;
  cfg.detections_per_block = 70;
  cfg.rf_rotation_time = 5.0e-5;
  cfg.pi_pulses = true;
  return cfg;
}

// Random single-hydrogen molecules are the validation workhorse; pick the
// transfer time near full conversion of the hydrogen-target coupling.
SequenceConfig random_config(const Molecule& mol, Rng& rng) {
  SequenceConfig cfg;
  cfg.transfer_time = kPi / mol.coupling(0, 1) * rng.uniform(0.6, 1.2);
  cfg.loading_time = rng.uniform(0.5e-3, 2.0e-3);
  cfg.blocks = 32;
  cfg.pi_pulses = rng.uniform() < 0.5;
  return cfg;
}

}  // namespace

TEST_CASE("effective transfer Hamiltonian keeps hydrogen-target couplings only") {
  const Molecule m = hcn();
  const SpinOperator h = effective_hamiltonian(m, Stage::transfer, true);
  Matrix expect = kTwoPi * 267.0 *
                  (embed_pauli(3, 0, Axis::z).entries * embed_pauli(3, 1, Axis::z).entries);
  CHECK((h.entries - expect).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("effective loading Hamiltonian with and without pi pulses") {
  const Molecule m = hcn();
  const Matrix zz_cn =
      embed_pauli(3, 1, Axis::z).entries * embed_pauli(3, 2, Axis::z).entries;
  const SpinOperator with_pi = effective_hamiltonian(m, Stage::loading, true);
  CHECK((with_pi.entries - kTwoPi * -25.0 * zz_cn).cwiseAbs().maxCoeff() < 1e-9);

  const SpinOperator no_pi = effective_hamiltonian(m, Stage::loading, false);
  Matrix expect = kTwoPi * -25.0 * zz_cn + kTwoPi * 50.0 * embed_pauli(3, 1, Axis::z).entries;
  // N carries no shift in the reference document
  CHECK((no_pi.entries - expect).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("run_transfer basics") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  const DensityMatrix rho = thermal_state(m, env);

  const DensityMatrix same = run_transfer(rho, m, 0.0, TransferDirection::forward);
  CHECK((same.entries - rho.entries).cwiseAbs().maxCoeff() < 1e-13);

  // full conversion: hydrogen longitudinal polarization vanishes
  const double t_full = 1.0 / (2.0 * 267.0);
  const DensityMatrix after = run_transfer(rho, m, t_full, TransferDirection::forward);
  CHECK(std::abs(expectation(after, embed_pauli(3, 0, Axis::z))) < 1e-12);

  const DensityMatrix back = run_transfer(after, m, t_full, TransferDirection::rewind);
  CHECK((back.entries - rho.entries).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("run_protocol reproduces the closed-form J-coupling trace") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  const SequenceConfig cfg = hcn_config();
  const SignalTrace trace = run_protocol(m, env, cfg);
  const double b_h = boltzmann_factor(m.nuclei[0].gamma, env);
  const double amp = std::pow(std::sin(kPi * 267.0 * cfg.transfer_time), 2);
  REQUIRE(static_cast<int>(trace.values.size()) == cfg.blocks);
  for (int k = 1; k <= cfg.blocks; ++k) {
    const double expect = -0.5 * b_h * amp * std::cos(kPi * 25.0 * k * cfg.loading_time);
    CHECK(trace.values[k - 1] == doctest::Approx(expect).epsilon(1e-9));
    CHECK(trace.times[k - 1] == doctest::Approx(k * cfg.loading_time));
  }
  CHECK(trace.emitter == Role::hydrogen);
  CHECK_FALSE(trace.attenuation_applied);
  // quarter-period zero: cos(pi*25*0.020) = 0
  CHECK(std::abs(trace.values[19]) < 1e-16);
}

TEST_CASE("run_protocol without pi pulses picks up the chemical shift") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  SequenceConfig cfg = hcn_config();
  cfg.pi_pulses = false;
  const SignalTrace trace = run_protocol(m, env, cfg);
  const double b_h = boltzmann_factor(m.nuclei[0].gamma, env);
  const double amp = std::pow(std::sin(kPi * 267.0 * cfg.transfer_time), 2);
  for (int k = 1; k <= cfg.blocks; ++k) {
    const double kt = k * cfg.loading_time;
    const double expect =
        -0.5 * b_h * amp * std::cos(kTwoPi * 50.0 * kt) * std::cos(kPi * 25.0 * kt);
    CHECK(trace.values[k - 1] == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("standard protocol emits from the prepolarized target") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  SequenceConfig cfg = hcn_config();
  const SignalTrace trace = run_standard_protocol(m, env, cfg);
  const double b_h = boltzmann_factor(m.nuclei[0].gamma, env);
  CHECK(trace.emitter == Role::target);
  for (int k = 1; k <= cfg.blocks; ++k) {
    const double expect = -0.5 * b_h * std::cos(kPi * 25.0 * k * cfg.loading_time);
    CHECK(trace.values[k - 1] == doctest::Approx(expect).epsilon(1e-9));
  }

  // at exact full transfer the two protocols coincide
  cfg.transfer_time = 1.0 / (2.0 * 267.0);
  const SignalTrace ours = run_protocol(m, env, cfg);
  const SignalTrace direct = run_standard_protocol(m, env, cfg);
  CHECK(htnmr_test::max_abs_diff(ours.values, direct.values) < 1e-9 * b_h);
}

TEST_CASE("explicit pulses match effective mode on HCN") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  for (bool pi : {true, false}) {
    SequenceConfig cfg = hcn_config();
    cfg.pi_pulses = pi;
    const SignalTrace eff = run_protocol(m, env, cfg);
    const SignalTrace exp = run_explicit_pulse_check(m, env, cfg);
    CHECK(htnmr_test::max_abs_diff(eff.values, exp.values) /
              htnmr_test::max_abs(eff.values) <
          1e-8);
  }
}

TEST_CASE("explicit pulses match effective mode on random molecules") {
  for (int it = 0; it < 40; ++it) {
    Rng rng(1000 + it);
    const int spins = 2 + static_cast<int>(rng.integer() % 3);
    const Molecule m = random_molecule(derive_seed(9, it), spins);
    const Environment env = hcn_env();
    SequenceConfig cfg = random_config(m, rng);
    const SignalTrace eff = run_protocol(m, env, cfg);
    const SignalTrace exp = run_explicit_pulse_check(m, env, cfg);
    const double amp = std::max(htnmr_test::max_abs(eff.values), 1e-12);
    CHECK(htnmr_test::max_abs_diff(eff.values, exp.values) / amp < 1e-8);
  }
}

TEST_CASE("with pi pulses the trace ignores chemical shifts entirely") {
  for (int it = 0; it < 20; ++it) {
    Rng rng(2000 + it);
    Molecule m = random_molecule(derive_seed(11, it), 3);
    const Environment env = hcn_env();
    SequenceConfig cfg = random_config(m, rng);
    cfg.pi_pulses = true;
    cfg.engine_mode = EngineMode::explicit_pulses;
    const SignalTrace with_shifts = run_protocol(m, env, cfg);
    Molecule no_shift = m;
    for (auto& n : no_shift.nuclei) n.shift = 0.0;
    const SignalTrace without = run_protocol(no_shift, env, cfg);
    CHECK(htnmr_test::max_abs_diff(with_shifts.values, without.values) < 1e-10);
  }
}

TEST_CASE("block recursion: n blocks are a prefix of 2n blocks") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  SequenceConfig cfg = hcn_config();
  const SignalTrace short_run = run_protocol(m, env, cfg);
  cfg.blocks *= 2;
  const SignalTrace long_run = run_protocol(m, env, cfg);
  for (std::size_t k = 0; k < short_run.values.size(); ++k)
    CHECK(short_run.values[k] == doctest::Approx(long_run.values[k]).epsilon(1e-12));
}

TEST_CASE("pre-noise trace obeys the amplitude bound") {
  for (int it = 0; it < 30; ++it) {
    Rng rng(3000 + it);
    const Molecule m = random_molecule(derive_seed(13, it), 3);
    const Environment env = hcn_env();
    const SequenceConfig cfg = random_config(m, rng);
    const SignalTrace trace = run_protocol(m, env, cfg);
    const double b_h = boltzmann_factor(m.nuclei[0].gamma, env);
    const double bound =
        0.5 * b_h * general_amplitude(m, cfg.transfer_time).first_order + 1e-12;
    for (double v : trace.values) CHECK(std::abs(v) <= bound);
  }
}

TEST_CASE("apply_dephasing attenuates with the effective decoherence time") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  const SequenceConfig cfg = hcn_config();
  const SignalTrace raw = run_protocol(m, env, cfg);
  const SignalTrace damped = apply_dephasing(raw, m, cfg);
  CHECK(damped.attenuation_applied);
  CHECK_THROWS_AS(apply_dephasing(damped, m, cfg), ValidationError);

  SensitivityParams p;
  p.transfer_time = cfg.transfer_time;
  p.loading_time = cfg.loading_time;
  p.m = cfg.detections_per_block;
  p.t_h = cfg.rf_rotation_time;
  p.t2_hydrogen = 1.0;
  p.t2_target = 4.0;
  const double t2eff = t2_eff(ProtocolKind::hydrogen_transfer, p);
  for (std::size_t k = 0; k < raw.values.size(); ++k)
    CHECK(damped.values[k] ==
          doctest::Approx(raw.values[k] * std::exp(-raw.times[k] / t2eff)).epsilon(1e-12));

  // closed-form identity: exp(-n tau / T2eff) = exp(-n (tau/T2C + (2t + M tH)/T2H))
  const double n_tau = cfg.blocks * cfg.loading_time;
  const double per_block = cfg.loading_time / 4.0 +
                           (2.0 * cfg.transfer_time +
                            cfg.detections_per_block * cfg.rf_rotation_time) /
                               1.0;
  CHECK(std::exp(-n_tau / t2eff) ==
        doctest::Approx(std::exp(-cfg.blocks * per_block)).epsilon(1e-12));
}

TEST_CASE("apply_dephasing with huge T2 leaves the trace unchanged") {
  nlohmann::json doc = hcn_doc();
  doc["t2"]["1H"]["t2_s"] = 1.0e12;
  doc["t2"]["13C"]["t2_s"] = 1.0e12;
  const Molecule m = load_molecule(doc);
  const Environment env = hcn_env();
  const SequenceConfig cfg = hcn_config();
  const SignalTrace raw = run_protocol(m, env, cfg);
  const SignalTrace damped = apply_dephasing(raw, m, cfg);
  CHECK(htnmr_test::max_abs_diff(raw.values, damped.values) < 1e-16);
}

TEST_CASE("protocol preconditions") {
  const Environment env = hcn_env();
  nlohmann::json doc = hcn_doc();
  doc["nuclei"][0]["role"] = "other";  // no hydrogen left
  CHECK_THROWS_AS(run_protocol(load_molecule(doc), env, hcn_config()), ValidationError);

  doc = hcn_doc();
  doc["nuclei"][1]["role"] = "other";  // no target left
  CHECK_THROWS_AS(run_protocol(load_molecule(doc), env, hcn_config()), ValidationError);

  SequenceConfig cfg = hcn_config();
  cfg.blocks = 0;
  CHECK_THROWS_AS(run_protocol(hcn(), env, cfg), ValidationError);
}

TEST_CASE("explicit pulse check is limited to validation scale") {
  nlohmann::json doc = hcn_doc();
  for (int i = 0; i < 2; ++i)
    doc["nuclei"].push_back({{"label", "X" + std::to_string(i)},
                             {"species", "31P"},
                             {"shift_hz", 3.0 * i},
                             {"role", "other"}});
  const Molecule five = load_molecule(doc);
  CHECK_THROWS_AS(run_explicit_pulse_check(five, hcn_env(), hcn_config()), CapacityError);
}

TEST_CASE("block_duration per protocol") {
  const SequenceConfig cfg = hcn_config();
  CHECK(block_duration(cfg, Role::hydrogen) ==
        doctest::Approx(2 * 1.9e-3 + 1e-3 + 70 * 5e-5));
  CHECK(block_duration(cfg, Role::target) == doctest::Approx(1e-3 + 70 * 5e-5));
}
