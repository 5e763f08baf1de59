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

#include "htnmr/errors.hpp"
#include "htnmr/nv_readout.hpp"
#include "htnmr/sequence.hpp"
#include "test_util.hpp"

using namespace htnmr;
using htnmr_test::hcn;
using htnmr_test::hcn_env;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

SequenceConfig small_config() {
  SequenceConfig cfg;
  cfg.transfer_time = 1.9e-3;
  cfg.loading_time = 1.0e-3;
  cfg.blocks = 16;
  cfg.detections_per_block = 70;
  cfg.rf_rotation_time = 5.0e-5;
  return cfg;
}

ReadoutConfig reference_readout() {
  ReadoutConfig r;
  r.omega = kTwoPi * 20.0e3;
  return r;
}
}  // namespace

TEST_CASE("b0_amplitude golden constant") {
  // Independent arithmetic over the constant list, frozen here:
  // (2pi)^2 hbar^2 gamma mu0 rho B / (16 pi kB T) * F3 at unit polarization.
  const double hbar = 1.054571817e-34;
  const double mu0 = 4e-7 * kPi;
  const double kb = 1.380649e-23;
  const double gamma = kTwoPi * 42.57e6;
  const double rho = 6.6e28;
  const double expected = kTwoPi * kTwoPi * hbar * hbar * gamma * mu0 * rho * 2.0 /
                          (16.0 * kPi * kb * 300.0) * 4.1;
  CHECK(expected == doctest::Approx(3.8330e-16).epsilon(1e-4));  // Tesla

  Environment env{2.0, 300.0};
  ReadoutConfig r = reference_readout();
  CHECK(b0_amplitude(env, r, gamma, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(b0_amplitude(env, r, gamma, 0.0) == 0.0);

  Environment doubled{4.0, 300.0};
  CHECK(b0_amplitude(doubled, r, gamma, 0.5) ==
        doctest::Approx(2.0 * b0_amplitude(env, r, gamma, 0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(b0_amplitude(env, r, gamma, 1.5), ValidationError);
}

TEST_CASE("nv_phase_factor window zeros and maximum") {
  const double gamma = kTwoPi * 42.6e6;
  // pi * t2 * omega = 2 pi: the window closes
  CHECK(std::abs(nv_phase_factor(gamma, 2.0e5, 1.0e-5, 1.0)) <
        1e-12 * std::abs(nv_phase_factor(gamma, 1.0e5, 1.0e-5, 1.0)));
  // pi * t2 * omega = pi: maximum, [1 - cos] = 2
  const double at_max = nv_phase_factor(gamma, 1.0e5, 1.0e-5, 1.0);
  CHECK(at_max ==
        doctest::Approx(2.0 * electron_gamma() * gamma / 1.0e5 * 2.0).epsilon(1e-12));
}

TEST_CASE("nv_phase_factor is linear in the expectation") {
  Rng rng(7);
  for (int it = 0; it < 100; ++it) {
    const double gamma = rng.uniform(1e7, 3e8);
    const double omega = rng.uniform(1e4, 5e5);
    const double t2 = rng.uniform(1e-6, 1e-4);
    const double e = rng.uniform(-1.0, 1.0);
    const double a = rng.uniform(0.1, 5.0);
    CHECK(nv_phase_factor(gamma, omega, t2, a * e) ==
          doctest::Approx(a * nv_phase_factor(gamma, omega, t2, e)).epsilon(1e-12));
  }
  CHECK(nv_phase_factor(kTwoPi * 42.6e6, 1e5, 1e-5, 0.0) == 0.0);
}

TEST_CASE("accumulated-phase ratio for carbon versus hydrogen at fixed drive") {
  // brute-force evaluation of (gammaC/gammaH) [1-cos(pi T omega_C)]/[1-cos(pi T omega_H)]
  const Molecule m = hcn();
  const ReadoutConfig r = reference_readout();
  const double gh = emitter_gamma(m, Role::hydrogen);
  const double gc = emitter_gamma(m, Role::target);
  const double oc = emitter_omega(m, r, Role::target);
  CHECK(oc == doctest::Approx(r.omega * gc / gh).epsilon(1e-12));
  for (double t2 : {1e-6, 3e-6, 1e-5, 2e-5}) {
    const double expected = (gc / gh) * (1.0 - std::cos(kPi * t2 * oc)) /
                            (1.0 - std::cos(kPi * t2 * r.omega));
    const double a_c = nv_phase_factor(gc, oc, t2, 1.0) * gc;   // field carries one gamma
    const double a_h = nv_phase_factor(gh, r.omega, t2, 1.0) * gh;
    CHECK(a_c / a_h == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("sample_readout is deterministic per seed") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  const SequenceConfig cfg = small_config();
  const ReadoutConfig r = reference_readout();
  const SignalTrace trace = run_protocol(m, env, cfg);
  const SignalTrace a = sample_readout(trace, m, env, cfg, r, 42);
  const SignalTrace b = sample_readout(trace, m, env, cfg, r, 42);
  const SignalTrace c = sample_readout(trace, m, env, cfg, r, 43);
  CHECK(htnmr_test::max_abs_diff(a.values, b.values) == 0.0);
  CHECK(htnmr_test::max_abs_diff(a.values, c.values) > 0.0);
}

TEST_CASE("sample_readout mean converges to the noiseless trace") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  const SequenceConfig cfg = small_config();
  const ReadoutConfig r = reference_readout();
  const SignalTrace trace = run_protocol(m, env, cfg);
  const SignalTrace clean = nv_signal_trace(trace, m, env, cfg, r);

  const int n_seeds = 10000;
  std::vector<double> mean(trace.values.size(), 0.0);
  std::vector<double> m2(trace.values.size(), 0.0);
  for (int s = 0; s < n_seeds; ++s) {
    const SignalTrace noisy = sample_readout(trace, m, env, cfg, r, derive_seed(123, s));
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const double d = noisy.values[k] - mean[k];
      mean[k] += d / (s + 1);
      m2[k] += d * (noisy.values[k] - mean[k]);
    }
  }
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double se = std::sqrt(m2[k] / (n_seeds - 1) / n_seeds);
    CHECK(std::abs(mean[k] - clean.values[k]) < 3.0 * se + 1e-18);
  }
}

TEST_CASE("averaging count guards against short experiments") {
  const SequenceConfig cfg = small_config();
  ReadoutConfig r = reference_readout();
  r.t_exp = 1e-4;  // far below one protocol duration
  CHECK_THROWS_AS(averaging_count(cfg, Role::hydrogen, r), ValidationError);
  r.t_exp = 1e3;
  CHECK(averaging_count(cfg, Role::hydrogen, r) ==
        doctest::Approx(1e3 / (cfg.blocks * block_duration(cfg, Role::hydrogen))));
}

TEST_CASE("synthesize_field produces the emitter-frequency sinusoid") {
  const Molecule m = hcn();
  const Environment env = hcn_env();
  SequenceConfig cfg = small_config();
  cfg.blocks = 2;
  cfg.detections_per_block = 2;
  const ReadoutConfig r = reference_readout();

  SignalTrace constant;
  constant.emitter = Role::hydrogen;
  constant.times = {cfg.loading_time, 2 * cfg.loading_time};
  constant.values = {1.0, 1.0};
  const auto samples = synthesize_field(constant, m, env, cfg, r, 20);
  REQUIRE_FALSE(samples.empty());

  // one full rotation integrates to zero, and a +2pi/-2pi pair is odd
  const std::size_t per_rotation = samples.size() / (cfg.blocks * cfg.detections_per_block);
  double pair_sum = 0.0;
  double amp = 0.0;
  for (std::size_t i = 0; i < 2 * per_rotation; ++i) {
    pair_sum += samples[i].value;
    amp = std::max(amp, std::abs(samples[i].value));
  }
  CHECK(std::abs(pair_sum) / (2 * per_rotation) < 1e-10 * amp);

  // standard emitter: scaled Rabi frequency; peak of |sin| at quarter period
  SignalTrace target_trace = constant;
  target_trace.emitter = Role::target;
  const auto target_samples = synthesize_field(target_trace, m, env, cfg, r, 20);
  const double omega_c = emitter_omega(m, r, Role::target);
  double best_t = 0.0, best_v = 0.0;
  for (std::size_t i = 0; i < target_samples.size() / 4; ++i)
    if (std::abs(target_samples[i].value) > best_v) {
      best_v = std::abs(target_samples[i].value);
      best_t = target_samples[i].t - target_samples[0].t;
    }
  CHECK(best_t == doctest::Approx(kTwoPi / omega_c / 4.0).epsilon(0.1));

  CHECK_THROWS_AS(synthesize_field(constant, m, env, cfg, r, 10), ValidationError);
}
