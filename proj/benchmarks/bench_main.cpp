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

#include <benchmark/benchmark.h>

#include <numbers>

#include "htnmr/analytic_signal.hpp"
#include "htnmr/molecule.hpp"
#include "htnmr/rng.hpp"
#include "htnmr/sequence.hpp"
#include "htnmr/spectro.hpp"
#include "htnmr/spin_ops.hpp"

using namespace htnmr;

namespace {

const nlohmann::json kHcnDoc = {
    {"nuclei",
     {{{"label", "H1"}, {"species", "1H"}, {"shift_hz", 0.0}, {"role", "hydrogen"}},
      {{"label", "C1"}, {"species", "13C"}, {"shift_hz", 50.0}, {"role", "target"}},
      {{"label", "N1"}, {"species", "15N"}, {"shift_hz", 0.0}, {"role", "other"}}}},
    {"couplings",
     {{{"a", "H1"}, {"b", "C1"}, {"j_hz", 267.0}},
      {{"a", "H1"}, {"b", "N1"}, {"j_hz", -11.0}},
      {{"a", "C1"}, {"b", "N1"}, {"j_hz", -25.0}}}},
    {"t2",
     {{"1H", {{"t2_s", 1.0}, {"t2_star_s", 1.0}}},
      {"13C", {{"t2_s", 4.0}, {"t2_star_s", 0.4}}},
      {"15N", {{"t2_s", 6.0}, {"t2_star_s", 6.0}}}}},
    {"environment", {{"b_tesla", 2.0}, {"temperature_k", 300.0}}}};

DensityMatrix random_state(int n_spins, Rng& rng) {
  const int dim = 1 << n_spins;
  Matrix a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = Complex(rng.gaussian(), rng.gaussian());
  Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix{dim, std::move(rho)};
}

void BM_evolve_dense(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  const DensityMatrix rho = random_state(n, rng);
  const int dim = 1 << n;
  Matrix h(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) h(r, c) = Complex(rng.gaussian(), rng.gaussian());
  const SpinOperator op{dim, (0.5 * (h + h.adjoint())).eval(), true};
  for (auto _ : state) benchmark::DoNotOptimize(evolve(rho, op, 1e-3));
}
BENCHMARK(BM_evolve_dense)->DenseRange(2, 8, 2);

void BM_run_protocol_hcn(benchmark::State& state) {
  const Molecule mol = load_molecule(kHcnDoc);
  const Environment env = load_environment(kHcnDoc);
  SequenceConfig cfg;
  cfg.blocks = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_protocol(mol, env, cfg));
}
BENCHMARK(BM_run_protocol_hcn)->Arg(240);

void BM_run_protocol_explicit_hcn(benchmark::State& state) {
  const Molecule mol = load_molecule(kHcnDoc);
  const Environment env = load_environment(kHcnDoc);
  SequenceConfig cfg;
  cfg.blocks = static_cast<int>(state.range(0));
  cfg.engine_mode = EngineMode::explicit_pulses;
  for (auto _ : state) benchmark::DoNotOptimize(run_protocol(mol, env, cfg));
}
BENCHMARK(BM_run_protocol_explicit_hcn)->Arg(240);

void BM_oracle_trace_hcn(benchmark::State& state) {
  const Molecule mol = load_molecule(kHcnDoc);
  const Environment env = load_environment(kHcnDoc);
  SequenceConfig cfg;
  cfg.blocks = 240;
  for (auto _ : state) benchmark::DoNotOptimize(oracle_trace(mol, env, cfg));
}
BENCHMARK(BM_oracle_trace_hcn);

void BM_spectrum(benchmark::State& state) {
  SignalTrace trace;
  trace.emitter = Role::hydrogen;
  Rng rng(7);
  const int n = static_cast<int>(state.range(0));
  for (int k = 1; k <= n; ++k) {
    trace.times.push_back(k * 1e-3);
    trace.values.push_back(rng.gaussian());
  }
  for (auto _ : state) benchmark::DoNotOptimize(spectrum(trace));
}
BENCHMARK(BM_spectrum)->Arg(240)->Arg(960);

}  // namespace

BENCHMARK_MAIN();
