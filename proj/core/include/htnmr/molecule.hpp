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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "htnmr/spin_ops.hpp"

namespace htnmr {

enum class Role { hydrogen, target, other };

// eq:  same species and same chemical shift; the scalar coupling keeps its
//      full dot-product form.
// neq: distinct Larmor frequencies; the coupling reduces to its zz part.
// het: exactly one member is a (role) hydrogen; zz part only.
enum class PairClass { eq, neq, het };

struct Nucleus {
  std::string label;
  std::string species;  // isotope id, e.g. "1H", "13C"
  double gamma = 0.0;   // rad s^-1 T^-1
  double shift = 0.0;   // chemical shift, rad/s
  Role role = Role::other;
};

struct T2Times {
  double t2 = 0.0;       // s, pulse-refocused
  double t2_star = 0.0;  // s, inhomogeneously broadened
};

struct Environment {
  double b_field = 2.0;       // Tesla, > 0
  double temperature = 300.0; // Kelvin, > 0
};

struct Molecule {
  std::vector<Nucleus> nuclei;          // ordered; site index = position
  Eigen::MatrixXd couplings;            // symmetric, rad/s, zero diagonal
  std::map<std::string, T2Times> t2;    // per species

  int size() const { return static_cast<int>(nuclei.size()); }
  double coupling(int i, int j) const { return couplings(i, j); }
  std::vector<int> sites_with(Role role) const;
  const T2Times& t2_for(const std::string& species) const;
};

// Default gyromagnetic ratios, rad s^-1 T^-1. Overridable per nucleus with
// the gamma_hz_per_tesla key. Note that slightly different 1H values are in
// circulation (42.6 vs 42.57 MHz/T); the per-nucleus default uses 42.6.
double default_gamma(const std::string& species);

// Parses and validates a molecule document. Input frequencies are Hz
// (j_hz, shift_hz, gamma_hz_per_tesla); everything is stored in rad/s.
Molecule load_molecule(const nlohmann::json& doc);
Molecule load_molecule_file(const std::string& path);
Environment load_environment(const nlohmann::json& doc);
Environment load_environment_file(const std::string& path);

// Inverse of load_molecule up to float formatting; numeric fields round-trip
// to 1e-12 relative.
nlohmann::json serialize(const Molecule& molecule);

// hbar * gamma * B_z / (k_B * T), dimensionless.
double boltzmann_factor(double gamma, const Environment& env);

// First-order thermal state (1/2^N) (1 + sum_i B_i S_i^z), so each
// single-spin <S^z> equals B_i / 4.
DensityMatrix thermal_state(const Molecule& molecule, const Environment& env);

PairClass classify_pair(const Molecule& molecule, int i, int j);

// Seeded generator used by the validation harness: one hydrogen, one target,
// the rest "other" species, random couplings and shifts, no homonuclear
// hydrogen couplings.
Molecule random_molecule(std::uint64_t seed, int n_spins);

}  // namespace htnmr
