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

#include "htnmr/molecule.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "htnmr/errors.hpp"
#include "htnmr/rng.hpp"

namespace htnmr {

namespace {

constexpr double kHbar = 1.054571817e-34;  // J s
constexpr double kBoltzmann = 1.380649e-23;  // J / K
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Role role_from_string(const std::string& s) {
  if (s == "hydrogen") return Role::hydrogen;
  if (s == "target") return Role::target;
  if (s == "other") return Role::other;
  throw ValidationError("unknown role '" + s + "'");
}

std::string role_to_string(Role r) {
  switch (r) {
    case Role::hydrogen: return "hydrogen";
    case Role::target: return "target";
    case Role::other: return "other";
  }
  return "other";
}

int site_by_label(const Molecule& m, const std::string& label) {
  for (int i = 0; i < m.size(); ++i)
    if (m.nuclei[i].label == label) return i;
  throw ValidationError("coupling references unknown nucleus '" + label + "'");
}

}  // namespace

std::vector<int> Molecule::sites_with(Role role) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (nuclei[i].role == role) out.push_back(i);
  return out;
}

const T2Times& Molecule::t2_for(const std::string& species) const {
  auto it = t2.find(species);
  if (it == t2.end()) throw ValidationError("no T2 entry for species '" + species + "'");
  return it->second;
}

double default_gamma(const std::string& species) {
  if (species == "1H") return kTwoPi * 42.6e6;
  if (species == "13C") return kTwoPi * 10.7e6;
  if (species == "15N") return -kTwoPi * 4.3e6;
  if (species == "31P") return kTwoPi * 17.235e6;
  if (species == "19F") return kTwoPi * 40.05e6;
  throw ValidationError("unknown species id '" + species + "' and no gamma_hz_per_tesla given");
}

Molecule load_molecule(const nlohmann::json& doc) {
  if (!doc.contains("nuclei") || !doc["nuclei"].is_array())
    throw ValidationError("molecule document needs a 'nuclei' list");
  Molecule m;
  for (const auto& jn : doc["nuclei"]) {
    Nucleus n;
    n.label = jn.at("label").get<std::string>();
    n.species = jn.at("species").get<std::string>();
    n.shift = kTwoPi * jn.value("shift_hz", 0.0);
    n.role = role_from_string(jn.at("role").get<std::string>());
    if (jn.contains("gamma_hz_per_tesla"))
      n.gamma = kTwoPi * jn["gamma_hz_per_tesla"].get<double>();
    else
      n.gamma = default_gamma(n.species);
    if (n.gamma == 0.0) throw ValidationError("nucleus '" + n.label + "' has zero gamma");
    for (const auto& seen : m.nuclei)
      if (seen.label == n.label) throw ValidationError("duplicate nucleus label '" + n.label + "'");
    m.nuclei.push_back(std::move(n));
  }
  if (m.nuclei.empty()) throw ValidationError("molecule has no nuclei");
  if (m.size() > kMaxSpins)
    throw CapacityError("molecule has " + std::to_string(m.size()) + " spins, cap is " +
                        std::to_string(kMaxSpins));

  m.couplings = Eigen::MatrixXd::Zero(m.size(), m.size());
  if (doc.contains("couplings")) {
    for (const auto& jc : doc["couplings"]) {
      const int a = site_by_label(m, jc.at("a").get<std::string>());
      const int b = site_by_label(m, jc.at("b").get<std::string>());
      if (a == b) throw ValidationError("self-coupling on '" + m.nuclei[a].label + "'");
      const double j = kTwoPi * jc.at("j_hz").get<double>();
      if (m.couplings(a, b) != 0.0 && m.couplings(a, b) != j)
        throw ValidationError("conflicting duplicate coupling between '" + m.nuclei[a].label +
                              "' and '" + m.nuclei[b].label + "'");
      m.couplings(a, b) = j;
      m.couplings(b, a) = j;
    }
  }

  if (doc.contains("t2")) {
    for (auto it = doc["t2"].begin(); it != doc["t2"].end(); ++it) {
      T2Times t;
      t.t2 = it.value().at("t2_s").get<double>();
      t.t2_star = it.value().at("t2_star_s").get<double>();
      if (t.t2 <= 0.0 || t.t2_star <= 0.0)
        throw ValidationError("non-positive T2 for species '" + it.key() + "'");
      m.t2[it.key()] = t;
    }
  }
  return m;
}

Molecule load_molecule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open molecule file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed molecule document '" + path + "': " + e.what());
  }
  return load_molecule(doc);
}

Environment load_environment(const nlohmann::json& doc) {
  Environment env;
  const auto& je = doc.contains("environment") ? doc["environment"] : doc;
  env.b_field = je.at("b_tesla").get<double>();
  env.temperature = je.at("temperature_k").get<double>();
  if (env.b_field <= 0.0) throw ValidationError("b_tesla must be positive");
  if (env.temperature <= 0.0) throw ValidationError("temperature_k must be positive");
  return env;
}

Environment load_environment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file '" + path + "'");
  nlohmann::json doc;
  in >> doc;
  return load_environment(doc);
}

nlohmann::json serialize(const Molecule& m) {
  nlohmann::json doc;
  doc["nuclei"] = nlohmann::json::array();
  for (const auto& n : m.nuclei) {
    doc["nuclei"].push_back({{"label", n.label},
                             {"species", n.species},
                             {"gamma_hz_per_tesla", n.gamma / kTwoPi},
                             {"shift_hz", n.shift / kTwoPi},
                             {"role", role_to_string(n.role)}});
  }
  doc["couplings"] = nlohmann::json::array();
  for (int i = 0; i < m.size(); ++i)
    for (int j = i + 1; j < m.size(); ++j)
      if (m.couplings(i, j) != 0.0)
        doc["couplings"].push_back(
            {{"a", m.nuclei[i].label}, {"b", m.nuclei[j].label}, {"j_hz", m.couplings(i, j) / kTwoPi}});
  doc["t2"] = nlohmann::json::object();
  for (const auto& [species, t] : m.t2)
    doc["t2"][species] = {{"t2_s", t.t2}, {"t2_star_s", t.t2_star}};
  return doc;
}

double boltzmann_factor(double gamma, const Environment& env) {
  if (env.b_field <= 0.0 || env.temperature <= 0.0)
    throw ValidationError("invalid environment");
  return kHbar * gamma * env.b_field / (kBoltzmann * env.temperature);
}

DensityMatrix thermal_state(const Molecule& molecule, const Environment& env) {
  const int n = molecule.size();
  if (n > kMaxSpins) throw CapacityError("molecule exceeds spin cap");
  const int dim = 1 << n;
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = boltzmann_factor(molecule.nuclei[i].gamma, env);
  Matrix rho = Matrix::Zero(dim, dim);
  const double norm = 1.0 / static_cast<double>(dim);
  for (int a = 0; a < dim; ++a) {
    double dev = 0.0;
    for (int i = 0; i < n; ++i) dev += b[i] * ((a >> i) & 1 ? -0.5 : 0.5);
    rho(a, a) = norm * (1.0 + dev);
  }
  return DensityMatrix{dim, std::move(rho)};
}

PairClass classify_pair(const Molecule& m, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= m.size() || j >= m.size())
    throw ValidationError("classify_pair: bad site pair");
  const Nucleus& a = m.nuclei[i];
  const Nucleus& b = m.nuclei[j];
  const bool ha = a.role == Role::hydrogen;
  const bool hb = b.role == Role::hydrogen;
  if (ha != hb) return PairClass::het;
  if (a.species == b.species && a.shift == b.shift) return PairClass::eq;
  return PairClass::neq;
}

Molecule random_molecule(std::uint64_t seed, int n_spins) {
  if (n_spins < 2 || n_spins > 4)
    throw ValidationError("random_molecule supports 2..4 spins");
  Rng rng(seed);
  Molecule m;
  const char* species_pool[] = {"13C", "15N", "31P"};
  for (int i = 0; i < n_spins; ++i) {
    Nucleus n;
    if (i == 0) {
      n.label = "H1";
      n.species = "1H";
      n.role = Role::hydrogen;
    } else if (i == 1) {
      n.label = "T1";
      n.species = "13C";
      n.role = Role::target;
    } else {
      n.label = "X" + std::to_string(i - 1);
      n.species = species_pool[(i - 2 + 1) % 3];  // skip a second 13C with equal shift risk
      n.role = Role::other;
    }
    n.gamma = default_gamma(n.species);
    n.shift = kTwoPi * rng.uniform(-60.0, 60.0);
    m.nuclei.push_back(std::move(n));
  }
  m.couplings = Eigen::MatrixXd::Zero(n_spins, n_spins);
  for (int i = 0; i < n_spins; ++i) {
    for (int j = i + 1; j < n_spins; ++j) {
      double j_hz = 0.0;
      if (i == 0 && j == 1) j_hz = rng.uniform(150.0, 350.0);      // hydrogen-target
      else if (i == 0) j_hz = rng.uniform(-30.0, 30.0);            // hydrogen-other
      else if (i == 1) j_hz = rng.uniform(-40.0, 40.0);            // target-other
      else j_hz = rng.uniform(-20.0, 20.0);                        // other-other
      m.couplings(i, j) = m.couplings(j, i) = kTwoPi * j_hz;
    }
  }
  m.t2["1H"] = {1.0, 1.0};
  m.t2["13C"] = {4.0, 0.4};
  m.t2["15N"] = {6.0, 6.0};
  m.t2["31P"] = {6.0, 6.0};
  return m;
}

}  // namespace htnmr
