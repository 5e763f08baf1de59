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

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace htnmr {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// Dense operators on tensor products of spin-1/2 sites. Site i maps to bit i
// of the computational-basis index (site 0 is the least significant bit).
// Hard cap so an 11-spin molecule fits in desk memory and time.
inline constexpr int kMaxSpins = 12;

enum class Axis { x, y, z };

struct SpinOperator {
  int dim = 0;      // 2^N
  Matrix entries;   // dimensionless
  bool hermitian = false;

  int n_spins() const;
};

struct DensityMatrix {
  int dim = 0;
  Matrix entries;

  int n_spins() const;
};

// Number of spins for a power-of-two dimension; throws ValidationError for
// anything else and CapacityError above kMaxSpins.
int spin_count_for_dim(int dim);

// I x ... x (sigma_axis / 2) x ... x I. Traceless, eigenvalues +-1/2.
SpinOperator embed_pauli(int system_size, int site, Axis axis);

// Unitary conjugation rho -> exp(-i H t) rho exp(+i H t). H in rad/s,
// duration in seconds. Hermitian eigendecomposition; purely diagonal
// Hamiltonians take a direct phase path.
DensityMatrix evolve(const DensityMatrix& rho, const SpinOperator& h, double duration);

// Instantaneous ideal rotation exp(-i angle sum_sites sigma_axis/2).
DensityMatrix apply_pulse(const DensityMatrix& rho, const std::vector<int>& sites, Axis axis,
                          double angle);

// Tr(rho O). The imaginary residue must stay below 1e-10 (checked).
double expectation(const DensityMatrix& rho, const SpinOperator& op);

DensityMatrix maximally_mixed(int n_spins);

// ---- low-level helpers shared with the protocol engine ----

// exp(-i angle sigma_axis / 2) on one site.
Eigen::Matrix2cd rotation2(Axis axis, double angle);

// m <- (U_site) m and m <- m (U_site)^dagger, applied in place in O(dim^2).
void apply_site_left(Matrix& m, int site, const Eigen::Matrix2cd& u);
void apply_site_right_dagger(Matrix& m, int site, const Eigen::Matrix2cd& u);

// exp(-i h t) for Hermitian h (dense path).
Matrix hermitian_propagator(const Matrix& h, double t);

bool approx_hermitian(const Matrix& m, double tol);
double min_eigenvalue(const Matrix& hermitian_matrix);

}  // namespace htnmr
