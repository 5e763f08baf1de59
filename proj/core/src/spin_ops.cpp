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

#include "htnmr/spin_ops.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "htnmr/errors.hpp"

namespace htnmr {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_site_range(int system_size, int site) {
  if (system_size < 1) throw ValidationError("system_size must be positive");
  if (system_size > kMaxSpins)
    throw CapacityError("system of " + std::to_string(system_size) + " spins exceeds the cap of " +
                        std::to_string(kMaxSpins));
  if (site < 0 || site >= system_size)
    throw ValidationError("site " + std::to_string(site) + " out of range for " +
                          std::to_string(system_size) + " spins");
}

bool is_diagonal(const Matrix& m, double tol) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (r != c && std::abs(m(r, c)) > tol) return false;
  return true;
}

}  // namespace

int SpinOperator::n_spins() const { return spin_count_for_dim(dim); }
int DensityMatrix::n_spins() const { return spin_count_for_dim(dim); }

int spin_count_for_dim(int dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw ValidationError("operator dimension " + std::to_string(dim) + " is not a power of two");
  int n = 0;
  for (int d = dim; d > 1; d >>= 1) ++n;
  if (n > kMaxSpins) throw CapacityError("dimension exceeds the " + std::to_string(kMaxSpins) + "-spin cap");
  return n;
}

SpinOperator embed_pauli(int system_size, int site, Axis axis) {
  check_site_range(system_size, site);
  const int dim = 1 << system_size;
  const int bit = 1 << site;
  Matrix m = Matrix::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    switch (axis) {
      case Axis::z:
        m(a, a) = (a & bit) ? Complex(-0.5, 0.0) : Complex(0.5, 0.0);
        break;
      case Axis::x:
        m(a ^ bit, a) = Complex(0.5, 0.0);
        break;
      case Axis::y:
        // sigma_y/2: |1><0| carries +i/2, |0><1| carries -i/2.
        m(a ^ bit, a) = (a & bit) ? Complex(0.0, -0.5) : Complex(0.0, 0.5);
        break;
    }
  }
  return SpinOperator{dim, std::move(m), true};
}

Eigen::Matrix2cd rotation2(Axis axis, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  Eigen::Matrix2cd u;
  switch (axis) {
    case Axis::x:
      u << Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0);
      break;
    case Axis::y:
      u << Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0);
      break;
    case Axis::z:
      u << Complex(c, -s), Complex(0, 0), Complex(0, 0), Complex(c, s);
      break;
  }
  return u;
}

void apply_site_left(Matrix& m, int site, const Eigen::Matrix2cd& u) {
  const Eigen::Index dim = m.rows();
  const Eigen::Index bit = Eigen::Index(1) << site;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index a = 0; a < dim; ++a) {
      if (a & bit) continue;
      const Complex m0 = m(a, c);
      const Complex m1 = m(a | bit, c);
      m(a, c) = u(0, 0) * m0 + u(0, 1) * m1;
      m(a | bit, c) = u(1, 0) * m0 + u(1, 1) * m1;
    }
  }
}

void apply_site_right_dagger(Matrix& m, int site, const Eigen::Matrix2cd& u) {
  const Eigen::Index dim = m.cols();
  const Eigen::Index bit = Eigen::Index(1) << site;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      if (b & bit) continue;
      const Complex m0 = m(r, b);
      const Complex m1 = m(r, b | bit);
      m(r, b) = m0 * std::conj(u(0, 0)) + m1 * std::conj(u(0, 1));
      m(r, b | bit) = m0 * std::conj(u(1, 0)) + m1 * std::conj(u(1, 1));
    }
  }
}

bool approx_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_eigenvalue(const Matrix& hermitian_matrix) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_matrix, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix hermitian_propagator(const Matrix& h, double t) {
  const Eigen::Index dim = h.rows();
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (is_diagonal(h, 1e-14 * scale)) {
    Matrix u = Matrix::Zero(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a)
      u(a, a) = std::exp(-kI * h(a, a).real() * t);
    return u;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd evals = es.eigenvalues();
  Eigen::VectorXcd phases(dim);
  for (Eigen::Index a = 0; a < dim; ++a) phases(a) = std::exp(-kI * evals(a) * t);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DensityMatrix evolve(const DensityMatrix& rho, const SpinOperator& h, double duration) {
  if (rho.dim != h.dim) throw ValidationError("evolve: dimension mismatch");
  if (duration < 0.0) throw ValidationError("evolve: negative duration");
  if (!h.hermitian || !approx_hermitian(h.entries, 1e-12))
    throw ValidationError("evolve: Hamiltonian is not Hermitian");
  const double scale = std::max(1.0, h.entries.cwiseAbs().maxCoeff());
  if (is_diagonal(h.entries, 1e-14 * scale)) {
    DensityMatrix out{rho.dim, rho.entries};
    for (Eigen::Index b = 0; b < rho.dim; ++b) {
      const Complex pb = std::exp(kI * h.entries(b, b).real() * duration);
      for (Eigen::Index a = 0; a < rho.dim; ++a) {
        const Complex pa = std::exp(-kI * h.entries(a, a).real() * duration);
        out.entries(a, b) *= pa * pb;
      }
    }
    return out;
  }
  const Matrix u = hermitian_propagator(h.entries, duration);
  return DensityMatrix{rho.dim, u * rho.entries * u.adjoint()};
}

DensityMatrix apply_pulse(const DensityMatrix& rho, const std::vector<int>& sites, Axis axis,
                          double angle) {
  if (sites.empty()) throw ValidationError("apply_pulse: empty site set");
  const int n = rho.n_spins();
  std::set<int> seen;
  for (int s : sites) {
    if (s < 0 || s >= n) throw ValidationError("apply_pulse: site out of range");
    if (!seen.insert(s).second) throw ValidationError("apply_pulse: duplicate site");
  }
  const Eigen::Matrix2cd u = rotation2(axis, angle);
  DensityMatrix out{rho.dim, rho.entries};
  for (int s : sites) {
    apply_site_left(out.entries, s, u);
    apply_site_right_dagger(out.entries, s, u);
  }
  return out;
}

double expectation(const DensityMatrix& rho, const SpinOperator& op) {
  if (rho.dim != op.dim) throw ValidationError("expectation: dimension mismatch");
  if (!op.hermitian) throw ValidationError("expectation: observable must be Hermitian");
  const Complex tr = (rho.entries * op.entries).trace();
  if (std::abs(tr.imag()) > 1e-10 * std::max(1.0, std::abs(tr.real())) + 1e-10)
    throw NumericalError("expectation: imaginary residue above tolerance");
  return tr.real();
}

DensityMatrix maximally_mixed(int n_spins) {
  if (n_spins < 1 || n_spins > kMaxSpins) throw CapacityError("maximally_mixed: bad spin count");
  const int dim = 1 << n_spins;
  return DensityMatrix{dim, Matrix::Identity(dim, dim) / static_cast<double>(dim)};
}

}  // namespace htnmr
