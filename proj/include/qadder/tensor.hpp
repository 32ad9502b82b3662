// Copyright 2026 The qadder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tensor-product space qutrit (x) cavity A (x) cavity B, and the dense
// operator/state types that live on it.

#pragma once

#include <array>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qadder {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

enum class Slot { Qutrit = 0, CavityA = 1, CavityB = 2 };
enum class Level { G = 0, E = 1, F = 2 };

std::string to_string(Slot slot);
std::string to_string(Level level);

// Factors always appear in the order qutrit, A, B.  A layout may omit factors
// (reduced layouts produced by partial traces).  Flat index of a full-layout
// basis vector is q*N_A*N_B + n*N_B + m.
class SpaceLayout {
 public:
  SpaceLayout(int fock_a, int fock_b);

  static SpaceLayout cavities(int fock_a, int fock_b);
  static SpaceLayout of(const std::vector<Slot>& slots, int fock_a, int fock_b);

  SpaceLayout reduced(const std::vector<Slot>& keep) const;

  int qutrit_dim() const { return 3; }
  int fock_a() const { return fock_a_; }
  int fock_b() const { return fock_b_; }
  bool has(Slot slot) const { return present_[static_cast<int>(slot)]; }
  bool is_full() const { return present_[0] && present_[1] && present_[2]; }
  int slot_dim(Slot slot) const;
  Index dim() const;
  std::vector<Slot> slots() const;

  // Full layouts only.
  Index index(int q, int n, int m) const;
  // Layouts with both cavities and no qutrit.
  Index cavity_index(int n, int m) const;

  std::string describe() const;

  friend bool operator==(const SpaceLayout& a, const SpaceLayout& b);

 private:
  SpaceLayout(std::array<bool, 3> present, int fock_a, int fock_b);

  std::array<bool, 3> present_;
  int fock_a_;
  int fock_b_;
};

void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* where);

class Operator {
 public:
  Operator(SpaceLayout layout, CMatrix matrix);

  static Operator zero(const SpaceLayout& layout);
  static Operator identity(const SpaceLayout& layout);

  const SpaceLayout& layout() const { return layout_; }
  const CMatrix& matrix() const { return matrix_; }

  Operator adjoint() const;
  // max |H - H^dagger|
  double hermiticity_deficit() const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_deficit() < tol; }

  Operator operator+(const Operator& rhs) const;
  Operator operator-(const Operator& rhs) const;
  Operator operator*(const Operator& rhs) const;
  Operator operator*(cplx s) const;
  friend Operator operator*(cplx s, const Operator& op) { return op * s; }

 private:
  SpaceLayout layout_;
  CMatrix matrix_;
};

Operator commutator(const Operator& x, const Operator& y);

class QuantumState {
 public:
  static QuantumState pure(SpaceLayout layout, CVector psi);
  static QuantumState density(SpaceLayout layout, CMatrix rho);

  const SpaceLayout& layout() const { return layout_; }
  bool is_pure() const { return std::holds_alternative<CVector>(repr_); }
  const CVector& vector() const;
  const CMatrix& matrix() const;
  // rho for either representation.
  CMatrix density_matrix() const;

  QuantumState normalized() const;
  double trace() const;

 private:
  QuantumState(SpaceLayout layout, std::variant<CVector, CMatrix> repr);

  SpaceLayout layout_;
  std::variant<CVector, CMatrix> repr_;
};

// Single-factor operators, before embedding.
CMatrix annihilation(int dim);
CMatrix number_operator(int dim);
CMatrix qutrit_transition(Level from, Level to);

Operator embed(const CMatrix& op, Slot slot, const SpaceLayout& layout);

// Single-mode states.
constexpr double kDefaultTailTolerance = 1e-12;
int minimal_coherent_dim(cplx amplitude, double tail_tol = kDefaultTailTolerance);
CVector coherent_state(cplx amplitude, int dim, double tail_tol = kDefaultTailTolerance);
CVector fock_state(int n, int dim);
CVector qutrit_state(Level level);

// |q> (x) |a> (x) |b> on a full layout.
CVector product_vector(const CVector& qutrit, const CVector& a, const CVector& b);
QuantumState product_state(const SpaceLayout& layout, const CVector& qutrit, const CVector& a,
                           const CVector& b);

// F = sqrt(<psi|rho|psi>).
double fidelity(const QuantumState& target, const QuantumState& rho);

QuantumState partial_trace(const QuantumState& state, const std::vector<Slot>& keep);

// Smallest eigenvalue of a hermitian matrix.
double min_eigenvalue(const CMatrix& rho);
double hermiticity_deficit(const CMatrix& m);

}  // namespace qadder
