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

#include "qadder/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "qadder/errors.hpp"

namespace qadder {

std::string to_string(Slot slot) {
  switch (slot) {
    case Slot::Qutrit:
      return "qutrit";
    case Slot::CavityA:
      return "cavityA";
    case Slot::CavityB:
      return "cavityB";
  }
  return "?";
}

std::string to_string(Level level) {
  switch (level) {
    case Level::G:
      return "g";
    case Level::E:
      return "e";
    case Level::F:
      return "f";
  }
  return "?";
}

SpaceLayout::SpaceLayout(int fock_a, int fock_b) : SpaceLayout({true, true, true}, fock_a, fock_b) {}

SpaceLayout::SpaceLayout(std::array<bool, 3> present, int fock_a, int fock_b)
    : present_(present), fock_a_(fock_a), fock_b_(fock_b) {
  if (!present_[0] && !present_[1] && !present_[2]) {
    throw InvalidDimensionError("layout must contain at least one factor");
  }
  if ((present_[1] && fock_a < 1) || (present_[2] && fock_b < 1)) {
    throw InvalidDimensionError("cavity truncation must be >= 1");
  }
  if (!present_[1]) fock_a_ = 0;
  if (!present_[2]) fock_b_ = 0;
}

SpaceLayout SpaceLayout::cavities(int fock_a, int fock_b) {
  return SpaceLayout({false, true, true}, fock_a, fock_b);
}

SpaceLayout SpaceLayout::of(const std::vector<Slot>& slots, int fock_a, int fock_b) {
  std::array<bool, 3> present{false, false, false};
  for (Slot s : slots) present[static_cast<int>(s)] = true;
  return SpaceLayout(present, fock_a, fock_b);
}

SpaceLayout SpaceLayout::reduced(const std::vector<Slot>& keep) const {
  if (keep.empty()) throw InvalidDimensionError("partial trace needs a non-empty keep set");
  std::array<bool, 3> present{false, false, false};
  for (Slot s : keep) {
    if (!has(s)) throw LayoutMismatchError("slot " + to_string(s) + " not in layout " + describe());
    present[static_cast<int>(s)] = true;
  }
  return SpaceLayout(present, fock_a_, fock_b_);
}

int SpaceLayout::slot_dim(Slot slot) const {
  if (!has(slot)) throw LayoutMismatchError("slot " + to_string(slot) + " not in layout " + describe());
  switch (slot) {
    case Slot::Qutrit:
      return 3;
    case Slot::CavityA:
      return fock_a_;
    case Slot::CavityB:
      return fock_b_;
  }
  return 0;
}

Index SpaceLayout::dim() const {
  Index d = 1;
  for (Slot s : slots()) d *= slot_dim(s);
  return d;
}

std::vector<Slot> SpaceLayout::slots() const {
  std::vector<Slot> out;
  for (int i = 0; i < 3; ++i) {
    if (present_[i]) out.push_back(static_cast<Slot>(i));
  }
  return out;
}

Index SpaceLayout::index(int q, int n, int m) const {
  if (!is_full()) throw LayoutMismatchError("index(q,n,m) needs a full layout");
  return (static_cast<Index>(q) * fock_a_ + n) * fock_b_ + m;
}

Index SpaceLayout::cavity_index(int n, int m) const {
  if (has(Slot::Qutrit) || !has(Slot::CavityA) || !has(Slot::CavityB)) {
    throw LayoutMismatchError("cavity_index needs an A (x) B layout");
  }
  return static_cast<Index>(n) * fock_b_ + m;
}

std::string SpaceLayout::describe() const {
  std::ostringstream os;
  bool first = true;
  for (Slot s : slots()) {
    if (!first) os << " x ";
    first = false;
    os << to_string(s) << "(" << slot_dim(s) << ")";
  }
  return os.str();
}

bool operator==(const SpaceLayout& a, const SpaceLayout& b) {
  return a.present_ == b.present_ && a.fock_a_ == b.fock_a_ && a.fock_b_ == b.fock_b_;
}

void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* where) {
  if (!(a == b)) {
    throw LayoutMismatchError(std::string(where) + ": layout " + a.describe() + " vs " + b.describe());
  }
}

Operator::Operator(SpaceLayout layout, CMatrix matrix) : layout_(layout), matrix_(std::move(matrix)) {
  const Index d = layout_.dim();
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw InvalidDimensionError("operator of size " + std::to_string(matrix_.rows()) + "x" +
                                std::to_string(matrix_.cols()) + " does not match layout " +
                                layout_.describe());
  }
}

Operator Operator::zero(const SpaceLayout& layout) {
  return Operator(layout, CMatrix::Zero(layout.dim(), layout.dim()));
}

Operator Operator::identity(const SpaceLayout& layout) {
  return Operator(layout, CMatrix::Identity(layout.dim(), layout.dim()));
}

Operator Operator::adjoint() const { return Operator(layout_, matrix_.adjoint()); }

double Operator::hermiticity_deficit() const { return qadder::hermiticity_deficit(matrix_); }

Operator Operator::operator+(const Operator& rhs) const {
  require_same_layout(layout_, rhs.layout_, "operator+");
  return Operator(layout_, matrix_ + rhs.matrix_);
}

Operator Operator::operator-(const Operator& rhs) const {
  require_same_layout(layout_, rhs.layout_, "operator-");
  return Operator(layout_, matrix_ - rhs.matrix_);
}

Operator Operator::operator*(const Operator& rhs) const {
  require_same_layout(layout_, rhs.layout_, "operator*");
  return Operator(layout_, matrix_ * rhs.matrix_);
}

Operator Operator::operator*(cplx s) const { return Operator(layout_, matrix_ * s); }

Operator commutator(const Operator& x, const Operator& y) { return x * y - y * x; }

QuantumState::QuantumState(SpaceLayout layout, std::variant<CVector, CMatrix> repr)
    : layout_(layout), repr_(std::move(repr)) {}

QuantumState QuantumState::pure(SpaceLayout layout, CVector psi) {
  if (psi.size() != layout.dim()) {
    throw InvalidDimensionError("state vector of size " + std::to_string(psi.size()) +
                                " does not match layout " + layout.describe());
  }
  return QuantumState(layout, std::move(psi));
}

QuantumState QuantumState::density(SpaceLayout layout, CMatrix rho) {
  if (rho.rows() != layout.dim() || rho.cols() != layout.dim()) {
    throw InvalidDimensionError("density matrix does not match layout " + layout.describe());
  }
  return QuantumState(layout, std::move(rho));
}

const CVector& QuantumState::vector() const {
  if (!is_pure()) throw Error("state is not held as a pure vector");
  return std::get<CVector>(repr_);
}

const CMatrix& QuantumState::matrix() const {
  if (is_pure()) throw Error("state is not held as a density matrix");
  return std::get<CMatrix>(repr_);
}

CMatrix QuantumState::density_matrix() const {
  if (is_pure()) {
    const CVector& v = std::get<CVector>(repr_);
    return v * v.adjoint();
  }
  return std::get<CMatrix>(repr_);
}

QuantumState QuantumState::normalized() const {
  if (is_pure()) {
    const CVector& v = std::get<CVector>(repr_);
    const double n = v.norm();
    if (n == 0.0) throw Error("cannot normalize a zero vector");
    return pure(layout_, v / n);
  }
  const CMatrix& m = std::get<CMatrix>(repr_);
  const double tr = m.trace().real();
  if (tr == 0.0) throw Error("cannot normalize a traceless density matrix");
  return density(layout_, m / tr);
}

double QuantumState::trace() const {
  if (is_pure()) return std::get<CVector>(repr_).squaredNorm();
  return std::get<CMatrix>(repr_).trace().real();
}

CMatrix annihilation(int dim) {
  if (dim < 1) throw InvalidDimensionError("mode dimension must be >= 1");
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

CMatrix number_operator(int dim) {
  if (dim < 1) throw InvalidDimensionError("mode dimension must be >= 1");
  CMatrix n = CMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

CMatrix qutrit_transition(Level from, Level to) {
  CMatrix s = CMatrix::Zero(3, 3);
  s(static_cast<int>(to), static_cast<int>(from)) = 1.0;
  return s;
}

Operator embed(const CMatrix& op, Slot slot, const SpaceLayout& layout) {
  const int d = layout.slot_dim(slot);
  if (op.rows() != d || op.cols() != d) {
    throw InvalidDimensionError("operator of size " + std::to_string(op.rows()) +
                                " cannot act on slot " + to_string(slot) + " of dimension " +
                                std::to_string(d));
  }
  CMatrix acc = CMatrix::Identity(1, 1);
  for (Slot s : layout.slots()) {
    const CMatrix factor = (s == slot) ? op : CMatrix::Identity(layout.slot_dim(s), layout.slot_dim(s));
    CMatrix next = Eigen::kroneckerProduct(acc, factor).eval();
    acc = std::move(next);
  }
  return Operator(layout, std::move(acc));
}

namespace {

// log of e^{-|a|^2} |a|^{2n} / n!
double log_poisson(double mean, int n) {
  if (mean == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return -mean + n * std::log(mean) - std::lgamma(n + 1.0);
}

double coherent_tail(double mean, int dim) {
  // Summing the tail directly avoids cancellation in 1 - head.
  double tail = 0.0;
  for (int n = dim; n < dim + 400; ++n) {
    const double term = std::exp(log_poisson(mean, n));
    tail += term;
    if (n > mean && term < 1e-300) break;
  }
  return tail;
}

}  // namespace

int minimal_coherent_dim(cplx amplitude, double tail_tol) {
  const double mean = std::norm(amplitude);
  int dim = 1;
  while (coherent_tail(mean, dim) >= tail_tol) ++dim;
  return dim;
}

CVector coherent_state(cplx amplitude, int dim, double tail_tol) {
  if (dim < 1) throw InvalidDimensionError("mode dimension must be >= 1");
  const double mean = std::norm(amplitude);
  if (coherent_tail(mean, dim) >= tail_tol) {
    const int need = minimal_coherent_dim(amplitude, tail_tol);
    throw TruncationTooSmallError("coherent state |" + std::to_string(std::abs(amplitude)) +
                                      "| needs truncation >= " + std::to_string(need),
                                  need);
  }
  CVector v(dim);
  cplx c = std::exp(-0.5 * mean);
  for (int n = 0; n < dim; ++n) {
    v(n) = c;
    c *= amplitude / std::sqrt(static_cast<double>(n + 1));
  }
  return v / v.norm();
}

CVector fock_state(int n, int dim) {
  if (n < 0 || n >= dim) throw TruncationTooSmallError("Fock state |" + std::to_string(n) +
                                                           "> needs truncation >= " + std::to_string(n + 1),
                                                       n + 1);
  CVector v = CVector::Zero(dim);
  v(n) = 1.0;
  return v;
}

CVector qutrit_state(Level level) {
  CVector v = CVector::Zero(3);
  v(static_cast<int>(level)) = 1.0;
  return v;
}

CVector product_vector(const CVector& qutrit, const CVector& a, const CVector& b) {
  CVector ab = Eigen::kroneckerProduct(a, b).eval();
  return Eigen::kroneckerProduct(qutrit, ab).eval();
}

QuantumState product_state(const SpaceLayout& layout, const CVector& qutrit, const CVector& a,
                           const CVector& b) {
  if (qutrit.size() != 3 || a.size() != layout.fock_a() || b.size() != layout.fock_b()) {
    throw InvalidDimensionError("product state factors do not match layout " + layout.describe());
  }
  return QuantumState::pure(layout, product_vector(qutrit, a, b));
}

double fidelity(const QuantumState& target, const QuantumState& rho) {
  require_same_layout(target.layout(), rho.layout(), "fidelity");
  const CVector& psi = target.vector();
  double value;
  if (rho.is_pure()) {
    value = std::norm(psi.dot(rho.vector()));
  } else {
    value = psi.dot(rho.matrix() * psi).real();
  }
  constexpr double kSlack = 1e-8;
  if (value < -kSlack || value > 1.0 + kSlack) {
    throw NumericalPositivityError("<psi|rho|psi> = " + std::to_string(value) + " outside [0,1]");
  }
  return std::sqrt(std::clamp(value, 0.0, 1.0));
}

QuantumState partial_trace(const QuantumState& state, const std::vector<Slot>& keep) {
  const SpaceLayout& full = state.layout();
  const SpaceLayout out_layout = full.reduced(keep);
  const std::vector<Slot> slots = full.slots();
  const int k = static_cast<int>(slots.size());

  std::vector<int> dims(k);
  std::vector<bool> kept(k);
  for (int i = 0; i < k; ++i) {
    dims[i] = full.slot_dim(slots[i]);
    kept[i] = out_layout.has(slots[i]);
  }
  Index dk = 1;
  Index dt = 1;
  for (int i = 0; i < k; ++i) (kept[i] ? dk : dt) *= dims[i];

  // Map (kept index, traced index) -> full index.
  std::vector<Index> full_of(dk * dt);
  for (Index f = 0; f < full.dim(); ++f) {
    Index rem = f;
    Index ik = 0, it = 0, sk = 1, st = 1;
    for (int i = k - 1; i >= 0; --i) {
      const Index digit = rem % dims[i];
      rem /= dims[i];
      if (kept[i]) {
        ik += digit * sk;
        sk *= dims[i];
      } else {
        it += digit * st;
        st *= dims[i];
      }
    }
    full_of[ik * dt + it] = f;
  }

  CMatrix out = CMatrix::Zero(dk, dk);
  if (state.is_pure()) {
    const CVector& v = state.vector();
    CMatrix m(dk, dt);
    for (Index i = 0; i < dk; ++i)
      for (Index t = 0; t < dt; ++t) m(i, t) = v(full_of[i * dt + t]);
    out = m * m.adjoint();
  } else {
    const CMatrix& rho = state.matrix();
    for (Index j = 0; j < dk; ++j)
      for (Index i = 0; i < dk; ++i) {
        cplx acc = 0.0;
        for (Index t = 0; t < dt; ++t) acc += rho(full_of[i * dt + t], full_of[j * dt + t]);
        out(i, j) = acc;
      }
  }
  return QuantumState::density(out_layout, std::move(out));
}

double min_eigenvalue(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double hermiticity_deficit(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace qadder
