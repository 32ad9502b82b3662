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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qadder/errors.hpp"
#include "qadder/tensor.hpp"
#include "test_util.hpp"

namespace qadder {
namespace {

using testing::max_abs;
using testing::random_density;
using testing::random_vector;

TEST(Annihilation, LowersFockStates) {
  const CMatrix a = annihilation(3);
  const CVector lowered = a * fock_state(2, 3);
  EXPECT_NEAR(std::abs(lowered(1) - std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(lowered(0).real(), 0.0, 0.0);
  EXPECT_EQ((a * fock_state(0, 3)).norm(), 0.0);
}

TEST(Annihilation, NumberOperatorDiagonal) {
  const CMatrix a = annihilation(3);
  const CMatrix n = a.adjoint() * a;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(n(i, i) - double(i)), 0.0, 1e-15);
  EXPECT_NEAR(max_abs(n - number_operator(3)), 0.0, 1e-15);
}

TEST(Annihilation, TruncatedCommutatorCorner) {
  const CMatrix a = annihilation(8);
  const CMatrix comm = a * a.adjoint() - a.adjoint() * a;
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(std::abs(comm(i, i) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(comm(7, 7) + 7.0), 0.0, 1e-14);
  CMatrix off = comm;
  off.diagonal().setZero();
  EXPECT_EQ(max_abs(off), 0.0);
}

TEST(Annihilation, ZeroDimensionRejected) { EXPECT_THROW(annihilation(0), InvalidDimensionError); }

TEST(QutritTransition, RaisingAndProjector) {
  const CMatrix up = qutrit_transition(Level::G, Level::E);
  CMatrix want = CMatrix::Zero(3, 3);
  want(1, 0) = 1.0;
  EXPECT_EQ(max_abs(up - want), 0.0);
  const CMatrix pe = qutrit_transition(Level::E, Level::E);
  want.setZero();
  want(1, 1) = 1.0;
  EXPECT_EQ(max_abs(pe - want), 0.0);
}

TEST(QutritTransition, SigmaZEigenvalues) {
  const CMatrix sz = qutrit_transition(Level::E, Level::E) - qutrit_transition(Level::G, Level::G);
  EXPECT_EQ(sz(0, 0), cplx(-1.0));
  EXPECT_EQ(sz(1, 1), cplx(1.0));
  EXPECT_EQ(sz(2, 2), cplx(0.0));
}

TEST(Embed, DistinctFactorsCommute) {
  const SpaceLayout L(4, 5);
  const Operator a = embed(annihilation(4), Slot::CavityA, L);
  const Operator b = embed(annihilation(5), Slot::CavityB, L);
  EXPECT_LT(max_abs(commutator(a, b).matrix()), 1e-14);
  EXPECT_LT(max_abs(commutator(a, b.adjoint()).matrix()), 1e-14);
}

TEST(Embed, QutritIdentityIsIdentity) {
  const SpaceLayout L(3, 4);
  const Operator id = embed(CMatrix::Identity(3, 3), Slot::Qutrit, L);
  EXPECT_EQ(max_abs(id.matrix() - CMatrix::Identity(L.dim(), L.dim())), 0.0);
}

TEST(Embed, NumberOperatorTrace) {
  const int na = 6, nb = 4;
  const SpaceLayout L(na, nb);
  const Operator n = embed(number_operator(na), Slot::CavityA, L);
  double expected = 0.0;
  for (int k = 0; k < na; ++k) expected += 3.0 * nb * k;
  EXPECT_NEAR(n.matrix().trace().real(), expected, 1e-12);
}

TEST(Embed, RespectsProducts) {
  std::mt19937 rng(7);
  const SpaceLayout L(3, 4);
  const CMatrix x = testing::random_matrix(rng, 4);
  const CMatrix y = testing::random_matrix(rng, 4);
  const Operator lhs = embed(x * y, Slot::CavityB, L);
  const Operator rhs = embed(x, Slot::CavityB, L) * embed(y, Slot::CavityB, L);
  EXPECT_LT(max_abs(lhs.matrix() - rhs.matrix()), 1e-13);
}

TEST(Embed, IndexOrderingIsQutritMajor) {
  const SpaceLayout L(4, 5);
  const Operator a = embed(annihilation(4), Slot::CavityA, L);
  // a |e, 2, 3> = sqrt2 |e, 1, 3>
  CVector v = CVector::Zero(L.dim());
  v(1 * 20 + 2 * 5 + 3) = 1.0;
  const CVector w = a.matrix() * v;
  EXPECT_NEAR(std::abs(w(1 * 20 + 1 * 5 + 3) - std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_EQ(L.index(1, 1, 3), 1 * 20 + 1 * 5 + 3);
}

TEST(Embed, DimensionMismatchRejected) {
  const SpaceLayout L(4, 5);
  EXPECT_THROW(embed(annihilation(5), Slot::CavityA, L), InvalidDimensionError);
}

TEST(Operator, CrossLayoutRejected) {
  const Operator x = Operator::identity(SpaceLayout(3, 3));
  const Operator y = Operator::identity(SpaceLayout(3, 4));
  EXPECT_THROW(x + y, LayoutMismatchError);
  EXPECT_THROW(x * y, LayoutMismatchError);
}

TEST(CoherentState, ZeroAmplitudeIsVacuum) {
  const CVector v = coherent_state(0.0, 6);
  EXPECT_EQ(max_abs(v - fock_state(0, 6)), 0.0);
}

TEST(CoherentState, MeanPhotonNumber) {
  const CVector v = coherent_state(0.1, 8);
  const double n = (v.adjoint() * number_operator(8) * v)(0).real();
  EXPECT_NEAR(n, 0.01, 1e-10);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
}

TEST(CoherentState, OverlapOfOppositeAmplitudes) {
  const double got = std::abs(coherent_state(0.1, 8).dot(coherent_state(-0.1, 8)));
  EXPECT_NEAR(got, std::exp(-2.0 * 0.01), 1e-9);
  EXPECT_NEAR(got, 0.980199, 1e-6);
}

TEST(CoherentState, TailToleranceNamesMinimalDimension) {
  // Independent tail sum sum_{n >= d} e^{-|a|^2} |a|^{2n} / n!.
  const double amp = 2.0;
  auto tail = [&](int d) {
    double s = 0.0;
    for (int n = d; n < 300; ++n) s += std::exp(-amp * amp + 2.0 * n * std::log(amp) - std::lgamma(n + 1.0));
    return s;
  };
  int want = 1;
  while (tail(want) >= 1e-12) ++want;
  try {
    coherent_state(amp, 5);
    FAIL() << "expected truncation error";
  } catch (const TruncationTooSmallError& e) {
    EXPECT_EQ(e.minimal_dim(), want);
  }
  EXPECT_NO_THROW(coherent_state(amp, want));
}

TEST(Fidelity, PureStateWithItself) {
  std::mt19937 rng(11);
  const SpaceLayout L(2, 3);
  for (int i = 0; i < 100; ++i) {
    const CVector v = random_vector(rng, L.dim());
    const auto target = QuantumState::pure(L, v);
    EXPECT_NEAR(fidelity(target, QuantumState::density(L, v * v.adjoint())), 1.0, 1e-10);
  }
}

TEST(Fidelity, OrthogonalAndMixture) {
  const SpaceLayout L(2, 2);
  CVector psi = CVector::Zero(L.dim());
  CVector phi = CVector::Zero(L.dim());
  psi(0) = 1.0;
  phi(5) = 1.0;
  const auto target = QuantumState::pure(L, psi);
  EXPECT_EQ(fidelity(target, QuantumState::density(L, phi * phi.adjoint())), 0.0);
  const CMatrix mix = 0.5 * psi * psi.adjoint() + 0.5 * phi * phi.adjoint();
  EXPECT_NEAR(fidelity(target, QuantumState::density(L, mix)), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Fidelity, RejectsClearlyNegativeOverlap) {
  const SpaceLayout L(1, 1);
  CVector psi = CVector::Zero(3);
  psi(0) = 1.0;
  CMatrix rho = CMatrix::Zero(3, 3);
  rho(0, 0) = -1e-6;
  rho(1, 1) = 1.0 + 1e-6;
  EXPECT_THROW(fidelity(QuantumState::pure(L, psi), QuantumState::density(L, rho)), NumericalPositivityError);
  rho(0, 0) = -1e-10;
  rho(1, 1) = 1.0 + 1e-10;
  EXPECT_EQ(fidelity(QuantumState::pure(L, psi), QuantumState::density(L, rho)), 0.0);
}

TEST(Fidelity, LayoutMismatch) {
  const SpaceLayout a(2, 2), b(2, 3);
  EXPECT_THROW(fidelity(QuantumState::pure(a, fock_state(0, static_cast<int>(a.dim()))),
                        QuantumState::pure(b, fock_state(0, static_cast<int>(b.dim())))),
               LayoutMismatchError);
}

TEST(PartialTrace, ProductStateKeepsFactor) {
  std::mt19937 rng(3);
  const SpaceLayout L(3, 4);
  const CVector q = random_vector(rng, 3);
  const CVector a = random_vector(rng, 3);
  const CVector b = random_vector(rng, 4);
  const auto rho = product_state(L, q, a, b);
  const QuantumState ra = partial_trace(rho, {Slot::CavityA});
  EXPECT_LT(max_abs(ra.density_matrix() - a * a.adjoint()), 1e-14);
  EXPECT_EQ(ra.layout().dim(), 3);
}

TEST(PartialTrace, EntangledPairIsMaximallyMixed) {
  const SpaceLayout L = SpaceLayout::of({Slot::Qutrit, Slot::CavityA}, 2, 1);
  CVector v = CVector::Zero(L.dim());
  v(0 * 2 + 0) = 1.0 / std::sqrt(2.0);  // |g,0>
  v(1 * 2 + 1) = 1.0 / std::sqrt(2.0);  // |e,1>
  const QuantumState ra = partial_trace(QuantumState::pure(L, v), {Slot::CavityA});
  CMatrix want = CMatrix::Zero(2, 2);
  want(0, 0) = want(1, 1) = 0.5;
  EXPECT_LT(max_abs(ra.density_matrix() - want), 1e-15);
}

TEST(PartialTrace, TracePreservingAndPositive) {
  std::mt19937 rng(5);
  const SpaceLayout L(3, 3);
  for (int i = 0; i < 20; ++i) {
    const CMatrix rho = random_density(rng, L.dim(), 4);
    for (const auto& keep : std::vector<std::vector<Slot>>{
             {Slot::Qutrit}, {Slot::CavityA}, {Slot::CavityB}, {Slot::CavityA, Slot::CavityB}}) {
      const QuantumState r = partial_trace(QuantumState::density(L, rho), keep);
      EXPECT_NEAR(r.trace(), rho.trace().real(), 1e-10);
      EXPECT_GE(min_eigenvalue(r.density_matrix()), -1e-10);
    }
  }
}

TEST(PartialTrace, EmptyKeepRejected) {
  const SpaceLayout L(2, 2);
  EXPECT_THROW(partial_trace(QuantumState::pure(L, fock_state(0, 12)), {}), InvalidDimensionError);
}

TEST(QuantumState, NormalizeAndLayoutCheck) {
  const SpaceLayout L(2, 2);
  CVector v = CVector::Constant(L.dim(), cplx(2.0, 0.0));
  EXPECT_NEAR(QuantumState::pure(L, v).normalized().vector().norm(), 1.0, 1e-15);
  EXPECT_THROW(QuantumState::pure(L, CVector::Zero(5)), InvalidDimensionError);
}

}  // namespace
}  // namespace qadder
