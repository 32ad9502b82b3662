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

#include <Eigen/Eigenvalues>

#include "qadder/dynamics.hpp"
#include "qadder/errors.hpp"
#include "qadder/model.hpp"
#include "test_util.hpp"

namespace qadder {
namespace {

using testing::max_abs;

IntegratorSpec spec_for(Method m, double rel = 1e-10, double abs = 1e-12) {
  IntegratorSpec s;
  s.method = m;
  s.rel_tol = rel;
  s.abs_tol = abs;
  return s;
}

class BothEngines : public ::testing::TestWithParam<Method> {};

TEST_P(BothEngines, CavityAmplitudeDamping) {
  const SpaceLayout L(3, 2);
  NoiseSpec noise;
  noise.rates[static_cast<int>(Channel::KappaA)] = 0.8;
  const auto rho0 = QuantumState::pure(L, fock_state(static_cast<int>(L.index(0, 2, 0)), static_cast<int>(L.dim())));
  const double t = 1.3;
  const auto traj = evolve_master(rho0, Operator::zero(L), noise, t, spec_for(GetParam()));
  const CMatrix rho = traj.final_state().matrix();
  const double p = std::exp(-0.8 * t);
  // |2> -> binomial populations
  EXPECT_NEAR(rho(L.index(0, 2, 0), L.index(0, 2, 0)).real(), p * p, 1e-9);
  EXPECT_NEAR(rho(L.index(0, 1, 0), L.index(0, 1, 0)).real(), 2 * p * (1 - p), 1e-9);
  EXPECT_NEAR(rho(L.index(0, 0, 0), L.index(0, 0, 0)).real(), (1 - p) * (1 - p), 1e-9);
}

TEST_P(BothEngines, PureDephasingOfCoherence) {
  const SpaceLayout L(1, 1);
  NoiseSpec noise;
  noise.rates[static_cast<int>(Channel::DephasingE)] = 0.5;
  CVector v = CVector::Zero(3);
  v(0) = v(1) = 1.0 / std::sqrt(2.0);
  const double t = 2.0;
  const auto traj = evolve_master(QuantumState::pure(L, v), Operator::zero(L), noise, t, spec_for(GetParam()));
  EXPECT_NEAR(std::abs(traj.final_state().matrix()(0, 1)), 0.5 * std::exp(-0.25 * t), 1e-9);
  EXPECT_NEAR(traj.final_state().matrix()(1, 1).real(), 0.5, 1e-9);
}

TEST_P(BothEngines, QutritCascade) {
  const SpaceLayout L(1, 1);
  NoiseSpec noise;
  const double gfe = 0.3, gfg = 0.1, geg = 0.7;
  noise.rates[static_cast<int>(Channel::GammaFE)] = gfe;
  noise.rates[static_cast<int>(Channel::GammaFG)] = gfg;
  noise.rates[static_cast<int>(Channel::GammaEG)] = geg;
  const double t = 1.7;
  const auto traj = evolve_master(QuantumState::pure(L, qutrit_state(Level::F)), Operator::zero(L), noise,
                                  t, spec_for(GetParam()));
  const CMatrix rho = traj.final_state().matrix();
  const double gf = gfe + gfg;
  const double pf = std::exp(-gf * t);
  const double pe = gfe / (gf - geg) * (std::exp(-geg * t) - std::exp(-gf * t));
  EXPECT_NEAR(rho(2, 2).real(), pf, 1e-9);
  EXPECT_NEAR(rho(1, 1).real(), pe, 1e-9);
  EXPECT_NEAR(rho(0, 0).real(), 1 - pf - pe, 1e-9);
}

TEST_P(BothEngines, StaticHamiltonianMatchesExactExponential) {
  std::mt19937 rng(17);
  const SpaceLayout L(2, 2);
  CMatrix m = testing::random_matrix(rng, L.dim());
  m = 0.5 * (m + m.adjoint()).eval();
  const Operator h(L, m);
  const CVector v = testing::random_vector(rng, L.dim());
  const double t = 0.9;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  const CVector phases = (es.eigenvalues() * -t).unaryExpr([](double x) { return std::exp(cplx(0, x)); });
  const CMatrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  const CVector want = u * v;
  const auto traj = evolve_master(QuantumState::pure(L, v), h, NoiseSpec::none(), t, spec_for(GetParam()));
  EXPECT_NEAR(fidelity(QuantumState::pure(L, want), traj.final_state()), 1.0, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Engines, BothEngines,
                         ::testing::Values(Method::DormandPrince45, Method::KrylovExponential),
                         [](const auto& info) { return to_string(info.param) == "krylov" ? std::string("Krylov") : std::string("Dopri5"); });

ModelParams small_params() {
  ModelParams p;
  p.anharm = 115.0;
  p.delta = 6.0 * p.anharm;
  p.g = coupling_from_shift(1.0, p.delta);
  p.kappa_a = 1.0 / 1500.0;
  p.kappa_b = 1.0 / 1000.0;
  p.gamma_phi_e = 1.0 / 15.0;
  p.gamma_phi_f = 1.0 / 10.0;
  p.gamma_eg = 1.0 / 50.0;
  p.gamma_fe = 1.0 / 25.0;
  p.gamma_fg = 1.0 / 100.0;
  p.g_ab = 0.1 * p.g;
  return p;
}

TEST(Engines, KrylovRotatingFrameAgreesWithInteractionFrameRK) {
  const ModelParams p = small_params();
  const SpaceLayout L(3, 3);
  std::mt19937 rng(23);
  const CMatrix rho0 = testing::random_density(rng, L.dim(), 2);
  const NoiseSpec noise = NoiseSpec::from_params(p);
  const double t = 0.4;
  const CMatrix rk = propagate_hermitian(rho0, full_hamiltonian(p, L), noise, t,
                                         spec_for(Method::DormandPrince45, 1e-10, 1e-12));
  const CMatrix kr = propagate_hermitian(rho0, rotating_frame_hamiltonian(p, L), noise, t,
                                         spec_for(Method::KrylovExponential, 1e-10, 1e-12));
  EXPECT_LT(max_abs(rk - kr), 1e-8);
}

TEST(Engines, KrylovNeedsStaticGenerator) {
  const ModelParams p = small_params();
  const SpaceLayout L(2, 2);
  const CMatrix rho0 = CMatrix::Identity(L.dim(), L.dim()) / double(L.dim());
  EXPECT_THROW(propagate_hermitian(rho0, full_hamiltonian(p, L), NoiseSpec::none(), 0.1,
                                   spec_for(Method::KrylovExponential)),
               Error);
}

TEST(Engines, UnitaryMatchesMasterWithoutNoise) {
  const ModelParams p = small_params();
  const SpaceLayout L(3, 3);
  std::mt19937 rng(29);
  const CVector v = testing::random_vector(rng, L.dim());
  const double t = 0.3;
  const auto psi = evolve_unitary(QuantumState::pure(L, v), rotating_frame_hamiltonian(p, L), t,
                                  spec_for(Method::DormandPrince45, 1e-12, 1e-14));
  const auto rho = evolve_master(QuantumState::pure(L, v), full_hamiltonian(p, L), NoiseSpec::none(), t,
                                 spec_for(Method::DormandPrince45, 1e-11, 1e-13));
  EXPECT_NEAR(fidelity(psi, rho.final_state()), 1.0, 1e-8);
}

TEST(Engines, PropagationIsLinear) {
  const ModelParams p = small_params();
  const SpaceLayout L(2, 2);
  std::mt19937 rng(31);
  const CMatrix a = testing::random_density(rng, L.dim());
  const CMatrix b = testing::random_density(rng, L.dim());
  const NoiseSpec noise = NoiseSpec::from_params(p);
  const auto spec = spec_for(Method::KrylovExponential, 1e-11, 1e-13);
  const auto h = rotating_frame_hamiltonian(p, L);
  const CMatrix lhs = propagate_hermitian(0.3 * a - 0.7 * b, h, noise, 0.2, spec);
  const CMatrix rhs = 0.3 * propagate_hermitian(a, h, noise, 0.2, spec) -
                      0.7 * propagate_hermitian(b, h, noise, 0.2, spec);
  EXPECT_LT(max_abs(lhs - rhs), 1e-9);
}

TEST(Engines, FullDynamicsApproachesEffectiveSwap) {
  // One photon in A with the qutrit in g: after the scheduled time the
  // dispersive g block has moved it to B.
  ModelParams p = small_params();
  p.g_ab = 0.0;
  const SpaceLayout L(3, 3);
  const Scheme s{SchemeVariant::EAuxGControl, 1, 2};
  const double t = protocol_time(s, dispersive_shifts(p));
  const CVector v = fock_state(static_cast<int>(L.index(0, 1, 0)), static_cast<int>(L.dim()));
  const auto spec = spec_for(Method::DormandPrince45, 1e-10, 1e-12);
  const auto full = evolve_unitary(QuantumState::pure(L, v), rotating_frame_hamiltonian(p, L), t, spec);
  const auto eff = evolve_unitary(QuantumState::pure(L, v), effective_hamiltonian(p, L), t, spec);
  EXPECT_NEAR(std::norm(eff.vector()(L.index(0, 0, 1))), 1.0, 1e-9);
  // residual of order g^2 / Delta^2
  const double leak = 1.0 - std::norm(full.vector()(L.index(0, 0, 1)));
  EXPECT_LT(leak, 1e-2);
  EXPECT_GT(leak, 0.0);
}

TEST(Engines, ShortTimePropagatorsAgreeToSecondOrder) {
  // Over many periods of the fast phase the full propagator reduces to the
  // effective one; the deficit must shrink like (g / Delta)^2.
  ModelParams p = small_params();
  p.g_ab = 0.0;
  const SpaceLayout L(2, 2);
  const double t = 50.0 * 2.0 * 3.141592653589793 / p.delta;
  const auto spec = spec_for(Method::DormandPrince45, 1e-11, 1e-13);
  auto worst_deficit = [&](const ModelParams& q) {
    double worst = 0.0;
    for (Index i = 0; i < L.dim(); ++i) {
      const CVector v = fock_state(static_cast<int>(i), static_cast<int>(L.dim()));
      const auto full = evolve_unitary(QuantumState::pure(L, v), full_hamiltonian(q, L), t, spec);
      const auto eff = evolve_unitary(QuantumState::pure(L, v), effective_hamiltonian(q, L), t, spec);
      worst = std::max(worst, 1.0 - testing::overlap(full.vector(), eff.vector()));
    }
    return worst;
  };
  ModelParams half = p;
  half.g = 0.5 * p.g;
  const double w1 = worst_deficit(p);
  const double w2 = worst_deficit(half);
  const double eps = 2.0 * p.g / p.small_delta();
  EXPECT_LT(w1, 10.0 * eps * eps);
  EXPECT_GT(w1 / w2, 3.0);
}

TEST(Engines, NoisyRunHygiene) {
  const ModelParams p = small_params();
  const SpaceLayout L(3, 3);
  const auto rho0 = product_state(L, qutrit_state(Level::F), coherent_state(0.3, 3, 1e-3),
                                  coherent_state(-0.3, 3, 1e-3));
  const auto traj = evolve_master(rho0.normalized(), rotating_frame_hamiltonian(p, L), NoiseSpec::from_params(p),
                                  1.0, spec_for(Method::KrylovExponential, 1e-8, 1e-10), {0.25, 0.5, 1.0});
  ASSERT_EQ(traj.states.size(), 3u);
  for (const Diagnostics& d : traj.diagnostics) {
    EXPECT_LT(d.trace_deficit, 1e-8);
    EXPECT_LT(d.hermiticity_deficit, 1e-9);
    EXPECT_GE(d.min_eigenvalue, -1e-7);
  }
}

TEST(Engines, ToleranceHalvingConverges) {
  const ModelParams p = small_params();
  const SpaceLayout L(3, 3);
  const auto rho0 = product_state(L, (qutrit_state(Level::G) + qutrit_state(Level::F)) / std::sqrt(2.0),
                                  fock_state(1, 3), fock_state(0, 3));
  const CVector target = rho0.vector();
  auto run = [&](double rel) {
    return fidelity(QuantumState::pure(L, target),
                    evolve_master(rho0, full_hamiltonian(p, L), NoiseSpec::from_params(p), 0.5,
                                  spec_for(Method::DormandPrince45, rel, rel * 1e-2))
                        .final_state());
  };
  EXPECT_LT(std::abs(run(1e-8) - run(5e-9)), 1e-7);
}

TEST(Engines, InputValidation) {
  const SpaceLayout L(2, 2);
  CMatrix bad = CMatrix::Zero(L.dim(), L.dim());
  bad(0, 0) = 2.0;
  EXPECT_THROW(evolve_master(QuantumState::density(L, bad), Operator::zero(L), NoiseSpec::none(), 1.0,
                             IntegratorSpec{}),
               NumericalPositivityError);
  const auto ok = QuantumState::pure(L, fock_state(0, static_cast<int>(L.dim())));
  EXPECT_THROW(evolve_master(ok, Operator::zero(L), NoiseSpec::none(), -1.0, IntegratorSpec{}), Error);
  EXPECT_THROW(evolve_master(ok, Operator::zero(L), NoiseSpec::none(), 1.0, IntegratorSpec{}, {2.0}), Error);
  EXPECT_THROW(evolve_master(ok, Operator::zero(SpaceLayout(2, 3)), NoiseSpec::none(), 1.0, IntegratorSpec{}),
               LayoutMismatchError);
}

TEST(Engines, StepBudgetReportsLastGoodTime) {
  const ModelParams p = small_params();
  const SpaceLayout L(2, 2);
  IntegratorSpec s = spec_for(Method::DormandPrince45);
  s.max_steps = 5;
  const auto ok = QuantumState::pure(L, fock_state(0, static_cast<int>(L.dim())));
  try {
    evolve_master(ok, full_hamiltonian(p, L), NoiseSpec::none(), 1.0, s);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GE(e.last_good_time(), 0.0);
    EXPECT_LT(e.last_good_time(), 1.0);
  }
}

TEST(Noise, ChannelSelection) {
  const ModelParams p = small_params();
  const NoiseSpec n = NoiseSpec::from_params(p);
  const SpaceLayout L(2, 2);
  EXPECT_EQ(collapse_operators(n, L).size(), 7u);
  EXPECT_EQ(collapse_operators(n.only(Channel::KappaB), L).size(), 1u);
  EXPECT_EQ(collapse_operators(n.without(Channel::KappaB), L).size(), 6u);
  EXPECT_EQ(n.without(Channel::DephasingE).rate(Channel::DephasingE), 0.0);
  EXPECT_FALSE(NoiseSpec::none().any());
  ModelParams bad = p;
  bad.kappa_a = -1.0;
  EXPECT_THROW(NoiseSpec::from_params(bad), RegimeViolationError);
}

TEST(Noise, DissipatorIsTraceless) {
  std::mt19937 rng(41);
  const SpaceLayout L(3, 3);
  const CMatrix rho = testing::random_density(rng, L.dim());
  const Operator a = embed(annihilation(3), Slot::CavityA, L);
  EXPECT_NEAR(std::abs(dissipator(a, rho).trace()), 0.0, 1e-13);
  const NoiseSpec n = NoiseSpec::from_params(small_params());
  EXPECT_NEAR(std::abs(lindblad_rhs(Operator::zero(L), n, rho, 0.0).trace()), 0.0, 1e-12);
}

}  // namespace
}  // namespace qadder
