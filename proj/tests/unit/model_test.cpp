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
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "qadder/errors.hpp"
#include "qadder/model.hpp"
#include "test_util.hpp"

namespace qadder {
namespace {

using testing::max_abs;
constexpr double kPi = std::numbers::pi;

ModelParams reference_params(double delta_over_alpha, UnitConvention u = UnitConvention::Angular) {
  ModelParams p;
  p.anharm = quoted_to_angular(115.0, u);
  p.delta = delta_over_alpha * p.anharm;
  p.g = coupling_from_shift(quoted_to_angular(1.0, u), p.delta);
  p.unit_convention = u;
  return p;
}

TEST(Units, QuotedToAngular) {
  EXPECT_EQ(quoted_to_angular(1.0, UnitConvention::Angular), 1.0);
  EXPECT_NEAR(quoted_to_angular(1.0, UnitConvention::Cyclic), 2.0 * kPi, 1e-15);
  EXPECT_EQ(parse_unit_convention("angular"), UnitConvention::Angular);
  EXPECT_EQ(parse_unit_convention("Cyclic"), UnitConvention::Cyclic);
  EXPECT_THROW(parse_unit_convention("hertz"), ConfigError);
}

TEST(Shifts, ClosedForms) {
  const double g = 3.0, delta = 50.0, anharm = 20.0;
  const DispersiveShifts s = dispersive_shifts(g, delta, anharm);
  EXPECT_NEAR(s.chi, 9.0 / 50.0, 1e-15);
  EXPECT_NEAR(s.lam, 18.0 / 30.0, 1e-15);
  EXPECT_NEAR(s.Lam, 9.0 / 50.0 - 18.0 / 30.0, 1e-15);
}

TEST(Shifts, ReferenceRegimeRatios) {
  // Delta = 6 alpha, chi quoted as 1.
  const ModelParams p = reference_params(6.0);
  const DispersiveShifts s = dispersive_shifts(p);
  EXPECT_NEAR(s.chi, 1.0, 1e-12);
  EXPECT_NEAR(s.lam, 2.4, 1e-12);
  EXPECT_NEAR(s.Lam, -1.4, 1e-12);
  EXPECT_NEAR(0.1 * p.g, 2.6268, 5e-5);
}

TEST(Shifts, ResonancesRejected) {
  EXPECT_THROW(dispersive_shifts(1.0, 0.0, 10.0), ResonanceError);
  EXPECT_THROW(dispersive_shifts(1.0, 10.0, 10.0), ResonanceError);
}

TEST(Shifts, CouplingFromShift) {
  EXPECT_NEAR(coupling_from_shift(1.0, 690.0), std::sqrt(690.0), 1e-12);
  EXPECT_NEAR(coupling_from_shift(-1.0, -690.0), std::sqrt(690.0), 1e-12);
}

TEST(Params, ValidateRejectsAndWarns) {
  ModelParams p = reference_params(6.0);
  EXPECT_TRUE(p.validate().empty());
  ModelParams bad = p;
  bad.delta = 0.5 * bad.anharm;
  EXPECT_THROW(bad.validate(), RegimeViolationError);
  bad = p;
  bad.gamma_eg = -1.0;
  EXPECT_THROW(bad.validate(), RegimeViolationError);
  bad = p;
  bad.anharm = 0.0;
  EXPECT_THROW(bad.validate(), RegimeViolationError);
  ModelParams strong = p;
  strong.g = strong.delta / 5.0;
  EXPECT_FALSE(strong.validate().empty());
}

// Independent restatement of the timing conditions: the swap level must
// accumulate (1/2 + 2 k1) pi per c photon and the idle level 2 (1 + k2) pi.
struct Rates {
  Rational swap, idle;
};

Rates rates_for(SchemeVariant v, Rational r) {
  const Rational chi = Rational(1) / r;
  const Rational lam = Rational(2) / (r - 1);
  const Rational Lam = chi - lam;
  auto a = [](Rational x) { return x < 0 ? -x : x; };
  switch (v) {
    case SchemeVariant::EAuxGControl:
      return {a(chi), a(lam)};
    case SchemeVariant::EAuxFControl:
      return {a(lam), a(chi)};
    case SchemeVariant::FAuxGControl:
      return {a(chi), a(Lam)};
    case SchemeVariant::FAuxEControl:
      return {a(Lam), a(chi)};
  }
  return {};
}

bool both_conditions_hold(SchemeVariant v, int k1, int k2, Rational r) {
  const Rates rt = rates_for(v, r);
  // t = (1/2 + 2 k1) / swap, so idle * t == 2 + 2 k2 becomes
  return rt.idle * (Rational(1, 2) + 2 * k1) == (Rational(2) + 2 * k2) * rt.swap;
}

TEST(Schedule, ExactConditionsHoldForAllSchemes) {
  int checked = 0;
  for (auto v : {SchemeVariant::EAuxGControl, SchemeVariant::EAuxFControl, SchemeVariant::FAuxGControl,
                 SchemeVariant::FAuxEControl}) {
    for (int k1 = 0; k1 <= 2; ++k1) {
      for (int k2 = 0; k2 <= 2; ++k2) {
        Scheme s{v, k1, k2, FAuxEBranch::Consistent};
        Rational r;
        try {
          r = exact_schedule_check(s).delta_over_alpha;
        } catch (const InvalidScheduleError&) {
          continue;
        }
        if (r == Rational(0) || r == Rational(1)) continue;
        EXPECT_TRUE(both_conditions_hold(v, k1, k2, r))
            << to_string(v) << " k1=" << k1 << " k2=" << k2 << " r=" << r;
        EXPECT_TRUE(exact_schedule_check(s).consistent);
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 36);
}

TEST(Schedule, KnownDetunings) {
  EXPECT_EQ(detuning_ratio({SchemeVariant::EAuxGControl, 1, 2}), Rational(6));
  EXPECT_EQ(detuning_ratio({SchemeVariant::EAuxFControl, 2, 0}), Rational(9));
  EXPECT_EQ(detuning_ratio({SchemeVariant::FAuxGControl, 1, 0}), Rational(-9));
  EXPECT_EQ(detuning_ratio({SchemeVariant::FAuxEControl, 1, 0, FAuxEBranch::Consistent}), Rational(9));
  EXPECT_EQ(detuning_ratio({SchemeVariant::FAuxEControl, 1, 0, FAuxEBranch::PrintedLower}), Rational(-9));
}

TEST(Schedule, PrintedFAuxEBranchesFailIdleCondition) {
  Scheme s{SchemeVariant::FAuxEControl, 1, 0, FAuxEBranch::PrintedLower};
  const ScheduleCheck c = exact_schedule_check(s);
  EXPECT_FALSE(c.consistent);
  EXPECT_EQ(c.swap_phase, Rational(5, 2));
  EXPECT_FALSE(both_conditions_hold(s.variant, 1, 0, c.delta_over_alpha));
}

TEST(Schedule, RegimeAndDomainErrors) {
  EXPECT_THROW(detuning_ratio({SchemeVariant::EAuxGControl, 1, 0}), RegimeViolationError);
  EXPECT_THROW(detuning_ratio({SchemeVariant::EAuxGControl, -1, 0}), InvalidScheduleError);
}

TEST(Schedule, ProtocolTimeAngular) {
  const ModelParams p = reference_params(6.0);
  const Scheme s{SchemeVariant::EAuxGControl, 1, 2};
  EXPECT_NEAR(protocol_time(s, dispersive_shifts(p)), 2.5 * kPi, 1e-12);
  EXPECT_NEAR(protocol_time(s, dispersive_shifts(p)), 7.854, 5e-4);
}

TEST(Schedule, ProtocolTimeRejectsInconsistentShifts) {
  const Scheme s{SchemeVariant::FAuxEControl, 1, 0, FAuxEBranch::PrintedLower};
  const ModelParams p = reference_params(-9.0);
  EXPECT_THROW(protocol_time(s, dispersive_shifts(p)), ScheduleInconsistencyError);
  EXPECT_GT(protocol_time(s, dispersive_shifts(p), TimingRule::SwapConditionOnly), 0.0);
}

TEST(Levels, SwapAndIdleAssignments) {
  EXPECT_EQ(swap_level(SchemeVariant::EAuxGControl), Level::G);
  EXPECT_EQ(idle_level(SchemeVariant::EAuxGControl), Level::F);
  EXPECT_EQ(swap_level(SchemeVariant::EAuxFControl), Level::F);
  EXPECT_EQ(idle_level(SchemeVariant::EAuxFControl), Level::G);
  EXPECT_EQ(swap_level(SchemeVariant::FAuxEControl), Level::E);
  EXPECT_EQ(idle_level(SchemeVariant::FAuxGControl), Level::E);
  EXPECT_EQ(partner_level(SchemeVariant::FAuxGControl), Level::E);
}

TEST(Hamiltonian, FullIsHermitianAtAllTimes) {
  ModelParams p = reference_params(6.0);
  p.g_ab = 0.1 * p.g;
  const SpaceLayout L(4, 4);
  const TimeDependentHamiltonian h = full_hamiltonian(p, L);
  for (double t : {0.0, 0.013, 0.7, 3.1}) EXPECT_LT(h.at(t).hermiticity_deficit(), 1e-12);
  EXPECT_NEAR(h.fastest_frequency(), p.delta, 1e-12);
}

TEST(Hamiltonian, MatrixElementsOfCouplings) {
  ModelParams p = reference_params(6.0);
  const SpaceLayout L(3, 3);
  const Operator h0 = full_hamiltonian(p, L).at(0.0);
  // <e,0,0|H|g,1,0> = g, <f,0,0|H|e,1,0> = sqrt2 g
  EXPECT_NEAR(std::abs(h0.matrix()(L.index(1, 0, 0), L.index(0, 1, 0)) - p.g), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(h0.matrix()(L.index(2, 0, 0), L.index(1, 1, 0)) - std::sqrt(2.0) * p.g), 0.0,
              1e-12);
  // |e,0,2> -> |f,0,1> picks up sqrt2 * sqrt2 g
  EXPECT_NEAR(std::abs(h0.matrix()(L.index(2, 0, 1), L.index(1, 0, 2))), 2.0 * p.g, 1e-12);
}

TEST(Hamiltonian, RotatingFrameMatchesInteractionFrame) {
  ModelParams p = reference_params(6.0);
  p.g_ab = 0.01 * p.g;
  p.coupling_asymmetry = 1.03;
  const SpaceLayout L(3, 3);
  const RotatingFrameHamiltonian rf = rotating_frame_hamiltonian(p, L);
  const TimeDependentHamiltonian hi = full_hamiltonian(p, L);
  CMatrix v = rf.hamiltonian.matrix();
  v.diagonal() -= rf.frame.cast<cplx>();
  for (double t : {0.0, 0.21, 1.7}) {
    const Eigen::VectorXcd ph = (rf.frame * t).unaryExpr([](double x) { return std::exp(cplx(0, x)); });
    const CMatrix rotated = ph.asDiagonal() * v * ph.conjugate().asDiagonal();
    EXPECT_LT(max_abs(rotated - hi.at(t).matrix()), 1e-9);
  }
}

TEST(Hamiltonian, EffectiveBlocksAndCommutation) {
  const DispersiveShifts s{0.7, 1.9, 0.7 - 1.9};
  const SpaceLayout L(4, 4);
  const Operator h = effective_hamiltonian(s, L);
  EXPECT_LT(h.hermiticity_deficit(), 1e-14);
  // commutes with total photon number and with each qutrit projector
  EXPECT_LT(max_abs(commutator(h, total_photon_number(L)).matrix()), 1e-12);
  const SpaceLayout C = SpaceLayout::cavities(4, 4);
  for (Level x : {Level::G, Level::E, Level::F}) {
    const Operator p = embed(qutrit_transition(x, x), Slot::Qutrit, L);
    EXPECT_LT(max_abs(commutator(h, p).matrix()), 1e-14);
    const int q = static_cast<int>(x);
    const CMatrix sub = h.matrix().block(q * 16, q * 16, 16, 16);
    EXPECT_LT(max_abs(sub - effective_block(s, x, C).matrix()), 1e-14);
  }
  // g block: -chi (N + BS)
  const CMatrix g = effective_block(s, Level::G, C).matrix();
  EXPECT_NEAR(std::abs(g(C.cavity_index(1, 0), C.cavity_index(0, 1)) + 0.7), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(g(C.cavity_index(1, 0), C.cavity_index(1, 0)) + 0.7), 0.0, 1e-15);
  // e block offset 2 chi
  const CMatrix e = effective_block(s, Level::E, C).matrix();
  EXPECT_NEAR(std::abs(e(0, 0) - 1.4), 0.0, 1e-15);
}

TEST(Hamiltonian, NPlusBSSpectrumIsTwiceCMode) {
  // N + a^dag b + a b^dag = 2 c^dag c; sectors with at most 3 photons are
  // untouched by the truncation at 4 levels per mode.
  const SpaceLayout C = SpaceLayout::cavities(4, 4);
  const CMatrix m = (total_photon_number(C) + beam_splitter_term(C)).matrix();
  std::vector<Index> keep;
  for (int n = 0; n < 4; ++n)
    for (int k = 0; k < 4; ++k)
      if (n + k <= 3) keep.push_back(C.cavity_index(n, k));
  CMatrix sub(keep.size(), keep.size());
  for (size_t i = 0; i < keep.size(); ++i)
    for (size_t j = 0; j < keep.size(); ++j) sub(i, j) = m(keep[i], keep[j]);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
  ASSERT_EQ(es.eigenvalues().size(), 10);
  for (Index i = 0; i < 10; ++i) {
    const double v = es.eigenvalues()(i);
    EXPECT_NEAR(v / 2.0, std::round(v / 2.0), 1e-12);
  }
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), 6.0, 1e-12);
}

TEST(Hamiltonian, AsymmetryPolicy) {
  ModelParams p = reference_params(6.0);
  p.coupling_asymmetry = 1.05;
  const SpaceLayout L(2, 2);
  EXPECT_THROW(effective_hamiltonian(p, L), AsymmetricParamsError);
  EXPECT_NO_THROW(effective_hamiltonian(p, L, AsymmetryPolicy::MeanCoupling));
}

TEST(Hamiltonian, CrosstalkTerm) {
  const SpaceLayout L(3, 3);
  const Operator x = crosstalk_hamiltonian(0.5, L);
  EXPECT_NEAR(std::abs(x.matrix()(L.index(0, 1, 0), L.index(0, 0, 1)) - 0.5), 0.0, 1e-15);
  EXPECT_THROW(crosstalk_hamiltonian(-1.0, L), RegimeViolationError);
}

TEST(Hamiltonian, ReducedLayoutRejected) {
  const ModelParams p = reference_params(6.0);
  EXPECT_THROW(full_hamiltonian(p, SpaceLayout::cavities(3, 3)), LayoutMismatchError);
}

}  // namespace
}  // namespace qadder
