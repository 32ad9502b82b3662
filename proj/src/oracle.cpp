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

#include "qadder/oracle.hpp"

#include <cmath>
#include <numbers>

#include "qadder/errors.hpp"

namespace qadder {

namespace {

constexpr double kDestructive = 1e-14;

CVector parity(const CVector& v) {
  CVector out = v;
  for (Index n = 1; n < out.size(); n += 2) out(n) = -out(n);
  return out;
}

Rational mod2(Rational q) {
  // floor division on rationals
  long long k = q.numerator() / (2 * q.denominator());
  Rational r = q - Rational(2 * k);
  while (r < Rational(0)) r += Rational(2);
  while (r >= Rational(2)) r -= Rational(2);
  return r;
}

// Output of s <ref|gb> |ga> + t <ref|xb> |xa>, halved in norm by the qutrit
// projection.
AdderOutput two_branch(cplx s, const CVector& ga, const CVector& gb, cplx t, const CVector& xa,
                       const CVector& xb, const CVector& ref) {
  CVector v = (s * ref.dot(gb)) * ga + (t * ref.dot(xb)) * xa;
  const double n2 = 0.5 * v.squaredNorm();
  if (n2 < kDestructive) throw DestructiveInterferenceError("adder branches cancel");
  return {v / v.norm(), n2};
}

}  // namespace

double ModeMixMatrix::unitarity_deficit() const {
  return (m.adjoint() * m - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
}

ModeMixMatrix ModeMixMatrix::then(const ModeMixMatrix& later) const {
  // a^dag -> M1 a^dag, then each a^dag inside -> M2 a^dag.
  return {m * later.m};
}

ModeMixMatrix beam_splitter_mix(double rate, double t, SineSign sign) {
  const double c = std::cos(rate * t);
  const cplx s(0.0, (sign == SineSign::PlusI ? 1.0 : -1.0) * std::sin(rate * t));
  ModeMixMatrix out;
  out.m << c, s, s, c;
  return out;
}

std::pair<cplx, cplx> coherent_bs_evolve(cplx alpha, cplx beta, const ModeMixMatrix& mix) {
  if (mix.unitarity_deficit() > 1e-12) throw Error("mode mix is not unitary");
  const Eigen::Vector2cd in(alpha, beta);
  const Eigen::Vector2cd out = mix.m.transpose() * in;
  return {out(0), out(1)};
}

AdderOutput abstract_adder(const CVector& psi, const CVector& phi, double theta, const CVector& ref,
                           int sign) {
  const cplx gamma = std::sin(theta) * ref.dot(psi);
  const cplx eta = std::cos(theta) * ref.dot(phi);
  const double sg = sign >= 0 ? 1.0 : -1.0;
  const double n2 =
      0.5 * (std::norm(gamma) + std::norm(eta) + 2.0 * sg * std::real(gamma * std::conj(eta) * psi.dot(phi)));
  if (n2 < kDestructive) throw DestructiveInterferenceError("adder branches cancel");
  CVector v = gamma * phi + (sg * eta) * psi;
  return {v / v.norm(), n2};
}

AdderOutput scheme_adder_output(SchemeVariant v, const CVector& psi, const CVector& phi, double theta,
                                const CVector& ref, int outcome, bool parity_corrected) {
  int sigma = 1;
  if (v == SchemeVariant::EAuxFControl || v == SchemeVariant::FAuxGControl) sigma = -1;
  const cplx s = std::sin(theta);
  const cplx t = std::cos(theta) * static_cast<double>(sigma * (outcome >= 0 ? 1 : -1));
  const CVector sa = parity_corrected ? parity(phi) : phi;
  const CVector sb = parity_corrected ? parity(psi) : psi;
  if (swap_level(v) == Level::G) return two_branch(s, sa, sb, t, psi, phi, ref);
  return two_branch(s, psi, phi, t, sa, sb, ref);
}

ExactPhase::ExactPhase(Rational q) : q_(mod2(q)) {}

cplx ExactPhase::value() const {
  const double x = boost::rational_cast<double>(q_) * std::numbers::pi;
  return {std::cos(x), std::sin(x)};
}

int ExactPhase::sign() const {
  if (is_zero()) return 1;
  if (is_pi()) return -1;
  throw Error("phase is not real");
}

namespace {

BranchPhase physical_branch(Level x, const ExactShifts& s, const Rational& time, long long photons) {
  const Rational mu_t = exact_block_rate(x, s) * time;
  const Rational nu_t = exact_block_offset(x, s) * time;
  BranchPhase b;
  b.level = x;
  if (mu_t.denominator() == 1) {
    b.swapped = false;
    b.phase = ExactPhase(-nu_t);
  } else if (mu_t.denominator() == 2) {
    b.swapped = true;
    b.phase = ExactPhase(Rational(photons) - nu_t);
  } else {
    throw ScheduleInconsistencyError("block propagator is neither identity nor swap at the scheduled time");
  }
  return b;
}

}  // namespace

ConditionalPhases conditional_phase(const Scheme& scheme, int n, int m) {
  if (n < 0 || m < 0) throw InvalidDimensionError("photon numbers must be non-negative");
  const ScheduleCheck c = exact_schedule_check(scheme);
  if (!c.consistent) throw ScheduleInconsistencyError("schedule does not meet both timing conditions");
  const ExactShifts s = exact_shifts(c.delta_over_alpha);
  const long long photons = static_cast<long long>(n) + m;
  return {physical_branch(Level::G, s, c.time, photons),
          physical_branch(partner_level(scheme.variant), s, c.time, photons)};
}

ConditionalPhases printed_conditional_phase(const Scheme& scheme, int n, int m) {
  if (n < 0 || m < 0) throw InvalidDimensionError("photon numbers must be non-negative");
  const ScheduleCheck c = exact_schedule_check(scheme);
  const Rational sg(c.delta_over_alpha > Rational(0) ? 1 : -1);
  const Rational k1(scheme.k1);
  const Rational k2(scheme.k2);
  const Rational half(1, 2);
  const Rational photons(static_cast<long long>(n) + m);
  const Rational swap_per_photon_g = sg * (half + 2 * k1) + half;
  const Rational swap_per_photon_x = sg * (half + 2 * k1) - half;
  const Rational idle_per_photon = sg * 2 * (1 + k2);

  ConditionalPhases out;
  out.control.level = Level::G;
  out.partner.level = partner_level(scheme.variant);
  switch (scheme.variant) {
    case SchemeVariant::EAuxGControl:
      out.control = {Level::G, true, ExactPhase(swap_per_photon_g * photons)};
      out.partner = {Level::F, false, ExactPhase(-sg * (2 + 2 * k2) * photons - sg * 2 * (2 + 2 * k2))};
      break;
    case SchemeVariant::EAuxFControl:
      out.control = {Level::G, false, ExactPhase(idle_per_photon * photons)};
      out.partner = {Level::F, true, ExactPhase(swap_per_photon_x * photons - sg * (1 + 4 * k1))};
      break;
    case SchemeVariant::FAuxGControl:
      out.control = {Level::G, true, ExactPhase(swap_per_photon_g * photons)};
      out.partner = {Level::E, false, ExactPhase(idle_per_photon * photons - sg * 2 * (half + 2 * k1))};
      break;
    case SchemeVariant::FAuxEControl:
      out.control = {Level::G, false, ExactPhase(idle_per_photon * photons)};
      out.partner = {Level::E, true, ExactPhase(swap_per_photon_x * photons - sg * 4 * (1 + k2))};
      break;
  }
  return out;
}

}  // namespace qadder
