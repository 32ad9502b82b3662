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

#include "qadder/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qadder/errors.hpp"

namespace qadder {

namespace {

constexpr double kPi = std::numbers::pi;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '_' || c == '-'; }), s.end());
  return s;
}

std::string fmt_rational(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

}  // namespace

std::string to_string(UnitConvention u) { return u == UnitConvention::Angular ? "angular" : "cyclic"; }

UnitConvention parse_unit_convention(const std::string& s) {
  const std::string k = lower(s);
  if (k == "angular") return UnitConvention::Angular;
  if (k == "cyclic") return UnitConvention::Cyclic;
  throw ConfigError("unknown unit convention '" + s + "' (expected angular|cyclic)");
}

double quoted_to_angular(double quoted_mhz, UnitConvention u) {
  return u == UnitConvention::Cyclic ? 2.0 * kPi * quoted_mhz : quoted_mhz;
}

std::vector<std::string> ModelParams::validate() const {
  if (!(anharm > 0.0)) throw RegimeViolationError("anharmonicity must be positive");
  if (!(std::abs(delta) > anharm)) {
    throw RegimeViolationError("|Delta| must exceed the anharmonicity");
  }
  const double rates[] = {kappa_a, kappa_b, gamma_eg, gamma_fe, gamma_fg, gamma_phi_e, gamma_phi_f};
  for (double r : rates) {
    if (!(r >= 0.0)) throw RegimeViolationError("decay and dephasing rates must be non-negative");
  }
  if (g_ab < 0.0) throw RegimeViolationError("crosstalk coupling must be non-negative");
  if (coupling_asymmetry < 0.0) throw RegimeViolationError("coupling asymmetry must be non-negative");

  std::vector<std::string> warnings;
  const double gmax = std::max(std::abs(g_a()), std::abs(g_b()));
  if (std::abs(delta) < 10.0 * gmax) {
    warnings.push_back("large-detuning condition |Delta| >= 10 g not met");
  }
  if (std::abs(small_delta()) < 10.0 * std::sqrt(2.0) * gmax) {
    warnings.push_back("large-detuning condition |Delta - alpha| >= 10 sqrt(2) g not met");
  }
  return warnings;
}

DispersiveShifts dispersive_shifts(double g, double delta, double anharm) {
  if (delta == 0.0) throw ResonanceError("Delta = 0: qutrit resonant with the cavities");
  if (delta == anharm) throw ResonanceError("Delta = alpha: e<->f transition resonant");
  DispersiveShifts s;
  s.chi = g * g / delta;
  s.lam = 2.0 * g * g / (delta - anharm);
  s.Lam = s.chi - s.lam;
  return s;
}

DispersiveShifts dispersive_shifts(const ModelParams& params) {
  return dispersive_shifts(params.g, params.delta, params.anharm);
}

double coupling_from_shift(double chi, double delta) { return std::sqrt(std::abs(chi * delta)); }

std::string to_string(SchemeVariant v) {
  switch (v) {
    case SchemeVariant::EAuxGControl:
      return "EAuxGControl";
    case SchemeVariant::EAuxFControl:
      return "EAuxFControl";
    case SchemeVariant::FAuxGControl:
      return "FAuxGControl";
    case SchemeVariant::FAuxEControl:
      return "FAuxEControl";
  }
  return "?";
}

std::string to_string(FAuxEBranch b) {
  switch (b) {
    case FAuxEBranch::Consistent:
      return "consistent";
    case FAuxEBranch::PrintedUpper:
      return "printed-upper";
    case FAuxEBranch::PrintedLower:
      return "printed-lower";
  }
  return "?";
}

SchemeVariant parse_scheme_variant(const std::string& s) {
  const std::string k = lower(s);
  if (k == "eauxgcontrol" || k == "eauxg") return SchemeVariant::EAuxGControl;
  if (k == "eauxfcontrol" || k == "eauxf") return SchemeVariant::EAuxFControl;
  if (k == "fauxgcontrol" || k == "fauxg") return SchemeVariant::FAuxGControl;
  if (k == "fauxecontrol" || k == "fauxe") return SchemeVariant::FAuxEControl;
  throw ConfigError("unknown scheme '" + s + "'");
}

FAuxEBranch parse_fauxe_branch(const std::string& s) {
  const std::string k = lower(s);
  if (k == "consistent") return FAuxEBranch::Consistent;
  if (k == "printedupper" || k == "upper") return FAuxEBranch::PrintedUpper;
  if (k == "printedlower" || k == "lower") return FAuxEBranch::PrintedLower;
  throw ConfigError("unknown FAuxE detuning branch '" + s + "'");
}

Level partner_level(SchemeVariant v) {
  switch (v) {
    case SchemeVariant::EAuxGControl:
    case SchemeVariant::EAuxFControl:
      return Level::F;
    case SchemeVariant::FAuxGControl:
    case SchemeVariant::FAuxEControl:
      return Level::E;
  }
  return Level::F;
}

Level swap_level(SchemeVariant v) {
  switch (v) {
    case SchemeVariant::EAuxGControl:
    case SchemeVariant::FAuxGControl:
      return Level::G;
    case SchemeVariant::EAuxFControl:
      return Level::F;
    case SchemeVariant::FAuxEControl:
      return Level::E;
  }
  return Level::G;
}

Level idle_level(SchemeVariant v) {
  return swap_level(v) == Level::G ? partner_level(v) : Level::G;
}

double block_rate(Level x, const DispersiveShifts& s) {
  switch (x) {
    case Level::G:
      return -s.chi;
    case Level::E:
      return s.Lam;
    case Level::F:
      return s.lam;
  }
  return 0.0;
}

double block_offset(Level x, const DispersiveShifts& s) {
  switch (x) {
    case Level::G:
      return 0.0;
    case Level::E:
      return 2.0 * s.chi;
    case Level::F:
      return 2.0 * s.lam;
  }
  return 0.0;
}

namespace {

Rational raw_detuning_ratio(const Scheme& scheme) {
  if (scheme.k1 < 0 || scheme.k2 < 0) throw InvalidScheduleError("k1, k2 must be non-negative");
  const long long k1 = scheme.k1;
  const long long k2 = scheme.k2;
  long long num = 0;
  long long den = 0;
  switch (scheme.variant) {
    case SchemeVariant::EAuxGControl:
      num = 2 * (k2 + 1);
      den = 2 * k2 - 4 * k1 + 1;
      break;
    case SchemeVariant::EAuxFControl:
      num = 4 * k1 + 1;
      den = 4 * k1 - 8 * k2 - 7;
      break;
    case SchemeVariant::FAuxGControl:
      num = 4 * k1 + 4 * k2 + 5;
      den = 4 * k2 - 4 * k1 + 3;
      break;
    case SchemeVariant::FAuxEControl:
      num = 4 * k1 + 4 * k2 + 5;
      switch (scheme.fauxe_branch) {
        case FAuxEBranch::Consistent:
          den = 4 * k1 - 4 * k2 - 3;
          break;
        case FAuxEBranch::PrintedUpper:
          den = 4 * k2 - 4 * k1 - 3;
          break;
        case FAuxEBranch::PrintedLower:
          den = 4 * k2 - 4 * k1 + 3;
          break;
      }
      break;
  }
  if (den == 0) {
    throw InvalidScheduleError("schedule denominator vanishes for " + to_string(scheme.variant) +
                               " k1=" + std::to_string(k1) + " k2=" + std::to_string(k2));
  }
  return Rational(num, den);
}

}  // namespace

Rational detuning_ratio(const Scheme& scheme) {
  const Rational r = raw_detuning_ratio(scheme);
  if (boost::abs(r) <= Rational(1)) {
    throw RegimeViolationError("schedule gives Delta = " + fmt_rational(r) +
                               " alpha, outside |Delta| > alpha");
  }
  return r;
}

double detuning_from_schedule(const Scheme& scheme, double anharm) {
  return boost::rational_cast<double>(detuning_ratio(scheme)) * anharm;
}

ExactShifts exact_shifts(Rational r) {
  if (r == Rational(0) || r == Rational(1)) throw ResonanceError("resonant schedule ratio");
  ExactShifts s;
  s.chi = Rational(1) / r;
  s.lam = Rational(2) / (r - Rational(1));
  s.Lam = s.chi - s.lam;
  return s;
}

Rational exact_block_rate(Level x, const ExactShifts& s) {
  switch (x) {
    case Level::G:
      return -s.chi;
    case Level::E:
      return s.Lam;
    case Level::F:
      return s.lam;
  }
  return Rational(0);
}

Rational exact_block_offset(Level x, const ExactShifts& s) {
  switch (x) {
    case Level::G:
      return Rational(0);
    case Level::E:
      return Rational(2) * s.chi;
    case Level::F:
      return Rational(2) * s.lam;
  }
  return Rational(0);
}

ScheduleCheck exact_schedule_check(const Scheme& scheme) {
  ScheduleCheck c;
  c.delta_over_alpha = raw_detuning_ratio(scheme);
  const ExactShifts s = exact_shifts(c.delta_over_alpha);
  const Rational swap = boost::abs(exact_block_rate(swap_level(scheme.variant), s));
  const Rational idle = boost::abs(exact_block_rate(idle_level(scheme.variant), s));
  c.idle_target = Rational(2 + 2LL * scheme.k2);
  if (swap == Rational(0)) return c;
  c.time = (Rational(1, 2) + Rational(2LL * scheme.k1)) / swap;
  c.swap_phase = swap * c.time;
  c.idle_phase = idle * c.time;
  c.consistent = (c.idle_phase == c.idle_target);
  return c;
}

double protocol_time(const Scheme& scheme, const DispersiveShifts& shifts, TimingRule rule) {
  const double swap = std::abs(block_rate(swap_level(scheme.variant), shifts));
  const double idle = std::abs(block_rate(idle_level(scheme.variant), shifts));
  if (swap == 0.0) throw ScheduleInconsistencyError("swap rate vanishes");
  const double t = (0.5 + 2.0 * scheme.k1) * kPi / swap;
  if (rule == TimingRule::BothConditions) {
    const double want = (2.0 + 2.0 * scheme.k2) * kPi;
    const double got = idle * t;
    if (std::abs(got - want) > 1e-12 * want) {
      std::ostringstream os;
      os.precision(15);
      os << to_string(scheme.variant) << " k1=" << scheme.k1 << " k2=" << scheme.k2
         << ": idle phase " << got / kPi << " pi, expected " << want / kPi << " pi";
      throw ScheduleInconsistencyError(os.str());
    }
  }
  return t;
}

void TimeDependentHamiltonian::add(Operator op, double omega) {
  require_same_layout(layout_, op.layout(), "TimeDependentHamiltonian::add");
  terms_.push_back({std::move(op), omega});
}

Operator TimeDependentHamiltonian::at(double t) const {
  CMatrix m = CMatrix::Zero(layout_.dim(), layout_.dim());
  for (const Term& term : terms_) m += std::exp(cplx(0.0, term.omega * t)) * term.op.matrix();
  return Operator(layout_, std::move(m));
}

double TimeDependentHamiltonian::fastest_frequency() const {
  double w = 0.0;
  for (const Term& term : terms_) w = std::max(w, std::abs(term.omega));
  return w;
}

namespace {

struct CouplingPieces {
  Operator up_ge;  // raises g -> e with one photon absorbed
  Operator up_ef;  // raises e -> f with one photon absorbed
};

CouplingPieces coupling_pieces(const ModelParams& params, const SpaceLayout& layout) {
  if (!layout.is_full()) throw LayoutMismatchError("Hamiltonian needs the full qutrit x A x B layout");
  const Operator a = embed(annihilation(layout.fock_a()), Slot::CavityA, layout);
  const Operator b = embed(annihilation(layout.fock_b()), Slot::CavityB, layout);
  const Operator s_eg = embed(qutrit_transition(Level::G, Level::E), Slot::Qutrit, layout);
  const Operator s_fe = embed(qutrit_transition(Level::E, Level::F), Slot::Qutrit, layout);
  const Operator field = a * cplx(params.g_a()) + b * cplx(params.g_b());
  return {field * s_eg, (field * s_fe) * cplx(std::sqrt(2.0))};
}

}  // namespace

TimeDependentHamiltonian full_hamiltonian(const ModelParams& params, const SpaceLayout& layout) {
  const CouplingPieces p = coupling_pieces(params, layout);
  TimeDependentHamiltonian h(layout);
  h.add(p.up_ge, params.delta);
  h.add(p.up_ge.adjoint(), -params.delta);
  h.add(p.up_ef, params.small_delta());
  h.add(p.up_ef.adjoint(), -params.small_delta());
  if (params.g_ab != 0.0) h.add(crosstalk_hamiltonian(params.g_ab, layout), 0.0);
  return h;
}

RotatingFrameHamiltonian rotating_frame_hamiltonian(const ModelParams& params,
                                                    const SpaceLayout& layout) {
  const CouplingPieces p = coupling_pieces(params, layout);
  Operator h = p.up_ge + p.up_ge.adjoint() + p.up_ef + p.up_ef.adjoint();
  if (params.g_ab != 0.0) h = h + crosstalk_hamiltonian(params.g_ab, layout);

  const double level[3] = {0.0, params.delta, params.delta + params.small_delta()};
  Eigen::VectorXd frame(layout.dim());
  for (int q = 0; q < 3; ++q)
    for (int n = 0; n < layout.fock_a(); ++n)
      for (int m = 0; m < layout.fock_b(); ++m) frame(layout.index(q, n, m)) = level[q];

  CMatrix hm = h.matrix();
  hm.diagonal() += frame.cast<cplx>();
  return {Operator(layout, std::move(hm)), std::move(frame)};
}

Operator total_photon_number(const SpaceLayout& layout) {
  return embed(number_operator(layout.fock_a()), Slot::CavityA, layout) +
         embed(number_operator(layout.fock_b()), Slot::CavityB, layout);
}

Operator beam_splitter_term(const SpaceLayout& layout) {
  const Operator a = embed(annihilation(layout.fock_a()), Slot::CavityA, layout);
  const Operator b = embed(annihilation(layout.fock_b()), Slot::CavityB, layout);
  const Operator ab_dag = a.adjoint() * b;
  return ab_dag + ab_dag.adjoint();
}

Operator effective_hamiltonian(const DispersiveShifts& s, const SpaceLayout& layout) {
  if (!layout.is_full()) throw LayoutMismatchError("Hamiltonian needs the full qutrit x A x B layout");
  const Operator n = total_photon_number(layout);
  const Operator bs = beam_splitter_term(layout);
  const Operator id = Operator::identity(layout);
  Operator h = Operator::zero(layout);
  for (Level x : {Level::G, Level::E, Level::F}) {
    const Operator proj = embed(qutrit_transition(x, x), Slot::Qutrit, layout);
    const double mu = block_rate(x, s);
    const Operator block = (n + bs) * cplx(mu) + id * cplx(block_offset(x, s));
    h = h + block * proj;
  }
  return h;
}

Operator effective_hamiltonian(const ModelParams& params, const SpaceLayout& layout,
                               AsymmetryPolicy policy) {
  double g = params.g;
  if (params.coupling_asymmetry != 1.0) {
    if (policy == AsymmetryPolicy::Reject) {
      throw AsymmetricParamsError("effective Hamiltonian requires g_A = g_B (c = 1)");
    }
    g = 0.5 * (params.g_a() + params.g_b());
  }
  Operator h = effective_hamiltonian(dispersive_shifts(g, params.delta, params.anharm), layout);
  if (params.g_ab != 0.0) h = h + crosstalk_hamiltonian(params.g_ab, layout);
  return h;
}

Operator effective_block(const DispersiveShifts& s, Level x, const SpaceLayout& cavity_layout) {
  if (cavity_layout.has(Slot::Qutrit) || !cavity_layout.has(Slot::CavityA) ||
      !cavity_layout.has(Slot::CavityB)) {
    throw LayoutMismatchError("effective_block needs an A x B layout");
  }
  const Operator n = total_photon_number(cavity_layout);
  const Operator bs = beam_splitter_term(cavity_layout);
  return (n + bs) * cplx(block_rate(x, s)) +
         Operator::identity(cavity_layout) * cplx(block_offset(x, s));
}

Operator crosstalk_hamiltonian(double g_ab, const SpaceLayout& layout) {
  if (g_ab < 0.0) throw RegimeViolationError("crosstalk coupling must be non-negative");
  return beam_splitter_term(layout) * cplx(g_ab);
}

}  // namespace qadder
