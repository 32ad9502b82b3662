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

// Physical parameters, dispersive shifts, exact timing schedules and the
// Hamiltonians of the qutrit-two-cavity system.  Frequencies are angular
// (rad/us), rates are 1/us, times are us.

#pragma once

#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "qadder/tensor.hpp"

namespace qadder {

using Rational = boost::rational<long long>;

// Quoted MHz figures are read either as angular (rad/us) or as cyclic
// frequencies that still need the factor 2*pi.
enum class UnitConvention { Angular, Cyclic };

std::string to_string(UnitConvention u);
UnitConvention parse_unit_convention(const std::string& s);
double quoted_to_angular(double quoted_mhz, UnitConvention u);

struct ModelParams {
  double g = 0.0;
  double coupling_asymmetry = 1.0;  // g_B = c * g
  double delta = 0.0;               // omega_eg - omega_cavity, signed
  double anharm = 0.0;              // omega_eg - omega_fe > 0
  double g_ab = 0.0;
  double kappa_a = 0.0;
  double kappa_b = 0.0;
  double gamma_eg = 0.0;
  double gamma_fe = 0.0;
  double gamma_fg = 0.0;
  double gamma_phi_e = 0.0;
  double gamma_phi_f = 0.0;
  UnitConvention unit_convention = UnitConvention::Cyclic;

  double g_a() const { return g; }
  double g_b() const { return coupling_asymmetry * g; }
  double small_delta() const { return delta - anharm; }

  // Throws on hard violations, returns large-detuning warnings.
  std::vector<std::string> validate() const;
};

struct DispersiveShifts {
  double chi = 0.0;
  double lam = 0.0;
  double Lam = 0.0;
};

DispersiveShifts dispersive_shifts(double g, double delta, double anharm);
DispersiveShifts dispersive_shifts(const ModelParams& params);

// g from a quoted (chi, Delta) pair: g = sqrt(|chi * Delta|).
double coupling_from_shift(double chi, double delta);

enum class SchemeVariant { EAuxGControl, EAuxFControl, FAuxGControl, FAuxEControl };

// Detuning rule for FAuxEControl.  Consistent solves both timing conditions;
// the printed variants are the two sign readings of the closed form
// (4k1+4k2+5)/(4k2-4k1 -/+ 3).
enum class FAuxEBranch { Consistent, PrintedUpper, PrintedLower };

std::string to_string(SchemeVariant v);
std::string to_string(FAuxEBranch b);
SchemeVariant parse_scheme_variant(const std::string& s);
FAuxEBranch parse_fauxe_branch(const std::string& s);

struct Scheme {
  SchemeVariant variant = SchemeVariant::EAuxGControl;
  int k1 = 0;
  int k2 = 0;
  FAuxEBranch fauxe_branch = FAuxEBranch::Consistent;
};

// Level paired with g in the ancilla superposition (f or e).
Level partner_level(SchemeVariant v);
// Level whose cavity block performs the swap.
Level swap_level(SchemeVariant v);
// Level whose cavity block must return to the identity.
Level idle_level(SchemeVariant v);

// Restricted to qutrit level x the effective Hamiltonian is
// mu_x (N + a^dag b + a b^dag) + nu_x.
double block_rate(Level x, const DispersiveShifts& s);
double block_offset(Level x, const DispersiveShifts& s);

// Delta / alpha as an exact fraction.  Throws InvalidScheduleError on a zero
// denominator and RegimeViolationError when |Delta| <= alpha.
Rational detuning_ratio(const Scheme& scheme);
double detuning_from_schedule(const Scheme& scheme, double anharm);

// Exact shifts in units of g^2/alpha for Delta = r * alpha.
struct ExactShifts {
  Rational chi;
  Rational lam;
  Rational Lam;
};
ExactShifts exact_shifts(Rational r);
Rational exact_block_rate(Level x, const ExactShifts& s);
Rational exact_block_offset(Level x, const ExactShifts& s);

// Both timing conditions evaluated at the scheduled time in units of pi.
struct ScheduleCheck {
  Rational delta_over_alpha;
  Rational time;        // in units of pi * alpha / g^2
  Rational swap_phase;  // |swap rate| t / pi, equals 1/2 + 2 k1 by construction
  Rational idle_phase;  // |idle rate| t / pi, must equal 2 + 2 k2
  Rational idle_target;
  bool consistent = false;
};
// Evaluates the schedule without the |Delta| > alpha regime check.
ScheduleCheck exact_schedule_check(const Scheme& scheme);

enum class TimingRule { BothConditions, SwapConditionOnly };

double protocol_time(const Scheme& scheme, const DispersiveShifts& shifts,
                     TimingRule rule = TimingRule::BothConditions);

// H(t) = sum_k exp(i w_k t) O_k.
class TimeDependentHamiltonian {
 public:
  struct Term {
    Operator op;
    double omega;
  };

  explicit TimeDependentHamiltonian(SpaceLayout layout) : layout_(layout) {}

  void add(Operator op, double omega);
  Operator at(double t) const;
  const SpaceLayout& layout() const { return layout_; }
  const std::vector<Term>& terms() const { return terms_; }
  double fastest_frequency() const;

 private:
  SpaceLayout layout_;
  std::vector<Term> terms_;
};

// Interaction-picture Hamiltonian with detunings Delta (g<->e) and
// delta = Delta - alpha (e<->f), sqrt(2) on the e<->f legs, crosstalk
// included when params.g_ab != 0.
TimeDependentHamiltonian full_hamiltonian(const ModelParams& params, const SpaceLayout& layout);

// The same dynamics in the frame where the coupling is static:
// H' = Delta |e><e| + (2 Delta - alpha) |f><f| + V.  rho_I(t) is recovered as
// exp(i D t) rho'(t) exp(-i D t) with D = diag(frame).
struct RotatingFrameHamiltonian {
  Operator hamiltonian;
  Eigen::VectorXd frame;
};
RotatingFrameHamiltonian rotating_frame_hamiltonian(const ModelParams& params,
                                                    const SpaceLayout& layout);

enum class AsymmetryPolicy { Reject, MeanCoupling };

Operator effective_hamiltonian(const DispersiveShifts& shifts, const SpaceLayout& layout);
// Adds the crosstalk term when params.g_ab != 0.
Operator effective_hamiltonian(const ModelParams& params, const SpaceLayout& layout,
                               AsymmetryPolicy policy = AsymmetryPolicy::Reject);
// Cavity-only block for one qutrit level, on an A (x) B layout.
Operator effective_block(const DispersiveShifts& shifts, Level x, const SpaceLayout& cavity_layout);

Operator crosstalk_hamiltonian(double g_ab, const SpaceLayout& layout);

// Two-mode pieces on any layout holding both cavities.
Operator total_photon_number(const SpaceLayout& layout);
Operator beam_splitter_term(const SpaceLayout& layout);

}  // namespace qadder
