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

// Closed-form references that do not touch the integrators: two-mode
// beam-splitter mixing, coherent-state transport, the abstract adder output
// and exact conditional phases.

#pragma once

#include <utility>

#include <Eigen/Dense>

#include "qadder/model.hpp"
#include "qadder/tensor.hpp"

namespace qadder {

enum class SineSign { PlusI, MinusI };

// (a^dag(t), b^dag(t)) = M (a^dag, b^dag), read as the substitution that
// carries a state's creation operators through the evolution.
struct ModeMixMatrix {
  Eigen::Matrix2cd m;

  double unitarity_deficit() const;
  // Apply this mix, then `later`.
  ModeMixMatrix then(const ModeMixMatrix& later) const;
};

// [[cos rt, +-i sin rt], [+-i sin rt, cos rt]]
ModeMixMatrix beam_splitter_mix(double rate, double t, SineSign sign);

// |alpha>|beta> -> |alpha'>|beta'> with (alpha', beta') = M^T (alpha, beta).
std::pair<cplx, cplx> coherent_bs_evolve(cplx alpha, cplx beta, const ModeMixMatrix& mix);

struct AdderOutput {
  CVector state;  // normalized
  double norm_sq = 0.0;
};

// (gamma |phi> + sign eta |psi>) / N with gamma = sin(theta) <ref|psi>,
// eta = cos(theta) <ref|phi> and
// N^2 = (|gamma|^2 + |eta|^2 + 2 sign Re(gamma conj(eta) <psi|phi>)) / 2.
AdderOutput abstract_adder(const CVector& psi, const CVector& phi, double theta, const CVector& ref,
                           int sign);

// Cavity-A output of a scheme for the given measurement outcome (+1 for |e>,
// -1 for |g> after the rotations).  With parity_corrected the swapped branch
// carries P|phi>, P|psi> where P = (-1)^n.
AdderOutput scheme_adder_output(SchemeVariant v, const CVector& psi, const CVector& phi, double theta,
                                const CVector& ref, int outcome, bool parity_corrected);

// e^{i q pi} with q rational, reduced into [0, 2).
class ExactPhase {
 public:
  ExactPhase() = default;
  explicit ExactPhase(Rational q);

  const Rational& q() const { return q_; }
  cplx value() const;
  bool is_zero() const { return q_ == Rational(0); }
  bool is_pi() const { return q_ == Rational(1); }
  // +1 or -1; throws if the phase is not real.
  int sign() const;

  ExactPhase operator+(const ExactPhase& o) const { return ExactPhase(q_ + o.q_); }
  friend bool operator==(const ExactPhase& a, const ExactPhase& b) { return a.q_ == b.q_; }

 private:
  Rational q_{0};
};

struct BranchPhase {
  Level level = Level::G;
  bool swapped = false;
  ExactPhase phase;
};

struct ConditionalPhases {
  BranchPhase control;  // qutrit level g
  BranchPhase partner;  // f or e
};

// Phase picked up by |x>|n>_A|m>_B at the scheduled time: the block
// propagator exp(-i t (mu (N + a^dag b + a b^dag) + nu)) either returns
// |n, m> (mu t / pi integer) or sends it to (-1)^(n+m) |m, n>
// (mu t / pi half-odd).  Throws ScheduleInconsistencyError otherwise.
ConditionalPhases conditional_phase(const Scheme& scheme, int n, int m);

// The same bookkeeping with the per-photon and constant exponents exactly as
// they appear in the closed-form derivation of the original proposal, upper
// signs for Delta > 0.
ConditionalPhases printed_conditional_phase(const Scheme& scheme, int n, int m);

}  // namespace qadder
