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

// The adder pipeline: ancilla preparation, conditional swap, qutrit
// rotations, projective measurements and the conditional state of cavity A.

#pragma once

#include <optional>
#include <string>

#include "qadder/dynamics.hpp"
#include "qadder/model.hpp"
#include "qadder/tensor.hpp"

namespace qadder {

enum class Branch { Plus, Minus };
enum class HamiltonianPath { Effective, Full };

// AsPrinted compares against the textbook targets, where the swapped branch
// carries |phi>|psi> unchanged.  ParityCorrected applies the photon-number
// parity (-1)^(n+m) that the swap actually leaves on that branch.
enum class TargetConvention { AsPrinted, ParityCorrected };

enum class Rotation { PiEF, HalfPiGE };

std::string to_string(Branch b);
std::string to_string(HamiltonianPath p);
std::string to_string(TargetConvention c);
Branch parse_branch(const std::string& s);
HamiltonianPath parse_hamiltonian_path(const std::string& s);
TargetConvention parse_target_convention(const std::string& s);

struct ProtocolConfig {
  Scheme scheme;
  double theta = 0.0;
  CVector input_a;    // |psi> on cavity A
  CVector input_b;    // |phi> on cavity B
  CVector ref_state;  // |chi> measured on cavity B
  Branch branch = Branch::Plus;
  std::optional<NoiseSpec> noise;
  HamiltonianPath path = HamiltonianPath::Effective;
  TargetConvention target = TargetConvention::AsPrinted;
  TimingRule timing = TimingRule::BothConditions;
  IntegratorSpec integrator;

  // Input sizes against the layout, non-zero overlaps with the reference,
  // theta in [0, 2 pi].
  void validate(const SpaceLayout& layout) const;
};

// sin(theta) |g> + cos(theta) |x>, x = f for e-auxiliary schemes, e otherwise.
CVector ancilla_vector(SchemeVariant v, double theta);

// Sign in front of the partner-level branch of the target.
int branch_sign(SchemeVariant v);

QuantumState prepare_initial_state(const ProtocolConfig& config, const SpaceLayout& layout);

double swap_time(const ProtocolConfig& config, const ModelParams& params);

// The Hamiltonian the configured path and engine integrate.
HamiltonianSource protocol_hamiltonian(const ProtocolConfig& config, const ModelParams& params,
                                       const SpaceLayout& layout);

struct SwapOutcome {
  QuantumState state;
  double time = 0.0;
  EvolutionStats stats;
};

// Noiseless pure states are propagated as vectors with Runge-Kutta at
// tolerances no looser than 1e-12 (relative) and 1e-14 (absolute); everything
// else goes through the master equation with the configured integrator.
SwapOutcome run_controlled_swap(const QuantumState& state, const ProtocolConfig& config,
                                const ModelParams& params);

// Real orthogonal on the two levels involved, identity on the third.
// PiEF: |f> -> |e>, |e> -> -|f>.  HalfPiGE: |g> -> (|e>+|g>)/sqrt2,
// |e> -> (|e>-|g>)/sqrt2.
CMatrix qutrit_rotation(Rotation kind);
Operator qutrit_rotation(Rotation kind, const SpaceLayout& layout);

// Rotation applied before reading out the qutrit: PiEF then HalfPiGE for
// e-auxiliary schemes, HalfPiGE alone otherwise.
CMatrix measurement_rotation(SchemeVariant v);

QuantumState apply_qutrit_unitary(const QuantumState& state, const CMatrix& u);

struct Conditional {
  QuantumState state;
  double probability = 0.0;
};

// Projects the qutrit onto |e> (plus) or |g> (minus) and returns the cavity
// state.  Probability is relative to the trace of the input.
Conditional measure_qutrit(const QuantumState& post_rotation, Branch branch);
double qutrit_outcome_probability(const QuantumState& post_rotation, Branch branch);

// Projects cavity B of a two-cavity state onto ref.
Conditional measure_cavity_reference(const QuantumState& cavities, const CVector& ref);

QuantumState ideal_target_state(const ProtocolConfig& config, const SpaceLayout& layout);

struct ProtocolResult {
  QuantumState pre_measurement_state;
  QuantumState post_rotation_state;
  double p_plus = 0.0;
  double p_minus = 0.0;
  double p_ref = 0.0;  // cavity-B projection given the chosen branch
  // Empty when the chosen branch or the reference projection has no weight.
  std::optional<QuantumState> output_a;
  double overall_success_prob = 0.0;
  double fidelity_vs_ideal = 0.0;
  // output_a against the ideal target sent through the same measurements;
  // NaN when either side is undefined.
  double post_measurement_fidelity = 0.0;
  double protocol_time = 0.0;
  Diagnostics diagnostics;
  EvolutionStats stats;
};

// Rotations, measurements and fidelities for an already evolved state.
ProtocolResult analyze(const ProtocolConfig& config, const QuantumState& evolved);

ProtocolResult run_adder(const ProtocolConfig& config, const ModelParams& params,
                         const SpaceLayout& layout);

}  // namespace qadder
