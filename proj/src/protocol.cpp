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

#include "qadder/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qadder/errors.hpp"

namespace qadder {

namespace {

constexpr double kEmptyBranch = 1e-12;
constexpr double kUnitaryRelTol = 1e-12;
constexpr double kUnitaryAbsTol = 1e-14;

CVector parity(const CVector& v) {
  CVector out = v;
  for (Index n = 1; n < out.size(); n += 2) out(n) = -out(n);
  return out;
}

bool is_e_aux(SchemeVariant v) {
  return v == SchemeVariant::EAuxGControl || v == SchemeVariant::EAuxFControl;
}

}  // namespace

std::string to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

std::string to_string(HamiltonianPath p) { return p == HamiltonianPath::Effective ? "effective" : "full"; }

std::string to_string(TargetConvention c) {
  return c == TargetConvention::AsPrinted ? "as-printed" : "parity-corrected";
}

Branch parse_branch(const std::string& s) {
  if (s == "plus" || s == "+") return Branch::Plus;
  if (s == "minus" || s == "-") return Branch::Minus;
  throw ConfigError("unknown branch '" + s + "'");
}

HamiltonianPath parse_hamiltonian_path(const std::string& s) {
  if (s == "effective") return HamiltonianPath::Effective;
  if (s == "full") return HamiltonianPath::Full;
  throw ConfigError("unknown hamiltonian '" + s + "' (effective|full)");
}

TargetConvention parse_target_convention(const std::string& s) {
  if (s == "as-printed" || s == "printed") return TargetConvention::AsPrinted;
  if (s == "parity-corrected" || s == "parity") return TargetConvention::ParityCorrected;
  throw ConfigError("unknown target convention '" + s + "' (as-printed|parity-corrected)");
}

void ProtocolConfig::validate(const SpaceLayout& layout) const {
  if (!layout.is_full()) throw LayoutMismatchError("protocol needs the full qutrit-A-B layout");
  if (input_a.size() != layout.fock_a()) throw TruncationTooSmallError("input_a does not match N_A", static_cast<int>(input_a.size()));
  if (input_b.size() != layout.fock_b()) throw TruncationTooSmallError("input_b does not match N_B", static_cast<int>(input_b.size()));
  if (ref_state.size() != layout.fock_b()) throw InvalidDimensionError("reference state does not match N_B");
  if (!(theta >= 0.0 && theta <= 2.0 * std::numbers::pi + 1e-12)) throw ConfigError("theta outside [0, 2 pi]");
  // input_a is compared to the reference through its leading coefficients.
  const Index k = std::min(ref_state.size(), input_a.size());
  const double oa = std::abs(ref_state.head(k).dot(input_a.head(k)));
  const double ob = std::abs(ref_state.dot(input_b));
  if (oa < kEmptyBranch || ob < kEmptyBranch) {
    throw ConfigError("reference state must overlap both inputs");
  }
}

CVector ancilla_vector(SchemeVariant v, double theta) {
  return std::sin(theta) * qutrit_state(Level::G) + std::cos(theta) * qutrit_state(partner_level(v));
}

int branch_sign(SchemeVariant v) {
  switch (v) {
    case SchemeVariant::EAuxGControl:
    case SchemeVariant::FAuxEControl:
      return 1;
    case SchemeVariant::EAuxFControl:
    case SchemeVariant::FAuxGControl:
      return -1;
  }
  return 1;
}

QuantumState prepare_initial_state(const ProtocolConfig& config, const SpaceLayout& layout) {
  config.validate(layout);
  CVector psi = product_vector(ancilla_vector(config.scheme.variant, config.theta), config.input_a, config.input_b);
  return QuantumState::pure(layout, psi / psi.norm());
}

double swap_time(const ProtocolConfig& config, const ModelParams& params) {
  return protocol_time(config.scheme, dispersive_shifts(params), config.timing);
}

HamiltonianSource protocol_hamiltonian(const ProtocolConfig& config, const ModelParams& params,
                                       const SpaceLayout& layout) {
  if (config.path == HamiltonianPath::Effective) return effective_hamiltonian(params, layout);
  if (config.integrator.method == Method::KrylovExponential) return rotating_frame_hamiltonian(params, layout);
  return full_hamiltonian(params, layout);
}

SwapOutcome run_controlled_swap(const QuantumState& state, const ProtocolConfig& config,
                                const ModelParams& params) {
  const SpaceLayout& layout = state.layout();
  SwapOutcome out{state, swap_time(config, params), {}};
  const bool noisy = config.noise && config.noise->any();
  if (!noisy && state.is_pure()) {
    // Runge-Kutta on vectors; the interaction frame needs no transform.
    HamiltonianSource h = config.path == HamiltonianPath::Effective
                              ? HamiltonianSource(effective_hamiltonian(params, layout))
                              : HamiltonianSource(full_hamiltonian(params, layout));
    IntegratorSpec spec = config.integrator;
    spec.method = Method::DormandPrince45;
    spec.rel_tol = std::min(spec.rel_tol, kUnitaryRelTol);
    spec.abs_tol = std::min(spec.abs_tol, kUnitaryAbsTol);
    out.state = evolve_unitary(state, h, out.time, spec, &out.stats);
    return out;
  }
  const NoiseSpec noise = noisy ? *config.noise : NoiseSpec::none();
  const QuantumState rho0 = QuantumState::density(layout, state.density_matrix());
  MasterTrajectory tr =
      evolve_master(rho0, protocol_hamiltonian(config, params, layout), noise, out.time, config.integrator);
  out.state = tr.final_state();
  out.stats = tr.stats;
  return out;
}

CMatrix qutrit_rotation(Rotation kind) {
  CMatrix u = CMatrix::Identity(3, 3);
  if (kind == Rotation::PiEF) {
    u(1, 1) = 0.0;
    u(2, 2) = 0.0;
    u(1, 2) = 1.0;   // f -> e
    u(2, 1) = -1.0;  // e -> -f
  } else {
    const double r = std::numbers::sqrt2 / 2.0;
    u(0, 0) = r;
    u(1, 0) = r;   // g -> (e + g)/sqrt2
    u(0, 1) = -r;
    u(1, 1) = r;   // e -> (e - g)/sqrt2
  }
  return u;
}

Operator qutrit_rotation(Rotation kind, const SpaceLayout& layout) {
  return embed(qutrit_rotation(kind), Slot::Qutrit, layout);
}

CMatrix measurement_rotation(SchemeVariant v) {
  CMatrix u = qutrit_rotation(Rotation::HalfPiGE);
  if (is_e_aux(v)) u = u * qutrit_rotation(Rotation::PiEF);
  return u;
}

QuantumState apply_qutrit_unitary(const QuantumState& state, const CMatrix& u) {
  const Operator big = embed(u, Slot::Qutrit, state.layout());
  if (state.is_pure()) return QuantumState::pure(state.layout(), big.matrix() * state.vector());
  CMatrix rho = big.matrix() * state.matrix() * big.matrix().adjoint();
  return QuantumState::density(state.layout(), 0.5 * (rho + rho.adjoint()));
}

namespace {

int outcome_level(Branch b) { return b == Branch::Plus ? 1 : 0; }

}  // namespace

double qutrit_outcome_probability(const QuantumState& post_rotation, Branch branch) {
  const SpaceLayout& layout = post_rotation.layout();
  if (!layout.is_full()) throw LayoutMismatchError("qutrit measurement needs the full layout");
  const Index block = static_cast<Index>(layout.fock_a()) * layout.fock_b();
  const Index off = outcome_level(branch) * block;
  const double total = post_rotation.trace();
  if (post_rotation.is_pure()) return post_rotation.vector().segment(off, block).squaredNorm() / total;
  return post_rotation.matrix().block(off, off, block, block).trace().real() / total;
}

Conditional measure_qutrit(const QuantumState& post_rotation, Branch branch) {
  const SpaceLayout& layout = post_rotation.layout();
  const double p = qutrit_outcome_probability(post_rotation, branch);
  if (!(p >= kEmptyBranch)) throw EmptyBranchError("qutrit branch " + to_string(branch) + " has no weight");
  const SpaceLayout cav = SpaceLayout::cavities(layout.fock_a(), layout.fock_b());
  const Index block = cav.dim();
  const Index off = outcome_level(branch) * block;
  if (post_rotation.is_pure()) {
    CVector v = post_rotation.vector().segment(off, block);
    return {QuantumState::pure(cav, v / v.norm()), p};
  }
  CMatrix r = post_rotation.matrix().block(off, off, block, block);
  r /= r.trace().real();
  return {QuantumState::density(cav, r), p};
}

Conditional measure_cavity_reference(const QuantumState& cavities, const CVector& ref) {
  const SpaceLayout& layout = cavities.layout();
  if (layout.has(Slot::Qutrit) || !layout.has(Slot::CavityA) || !layout.has(Slot::CavityB)) {
    throw LayoutMismatchError("reference measurement needs an A (x) B layout");
  }
  const int na = layout.fock_a();
  const int nb = layout.fock_b();
  if (ref.size() != nb) throw InvalidDimensionError("reference state does not match N_B");
  const SpaceLayout out_layout = SpaceLayout::of({Slot::CavityA}, na, nb);
  // R = 1_A (x) <ref|
  CMatrix proj = CMatrix::Zero(na, static_cast<Index>(na) * nb);
  for (int n = 0; n < na; ++n) proj.row(n).segment(static_cast<Index>(n) * nb, nb) = ref.adjoint();
  const double total = cavities.trace();
  if (cavities.is_pure()) {
    CVector v = proj * cavities.vector();
    const double p = v.squaredNorm() / total;
    if (!(p >= kEmptyBranch)) throw EmptyBranchError("reference projection has no weight");
    return {QuantumState::pure(out_layout, v / v.norm()), p};
  }
  CMatrix r = proj * cavities.matrix() * proj.adjoint();
  const double p = r.trace().real() / total;
  if (!(p >= kEmptyBranch)) throw EmptyBranchError("reference projection has no weight");
  r /= r.trace().real();
  return {QuantumState::density(out_layout, 0.5 * (r + r.adjoint())), p};
}

QuantumState ideal_target_state(const ProtocolConfig& config, const SpaceLayout& layout) {
  const SchemeVariant v = config.scheme.variant;
  const CVector& psi = config.input_a;
  const CVector& phi = config.input_b;
  const bool corrected = config.target == TargetConvention::ParityCorrected;
  auto cavities_for = [&](Level x) -> std::pair<CVector, CVector> {
    if (x != swap_level(v)) return {psi, phi};
    if (corrected) return {parity(phi), parity(psi)};
    return {phi, psi};
  };
  const Level partner = partner_level(v);
  const auto [ga, gb] = cavities_for(Level::G);
  const auto [xa, xb] = cavities_for(partner);
  CVector out = std::sin(config.theta) * product_vector(qutrit_state(Level::G), ga, gb) +
                (branch_sign(v) * std::cos(config.theta)) * product_vector(qutrit_state(partner), xa, xb);
  if (out.size() != layout.dim()) throw LayoutMismatchError("target does not match layout");
  return QuantumState::pure(layout, out / out.norm());
}

namespace {

Conditional measured_output(const QuantumState& pre, const ProtocolConfig& config) {
  const QuantumState rotated = apply_qutrit_unitary(pre, measurement_rotation(config.scheme.variant));
  Conditional q = measure_qutrit(rotated, config.branch);
  Conditional c = measure_cavity_reference(q.state, config.ref_state);
  c.probability *= q.probability;
  return c;
}

}  // namespace

ProtocolResult analyze(const ProtocolConfig& config, const QuantumState& evolved) {
  const SpaceLayout& layout = evolved.layout();
  const QuantumState rotated = apply_qutrit_unitary(evolved, measurement_rotation(config.scheme.variant));
  ProtocolResult r{evolved, rotated, 0.0, 0.0, 0.0, std::nullopt, 0.0, 0.0, 0.0, 0.0, {}, {}};
  r.p_plus = qutrit_outcome_probability(rotated, Branch::Plus);
  r.p_minus = qutrit_outcome_probability(rotated, Branch::Minus);
  r.fidelity_vs_ideal = fidelity(ideal_target_state(config, layout), evolved);
  if (!evolved.is_pure()) r.diagnostics = diagnose(evolved.matrix());
  r.post_measurement_fidelity = std::numeric_limits<double>::quiet_NaN();
  try {
    Conditional q = measure_qutrit(rotated, config.branch);
    Conditional c = measure_cavity_reference(q.state, config.ref_state);
    r.p_ref = c.probability;
    r.overall_success_prob = q.probability * c.probability;
    r.output_a = c.state;
  } catch (const EmptyBranchError&) {
    return r;
  }
  try {
    const Conditional ideal = measured_output(ideal_target_state(config, layout), config);
    r.post_measurement_fidelity = fidelity(ideal.state, *r.output_a);
  } catch (const EmptyBranchError&) {
  }
  return r;
}

ProtocolResult run_adder(const ProtocolConfig& config, const ModelParams& params, const SpaceLayout& layout) {
  const QuantumState psi0 = prepare_initial_state(config, layout);
  SwapOutcome swapped = run_controlled_swap(psi0, config, params);
  ProtocolResult r = analyze(config, swapped.state);
  r.protocol_time = swapped.time;
  r.stats = swapped.stats;
  return r;
}

}  // namespace qadder
