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

// Closed and open system time evolution.

#pragma once

#include <array>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "qadder/model.hpp"
#include "qadder/tensor.hpp"

namespace qadder {

enum class Channel { KappaA = 0, KappaB, GammaEG, GammaFE, GammaFG, DephasingE, DephasingF };
inline constexpr int kNumChannels = 7;

std::string to_string(Channel c);

// Collapse operators sqrt(rate) * O with O in
// {a, b, |g><e|, |e><f|, |g><f|, |e><e|, |f><f|}.
struct NoiseSpec {
  std::array<double, kNumChannels> rates{};
  std::array<bool, kNumChannels> enabled{true, true, true, true, true, true, true};

  static NoiseSpec none() { return NoiseSpec{}; }
  static NoiseSpec from_params(const ModelParams& params);

  NoiseSpec only(Channel c) const;
  NoiseSpec without(Channel c) const;
  // Rate if enabled, zero otherwise.
  double rate(Channel c) const;
  bool any() const;
};

struct CollapseOperator {
  Channel channel;
  double rate;
  Operator op;
};

// Enabled channels with non-zero rate.
std::vector<CollapseOperator> collapse_operators(const NoiseSpec& noise, const SpaceLayout& layout);

enum class Method { DormandPrince45, KrylovExponential };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct IntegratorSpec {
  Method method = Method::DormandPrince45;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  // Runge-Kutta steps never exceed this fraction of 2 pi / (fastest phase
  // frequency of a time-dependent Hamiltonian).
  double max_step_fraction = 0.25;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
  int krylov_dim = 30;

  std::string describe() const;
};

// Any of the three ways a Hamiltonian reaches the engines.  The rotating
// frame form is integrated as a static generator and reported back in the
// interaction frame.
using HamiltonianSource = std::variant<Operator, TimeDependentHamiltonian, RotatingFrameHamiltonian>;

const SpaceLayout& layout_of(const HamiltonianSource& h);

// (2 O rho O^dag - O^dag O rho - rho O^dag O) / 2
CMatrix dissipator(const Operator& op, const CMatrix& rho);

CMatrix lindblad_rhs(const HamiltonianSource& h, const NoiseSpec& noise, const CMatrix& rho, double t);

struct Diagnostics {
  double trace_deficit = 0.0;
  double hermiticity_deficit = 0.0;
  double min_eigenvalue = 0.0;
};

Diagnostics diagnose(const CMatrix& rho);

struct EvolutionStats {
  long steps = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

struct MasterTrajectory {
  std::vector<double> times;
  std::vector<QuantumState> states;
  std::vector<Diagnostics> diagnostics;
  EvolutionStats stats;

  const QuantumState& final_state() const { return states.back(); }
};

// Samples default to {0, t_final}.
MasterTrajectory evolve_master(const QuantumState& rho0, const HamiltonianSource& h,
                               const NoiseSpec& noise, double t_final, const IntegratorSpec& spec,
                               std::vector<double> sample_times = {});

// Propagates any hermitian operator under the master equation.  Used for the
// linear decomposition of ancilla-angle sweeps, where the pieces are not
// states themselves.
CMatrix propagate_hermitian(const CMatrix& x0, const HamiltonianSource& h, const NoiseSpec& noise,
                            double t_final, const IntegratorSpec& spec, EvolutionStats* stats = nullptr);

QuantumState evolve_unitary(const QuantumState& psi0, const HamiltonianSource& h, double t_final,
                            const IntegratorSpec& spec, EvolutionStats* stats = nullptr);

}  // namespace qadder
