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

// Scenario registry, sweeps over ancilla angle, crosstalk and coupling
// inhomogeneity, and CSV/JSON emission.

#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qadder/dynamics.hpp"
#include "qadder/model.hpp"
#include "qadder/protocol.hpp"

namespace qadder {

enum class SweepKind { Theta, Crosstalk, Inhomogeneity };

std::string to_string(SweepKind k);
SweepKind parse_sweep_kind(const std::string& s);

struct Grid {
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;  // inclusive of both ends when steps > 1

  std::vector<double> points() const;
};

// Published statistics a scenario is checked against in --check mode.
struct Expectations {
  // One per crosstalk level (or a single entry).
  std::vector<double> averages;
  std::optional<double> minimum;
  // Restricts the minimum to c in [lo, hi] for inhomogeneity sweeps.
  std::optional<std::pair<double, double>> minimum_c_band;
  double tolerance = 0.015;
};

struct Scenario {
  std::string id;
  std::string description;
  SweepKind sweep = SweepKind::Theta;
  Scheme scheme;
  TimingRule timing = TimingRule::BothConditions;

  Grid theta{0.0, 2.0 * 3.14159265358979323846, 64};
  std::vector<double> k_values{10.0};
  std::vector<double> g_ab_over_g{0.0};
  Grid c{1.0, 1.0, 1};

  // Quoted in MHz, read through unit_convention.
  double anharm_mhz = 115.0;
  double chi_mhz = 1.0;
  UnitConvention unit_convention = UnitConvention::Cyclic;

  // Lifetimes in us.  Cavity lifetimes scale with k.
  double kappa_a_life_per_k = 1.5;
  double kappa_b_life_per_k = 1.0;
  double gamma_phi_e_life = 15.0;
  double gamma_phi_f_life = 10.0;
  double gamma_eg_life = 50.0;
  double gamma_fe_life = 25.0;
  double gamma_fg_life = 100.0;
  bool noise = true;

  // |psi>_A = |alpha>, |phi>_B = |-beta>.
  double input_alpha = 0.1;
  double input_beta = 0.1;
  // vacuum, fock:<n> or coherent:<amplitude>
  std::string reference = "vacuum";
  Branch branch = Branch::Plus;
  TargetConvention target = TargetConvention::AsPrinted;

  int truncation = 8;
  HamiltonianPath hamiltonian = HamiltonianPath::Full;
  IntegratorSpec integrator = default_integrator();

  std::optional<Expectations> expected;

  static IntegratorSpec default_integrator();
  // Throws ConfigError.
  void validate() const;
};

const std::vector<Scenario>& scenario_registry();
const Scenario& find_scenario(const std::string& id);

// key = value lines, '#' comments, unknown keys rejected.  Unset keys keep
// the values of `base` (by default a fig4a-like scenario).
Scenario parse_config(const std::string& text, const Scenario& base);
Scenario parse_config(const std::string& text);
Scenario load_config_file(const std::string& path);
std::string annotated_example_config();

ModelParams model_params(const Scenario& s, double k, double g_ab_over_g, double c);
SpaceLayout scenario_layout(const Scenario& s);
CVector reference_state(const Scenario& s);
// Noise is left unset: the rates depend on (k, g_AB, c), see model_params.
ProtocolConfig protocol_config(const Scenario& s, double theta);

struct SweepRow {
  std::string scenario;
  double theta = 0.0;
  double k = 0.0;
  double g_ab_over_g = 0.0;
  double c = 1.0;
  double fidelity = 0.0;
  double p_plus = 0.0;
  double p_minus = 0.0;
  double p_ref = 0.0;
  double post_measurement_fidelity = 0.0;
  double trace_deficit = 0.0;
  double hermiticity_deficit = 0.0;
  double min_eig = 0.0;
  double wall_time = 0.0;
  std::optional<std::string> error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::map<std::string, std::string> metadata;

  bool has_errors() const;
};

struct SweepOptions {
  int threads = 1;
  // Build each angle from three evolutions that are linear in the initial
  // state instead of evolving every angle separately.
  bool decompose = true;
  std::function<void(const std::string&)> progress;
};

SweepResult run_theta_sweep(const Scenario& s, const SweepOptions& opts = {});
SweepResult run_crosstalk_sweep(const Scenario& s, const SweepOptions& opts = {});
SweepResult run_inhomogeneity_sweep(const Scenario& s, const SweepOptions& opts = {});
SweepResult run_scenario(const Scenario& s, const SweepOptions& opts = {});

struct RowFilter {
  std::optional<std::string> scenario;
  std::optional<double> k;
  std::optional<double> g_ab_over_g;
  std::optional<double> c;
  std::optional<std::pair<double, double>> c_band;

  bool matches(const SweepRow& r) const;
};

// Mean fidelity over the matching rows; throws on an empty selection or when
// a matching row failed.
double average_fidelity(const SweepResult& result, const RowFilter& filter = {});
double minimum_fidelity(const SweepResult& result, const RowFilter& filter = {});

struct CheckOutcome {
  std::string label;
  double value = 0.0;
  double expected = 0.0;
  bool pass = false;
};
std::vector<CheckOutcome> check_expectations(const Scenario& s, const SweepResult& result);

void write_csv(std::ostream& os, const SweepResult& result);
void write_json(std::ostream& os, const SweepResult& result);

}  // namespace qadder
