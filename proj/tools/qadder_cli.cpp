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

// Command line front end: run a registered or configured scenario and emit
// CSV or JSON.
//
// Exit codes: 0 ok, 1 configuration error, 2 numerical failure in at least
// one point, 3 reference check violated (--check).

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qadder/errors.hpp"
#include "qadder/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitCheck = 3;

struct RunArgs {
  std::string scenario;
  std::string config;
  std::optional<int> theta_steps;
  std::optional<double> k;
  std::optional<int> truncation;
  std::optional<std::string> hamiltonian;
  std::optional<std::string> unit_convention;
  std::optional<std::string> target;
  std::optional<std::string> engine;
  std::optional<std::string> noise;
  std::optional<double> rel_tol;
  std::string out;
  std::string format = "csv";
  int threads = 1;
  long seed = 0;
  bool check = false;
  bool direct = false;
  bool progress = false;
};

qadder::Scenario build_scenario(const RunArgs& a) {
  using namespace qadder;
  Scenario s = a.config.empty() ? find_scenario(a.scenario) : load_config_file(a.config);
  if (a.theta_steps) s.theta.steps = *a.theta_steps;
  if (a.k) s.k_values = {*a.k};
  if (a.truncation) s.truncation = *a.truncation;
  if (a.hamiltonian) s.hamiltonian = parse_hamiltonian_path(*a.hamiltonian);
  if (a.unit_convention) s.unit_convention = parse_unit_convention(*a.unit_convention);
  if (a.target) s.target = parse_target_convention(*a.target);
  if (a.engine) s.integrator.method = parse_method(*a.engine);
  if (a.noise) s.noise = (*a.noise == "on");
  if (a.rel_tol) s.integrator.rel_tol = *a.rel_tol;
  s.validate();
  return s;
}

int run(const RunArgs& a) {
  using namespace qadder;
  Scenario s;
  try {
    s = build_scenario(a);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  SweepOptions opts;
  opts.threads = a.threads;
  opts.decompose = !a.direct;
  if (a.progress) opts.progress = [](const std::string& msg) { std::cerr << msg << "\n"; };

  SweepResult result = run_scenario(s, opts);
  result.metadata["seed"] = std::to_string(a.seed);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) {
      std::cerr << "cannot write '" << a.out << "'\n";
      return kExitConfig;
    }
    os = &file;
  }
  if (a.format == "json") {
    write_json(*os, result);
  } else {
    write_csv(*os, result);
  }

  if (result.has_errors()) {
    for (const SweepRow& r : result.rows) {
      if (r.error) std::cerr << "point theta=" << r.theta << " k=" << r.k << " failed: " << *r.error << "\n";
    }
    return kExitNumerical;
  }
  if (a.check) {
    const auto outcomes = check_expectations(s, result);
    if (outcomes.empty()) std::cerr << "no reference values registered for " << s.id << "\n";
    bool ok = true;
    for (const CheckOutcome& c : outcomes) {
      std::cerr << (c.pass ? "PASS " : "FAIL ") << s.id << " " << c.label << ": " << std::setprecision(6)
                << c.value << " (reference " << c.expected << ")\n";
      ok = ok && c.pass;
    }
    if (!ok) return kExitCheck;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qadder: probabilistic quantum adder with a transmon qutrit and two cavities"};
  app.require_subcommand(1);

  RunArgs a;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario sweep");
  auto* src = run_cmd->add_option_group("source");
  src->add_option("--scenario", a.scenario, "Registered scenario id (see 'list')");
  src->add_option("--config", a.config, "Scenario file (see 'example-config')")->check(CLI::ExistingFile);
  src->require_option(1);
  run_cmd->add_option("--theta-steps", a.theta_steps, "Number of theta grid points")->check(CLI::PositiveNumber);
  run_cmd->add_option("--k", a.k, "Single decay scale k")->check(CLI::PositiveNumber);
  run_cmd->add_option("--truncation", a.truncation, "Fock truncation per cavity")->check(CLI::PositiveNumber);
  run_cmd->add_option("--hamiltonian", a.hamiltonian, "effective|full")
      ->check(CLI::IsMember({"effective", "full"}));
  run_cmd->add_option("--unit-convention", a.unit_convention, "angular|cyclic")
      ->check(CLI::IsMember({"angular", "cyclic"}));
  run_cmd->add_option("--target", a.target, "as-printed|parity-corrected")
      ->check(CLI::IsMember({"as-printed", "parity-corrected"}));
  run_cmd->add_option("--engine", a.engine, "krylov|dopri5")->check(CLI::IsMember({"krylov", "dopri5", "rk45"}));
  run_cmd->add_option("--noise", a.noise, "on|off")->check(CLI::IsMember({"on", "off"}));
  run_cmd->add_option("--rel-tol", a.rel_tol, "Integrator relative tolerance")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", a.out, "Output file (default stdout)");
  run_cmd->add_option("--format", a.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", a.seed, "Reserved; nothing is stochastic");
  run_cmd->add_flag("--check", a.check, "Compare against registered reference values");
  run_cmd->add_flag("--direct", a.direct, "Evolve every theta separately");
  run_cmd->add_flag("--progress", a.progress, "Report finished groups on stderr");

  auto* list_cmd = app.add_subcommand("list", "List registered scenarios");
  auto* example_cmd = app.add_subcommand("example-config", "Print an annotated scenario file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  if (list_cmd->parsed()) {
    for (const auto& s : qadder::scenario_registry()) {
      std::cout << std::left << std::setw(18) << s.id << " " << std::setw(14) << qadder::to_string(s.sweep)
                << s.description << "\n";
    }
    return kExitOk;
  }
  if (example_cmd->parsed()) {
    std::cout << qadder::annotated_example_config();
    return kExitOk;
  }
  try {
    return run(a);
  } catch (const qadder::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
