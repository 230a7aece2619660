// Copyright 2026 The qbattery Authors
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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qbattery.hpp"

namespace {

using namespace qbattery;

int run_single(int n_b, int ratio, std::optional<double> temperature, std::optional<double> nbar,
               double omega, double gamma, const GridSettings& grid, Index max_dim,
               const std::string& trajectory_path) {
  ThermalSpec thermal = Temperature{temperature.value_or(0.0)};
  if (nbar) thermal = MeanOccupation{*nbar};
  const PointResult res = run_point(n_b, ratio, thermal, omega, gamma, grid, max_dim);
  for (const auto& w : res.spec.validate()) std::cerr << "warning: " << w << '\n';

  if (!trajectory_path.empty()) {
    std::ofstream out(trajectory_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + trajectory_path);
    write_trajectory_csv(out, res.records);
  }
  write_summary_csv(std::cout, {res.row});
  std::cerr << "max trace error " << res.max_trace_error << ", min eigenvalue "
            << res.min_eigenvalue << '\n';
  if (!res.row.error.empty()) std::cerr << "warning: " << res.row.error << '\n';
  return res.row.converged ? 0 : 2;
}

int run_oracle(double nbar, double omega, double gamma) {
  const ComplexMatrix ss = oracle::two_spin_steady_state(nbar, 0.5);
  SystemSpec spec;
  spec.omega = omega;
  spec.gamma = gamma;
  spec.thermal = MeanOccupation{nbar};
  const ComplexMatrix ss_product = oracle::TripletBasis::to_product(ss);

  std::printf("nbar %.17g\n", nbar);
  std::printf("steady_state_diagonal");
  for (int k = 0; k < 4; ++k) std::printf(" %.17g", ss(k, k).real());
  std::printf("\n");
  std::printf("jz_expectation %.17g\n", oracle::two_spin_jz_expectation(nbar));
  std::printf("battery_energy_density %.17g\n",
              energy_density(ss_product, Subsystem::kBattery, spec));
  std::printf("log_negativity %.17g\n", log_negativity(ss_product, spec));
  std::printf("ergotropy_density %.17g\n", ergotropy_density(ss_product, spec));

  auto print_table = [](const char* title, const oracle::RateTable& table) {
    std::printf("%s\n", title);
    for (const auto& [target, terms] : table.equations) {
      std::printf("  d rho%d%d/dt =", target.first, target.second);
      if (terms.empty()) std::printf(" 0");
      for (const auto& [source, c] : terms) {
        std::printf(" (%+.12g%+.12gi) rho%d%d", c.real(), c.imag(), source.first, source.second);
      }
      std::printf("\n");
    }
  };
  print_table("rate_table_reference", oracle::two_spin_rate_matrix(nbar, gamma, omega));
  print_table("rate_table_generator", oracle::two_spin_master_equation_table(nbar, gamma, omega));
  return 0;
}

int run_selftest_cmd() {
  int failed = 0;
  for (const auto& r : run_selftest()) {
    std::printf("[%s] %s (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.passed) ++failed;
  }
  std::printf("%d check(s) failed\n", failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective-spin open quantum battery simulator"};
  app.require_subcommand(1);

  GridSettings grid;
  double omega = 1.0;
  double gamma = 1.0;
  long long max_dim = 200;

  auto* run = app.add_subcommand("run", "Simulate a single (n_b, R, T) point");
  int n_b = 1;
  int ratio = 1;
  std::optional<double> temperature;
  std::optional<double> nbar;
  std::string trajectory_path;
  run->add_option("--nb", n_b, "Battery spins N_B")->required()->check(CLI::PositiveNumber);
  run->add_option("--ratio,-r", ratio, "Charger/battery ratio R (N_C = R N_B)")
      ->required()
      ->check(CLI::PositiveNumber);
  auto* t_opt = run->add_option("--temperature,-T", temperature, "Temperature in units of omega")
                    ->check(CLI::NonNegativeNumber);
  run->add_option("--nbar", nbar, "Reservoir occupation (instead of --temperature)")
      ->check(CLI::NonNegativeNumber)
      ->excludes(t_opt);
  run->add_option("--omega", omega, "Spin frequency");
  run->add_option("--gamma", gamma, "Damping rate");
  run->add_option("--t-end", grid.t_end, "Trajectory length in 1/gamma");
  run->add_option("--dt", grid.sample_interval, "Sample interval in 1/gamma");
  run->add_option("--tolerance", grid.ss_tolerance, "Steady-state residual tolerance");
  run->add_option("--t-cap", grid.t_cap, "Give up on the steady state after this time");
  run->add_option("--max-dim", max_dim, "Largest joint Hilbert-space dimension allowed");
  run->add_option("--trajectory,-o", trajectory_path, "Write the trajectory CSV here");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a config file");
  std::string config_path;
  unsigned jobs = 1;
  long long sweep_max_dim = 200;
  sweep->add_option("config", config_path, "Sweep config (key = value)")->required();
  sweep->add_option("--jobs,-j", jobs, "Points simulated concurrently")->check(CLI::PositiveNumber);
  sweep->add_option("--max-dim", sweep_max_dim, "Largest joint Hilbert-space dimension allowed");

  auto* orc = app.add_subcommand("oracle", "Print closed-form two-spin values");
  double oracle_nbar = 0.0;
  orc->add_option("--nbar", oracle_nbar, "Reservoir occupation")->check(CLI::NonNegativeNumber);
  orc->add_option("--omega", omega, "Spin frequency");
  orc->add_option("--gamma", gamma, "Damping rate");

  app.add_subcommand("selftest", "Run the built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return run_single(n_b, ratio, temperature, nbar, omega, gamma, grid,
                        static_cast<Index>(max_dim), trajectory_path);
    }
    if (*sweep) {
      SweepConfig cfg = load_sweep_config(config_path, static_cast<Index>(sweep_max_dim));
      cfg.jobs = jobs;
      const SweepReport report = run_sweep(cfg);
      std::cout << "wrote " << report.trajectory_files.size() << " trajectories and "
                << report.summary_file.string() << '\n';
      for (const auto& row : report.rows) {
        if (!row.error.empty()) {
          std::cerr << "point n_b=" << row.n_b << " r=" << row.r << " T=" << row.temperature
                    << ": " << row.error << '\n';
        }
      }
      return report.failures == 0 ? 0 : 2;
    }
    if (*orc) return run_oracle(oracle_nbar, omega, gamma);
    return run_selftest_cmd();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
