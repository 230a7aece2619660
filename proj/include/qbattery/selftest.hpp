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

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qbattery/dynamics.hpp"
#include "qbattery/lindblad.hpp"
#include "qbattery/observables.hpp"
#include "qbattery/oracle.hpp"
#include "qbattery/spinops.hpp"

namespace qbattery {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Random Hermitian, positive, unit-trace matrix from a fixed-seed generator.
inline ComplexMatrix random_density_matrix(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ComplexMatrix a(dim, dim);
  for (Index c = 0; c < dim; ++c) {
    for (Index r = 0; r < dim; ++r) a(r, c) = Complex(normal(rng), normal(rng));
  }
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

namespace detail {

inline std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline SystemSpec two_spin_spec(double nbar, double omega = 1.0) {
  SystemSpec s;
  s.n_b = 1;
  s.n_c = 1;
  s.omega = omega;
  s.thermal = MeanOccupation{nbar};
  return s;
}

}  // namespace detail

/// Fast invariant suite behind `qbattery selftest`. Deterministic; takes a
/// few seconds.
inline std::vector<CheckResult> run_selftest() {
  std::vector<CheckResult> out;
  auto check = [&out](std::string name, const std::function<std::pair<bool, std::string>()>& fn) {
    CheckResult r;
    r.name = std::move(name);
    try {
      auto [ok, detail] = fn();
      r.passed = ok;
      r.detail = std::move(detail);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(r));
  };

  check("su(2) algebra of collective operators, N = 1..8", [] {
    double worst = 0.0;
    for (int n = 1; n <= 8; ++n) {
      const auto ops = build_collective_ops(n);
      worst = std::max(worst, max_abs(commutator(ops.jz, ops.jplus) - ops.jplus));
      worst = std::max(worst, max_abs(commutator(ops.jplus, ops.jminus) - 2.0 * ops.jz));
    }
    return std::pair{worst < 1e-12, "max error " + detail::sci(worst)};
  });

  check("charger and battery operators commute", [] {
    const auto j = build_joint_ops(3, 2);
    double worst = max_abs(commutator(j.jplus_c, j.jminus_b));
    worst = std::max(worst, max_abs(commutator(j.jz_c, j.jplus_b)));
    worst = std::max(worst, max_abs(commutator(j.jminus_c, j.jz_b)));
    return std::pair{worst < 1e-12, "max error " + detail::sci(worst)};
  });

  check("generator preserves trace and Hermiticity", [] {
    std::mt19937_64 rng(7);
    double worst_trace = 0.0;
    double worst_herm = 0.0;
    for (auto [nc, nb, nbar] : {std::tuple{1, 1, 0.0}, {2, 1, 0.5}, {4, 2, 1.0}, {6, 3, 0.0}}) {
      SystemSpec s;
      s.n_c = nc;
      s.n_b = nb;
      s.thermal = MeanOccupation{nbar};
      const Generator gen(s);
      const ComplexMatrix d = gen.apply(random_density_matrix(gen.dim(), rng));
      worst_trace = std::max(worst_trace, std::abs(d.trace()));
      worst_herm = std::max(worst_herm, hermiticity_error(d));
    }
    return std::pair{worst_trace < 1e-12 && worst_herm < 1e-12,
                     "trace " + detail::sci(worst_trace) + ", hermiticity " +
                         detail::sci(worst_herm)};
  });

  check("sparse generator matches dense Lindblad formula", [] {
    std::mt19937_64 rng(11);
    SystemSpec s;
    s.n_c = 3;
    s.n_b = 2;
    s.omega = 1.7;
    s.thermal = MeanOccupation{0.3};
    const Generator gen(s);
    const ComplexMatrix rho = random_density_matrix(gen.dim(), rng);
    const double n = gen.nbar();
    const ComplexMatrix dense = -kI * commutator(gen.hamiltonian(), rho) +
                                s.gamma * ((n + 1.0) * dissipator(gen.jump_down(), rho) +
                                           n * dissipator(gen.jump_up(), rho));
    const double err = max_abs(gen.apply(rho) - dense);
    return std::pair{err < 1e-12, "max error " + detail::sci(err)};
  });

  check("dark state psi_minus is stationary at T = 0", [] {
    const Generator gen(detail::two_spin_spec(0.0));
    const auto psi = oracle::TripletBasis::vector(3);
    const double err = gen.apply(psi * psi.adjoint()).norm();
    return std::pair{err < 1e-12, "norm " + detail::sci(err)};
  });

  check("two-spin generator matches hand-derived rate table", [] {
    double worst = 0.0;
    for (double nbar : {0.0, 0.1, 1.0, 10.0}) {
      const Generator gen(detail::two_spin_spec(nbar, 1.3));
      const auto numeric =
          oracle::extract_rate_table([&gen](const ComplexMatrix& m) { return gen.apply(m); });
      const auto hand = oracle::two_spin_master_equation_table(nbar, 1.0, 1.3);
      for (const auto& m : oracle::compare_rate_tables(hand, numeric, 0.0)) {
        worst = std::max(worst, std::abs(m.expected - m.actual));
      }
    }
    return std::pair{worst < 1e-12, "max coefficient error " + detail::sci(worst)};
  });

  check("two-spin steady states match closed form", [] {
    double worst = 0.0;
    for (double nbar : {0.0, 0.1, 1.0, 10.0}) {
      const SystemSpec s = detail::two_spin_spec(nbar);
      const Generator gen(s);
      SystemSpec start = s;
      start.thermal = Temperature{0.0};
      const auto ss = steady_state(gen, initial_state(start));
      const ComplexMatrix expected =
          oracle::TripletBasis::to_product(oracle::two_spin_steady_state(nbar, 0.5));
      worst = std::max(worst, trace_distance(ss.rho_ss, expected));
    }
    return std::pair{worst < 1e-7, "max trace distance " + detail::sci(worst)};
  });

  check("log negativity of reference states", [] {
    const SystemSpec s = detail::two_spin_spec(0.0);
    const auto psi = oracle::TripletBasis::vector(3);
    const double singlet = log_negativity(psi * psi.adjoint(), s);
    const ComplexMatrix ss = oracle::TripletBasis::to_product(oracle::two_spin_steady_state(0, 0.5));
    const double mixed = log_negativity(ss, s);
    const double expected = std::log2(0.5 + 1.0 / std::sqrt(2.0));
    const bool ok = std::abs(singlet - 1.0) < 1e-10 && std::abs(mixed - expected) < 1e-9;
    return std::pair{ok, "singlet " + std::to_string(singlet) + ", steady " + std::to_string(mixed)};
  });

  check("trajectories stay trace one and positive", [] {
    double trace_err = 0.0;
    double min_eig = 1.0;
    for (double temp : {0.0, 2.0}) {
      SystemSpec s;
      s.n_b = 2;
      s.n_c = 4;
      s.thermal = Temperature{temp};
      const Generator gen(s);
      const auto traj = evolve(gen, initial_state(s), 10.0, 0.05);
      trace_err = std::max(trace_err, traj.max_trace_error());
      min_eig = std::min(min_eig, traj.min_eigenvalue());
    }
    return std::pair{trace_err < 1e-9 && min_eig > -1e-8,
                     "trace error " + detail::sci(trace_err) + ", min eigenvalue " +
                         detail::sci(min_eig)};
  });

  check("observables do not depend on omega", [] {
    double worst = 0.0;
    std::vector<ObservableRecord> reference;
    for (double omega : {0.5, 1.0, 5.0}) {
      SystemSpec s;
      s.n_b = 2;
      s.n_c = 4;
      s.omega = omega;
      s.thermal = MeanOccupation{0.5};
      const Generator gen(s);
      SystemSpec start = s;
      start.thermal = MeanOccupation{0.5};
      const auto recs = observe_trajectory(gen, evolve(gen, initial_state(start), 2.0, 0.05));
      if (reference.empty()) {
        reference = recs;
        continue;
      }
      for (std::size_t k = 0; k < recs.size(); ++k) {
        worst = std::max({worst, std::abs(recs[k].e_b - reference[k].e_b),
                          std::abs(recs[k].e_c - reference[k].e_c),
                          std::abs(recs[k].p_b - reference[k].p_b),
                          std::abs(recs[k].s_b - reference[k].s_b),
                          std::abs(recs[k].w_closed - reference[k].w_closed)});
      }
    }
    return std::pair{worst < 1e-8, "max deviation " + detail::sci(worst)};
  });

  return out;
}

}  // namespace qbattery
