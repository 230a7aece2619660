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

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qbattery/dynamics.hpp"
#include "qbattery/linalg.hpp"
#include "qbattery/lindblad.hpp"

namespace qbattery {

enum class Subsystem { kCharger, kBattery };

namespace detail {

inline void check_joint(const ComplexMatrix& rho, const SystemSpec& spec, const char* what) {
  const Index d = static_cast<Index>(spec.n_c + 1) * (spec.n_b + 1);
  if (rho.rows() != d || rho.cols() != d) {
    throw std::invalid_argument(std::string(what) + ": expected joint dimension " +
                                std::to_string(d));
  }
}

/// ⟨J^z⟩ of one subsystem from the diagonal of the joint state.
inline double jz_expectation(const ComplexMatrix& rho, Subsystem which, const SystemSpec& spec) {
  const Index db = spec.n_b + 1;
  const double jc = 0.5 * spec.n_c;
  const double jb = 0.5 * spec.n_b;
  double out = 0.0;
  for (Index i = 0; i < rho.rows(); ++i) {
    const double m = which == Subsystem::kCharger ? jc - static_cast<double>(i / db)
                                                  : jb - static_cast<double>(i % db);
    out += m * rho(i, i).real();
  }
  return out;
}

}  // namespace detail

/// ⟨J_i^z⟩/N_i + 1/2, in units of ω.
inline double energy_density(const ComplexMatrix& rho, Subsystem which, const SystemSpec& spec) {
  detail::check_joint(rho, spec, "energy_density");
  const int n = which == Subsystem::kCharger ? spec.n_c : spec.n_b;
  return detail::jz_expectation(rho, which, spec) / n + 0.5;
}

/// N_B · ℰ_B evaluated on a converged steady state.
inline double capacity(const ComplexMatrix& rho_ss, const SystemSpec& spec) {
  return spec.n_b * energy_density(rho_ss, Subsystem::kBattery, spec);
}

/// (1/N_B) Tr(J_B^z · dρ/dt), in units of ω·γ.
inline double power_density(const Generator& gen, const ComplexMatrix& rho,
                            const SystemSpec& spec) {
  detail::check_joint(rho, spec, "power_density");
  const ComplexVector diag = gen.apply_diagonal(rho);
  const Index db = spec.n_b + 1;
  const double jb = 0.5 * spec.n_b;
  double out = 0.0;
  for (Index i = 0; i < diag.size(); ++i) {
    out += (jb - static_cast<double>(i % db)) * diag(i).real();
  }
  return out / spec.n_b;
}

inline ComplexMatrix partial_trace_charger(const ComplexMatrix& rho, const SystemSpec& spec) {
  detail::check_joint(rho, spec, "partial_trace_charger");
  const Index dc = spec.n_c + 1;
  const Index db = spec.n_b + 1;
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (Index c = 0; c < dc; ++c) out += rho.block(c * db, c * db, db, db);
  return out;
}

inline ComplexMatrix partial_trace_battery(const ComplexMatrix& rho, const SystemSpec& spec) {
  detail::check_joint(rho, spec, "partial_trace_battery");
  const Index dc = spec.n_c + 1;
  const Index db = spec.n_b + 1;
  ComplexMatrix out = ComplexMatrix::Zero(dc, dc);
  for (Index r = 0; r < dc; ++r) {
    for (Index c = 0; c < dc; ++c) out(r, c) = rho.block(r * db, c * db, db, db).trace();
  }
  return out;
}

/// Battery ergotropy per spin. The passive state pairs the eigenvalues of
/// ρ_B in descending order with the levels of J_B^z/N_B in ascending order.
inline double ergotropy_density(const ComplexMatrix& rho, const SystemSpec& spec) {
  const ComplexMatrix rho_b = partial_trace_charger(rho, spec);
  RealVector pops = hermitian_eigenvalues(rho_b);  // ascending
  std::reverse(pops.data(), pops.data() + pops.size());
  const double jb = 0.5 * spec.n_b;
  double passive = 0.5;
  for (Index k = 0; k < pops.size(); ++k) {
    const double level = (-jb + static_cast<double>(k)) / spec.n_b;
    passive += pops(k) * level;
  }
  const double energy = energy_density(rho, Subsystem::kBattery, spec);
  return std::max(0.0, energy - passive);
}

/// Energy density of the battery Gibbs state at the reservoir temperature.
inline double thermal_energy_density(const SystemSpec& spec) {
  const ComplexMatrix gibbs = ladder_gibbs_state(spec.n_b, spec.boltzmann_ratio());
  const double jb = 0.5 * spec.n_b;
  double jz = 0.0;
  for (Index k = 0; k < gibbs.rows(); ++k) jz += (jb - static_cast<double>(k)) * gibbs(k, k).real();
  return jz / spec.n_b + 0.5;
}

/// ℰ_B − ℰ_B^th; equals ℰ_B at T = 0.
inline double work_open(const ComplexMatrix& rho, const SystemSpec& spec) {
  return energy_density(rho, Subsystem::kBattery, spec) - thermal_energy_density(spec);
}

inline ComplexMatrix partial_transpose_battery(const ComplexMatrix& rho, const SystemSpec& spec) {
  detail::check_joint(rho, spec, "partial_transpose_battery");
  const Index dc = spec.n_c + 1;
  const Index db = spec.n_b + 1;
  ComplexMatrix out(rho.rows(), rho.cols());
  for (Index r = 0; r < dc; ++r) {
    for (Index c = 0; c < dc; ++c) {
      out.block(r * db, c * db, db, db) = rho.block(r * db, c * db, db, db).transpose();
    }
  }
  return out;
}

inline ComplexMatrix partial_transpose_charger(const ComplexMatrix& rho, const SystemSpec& spec) {
  detail::check_joint(rho, spec, "partial_transpose_charger");
  const Index dc = spec.n_c + 1;
  const Index db = spec.n_b + 1;
  ComplexMatrix out(rho.rows(), rho.cols());
  for (Index r = 0; r < dc; ++r) {
    for (Index c = 0; c < dc; ++c) {
      out.block(c * db, r * db, db, db) = rho.block(r * db, c * db, db, db);
    }
  }
  return out;
}

/// log₂‖ρ^{Γ_B}‖₁ across the charger/battery cut.
inline double log_negativity(const ComplexMatrix& rho, const SystemSpec& spec) {
  return std::max(0.0, std::log2(trace_norm(partial_transpose_battery(rho, spec))));
}

/// Central differences in the interior, one-sided at the two ends. The grid
/// must be uniform.
inline std::vector<double> finite_difference(const std::vector<double>& times,
                                             const std::vector<double>& values) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("finite_difference: series length mismatch");
  }
  const std::size_t n = times.size();
  if (n < 3) throw std::invalid_argument("finite_difference: need at least 3 samples");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw std::invalid_argument("finite_difference: times must increase");
  for (std::size_t k = 1; k < n; ++k) {
    const double step = times[k] - times[k - 1];
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(times[k]))) {
      throw std::invalid_argument("finite_difference: non-uniform grid");
    }
  }
  std::vector<double> out(n);
  out[0] = (values[1] - values[0]) / dt;
  out[n - 1] = (values[n - 1] - values[n - 2]) / dt;
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (values[k + 1] - values[k - 1]) / (2.0 * dt);
  return out;
}

/// dS_B/dt along a sampled series of log-negativity values.
inline std::vector<double> entanglement_rate(const std::vector<double>& times,
                                             const std::vector<double>& s_b) {
  return finite_difference(times, s_b);
}

struct ObservableRecord {
  double t = 0.0;
  double e_c = 0.0;
  double e_b = 0.0;
  double p_b = 0.0;
  double s_b = 0.0;
  double sdot_b = 0.0;
  double w_closed = 0.0;
  double w_open = 0.0;
};

/// Every observable at one instant; sdot_b is left at zero (it needs the
/// neighbouring samples).
inline ObservableRecord observe(const Generator& gen, const ComplexMatrix& rho, double t) {
  const SystemSpec& spec = gen.spec();
  ObservableRecord r;
  r.t = t;
  r.e_c = energy_density(rho, Subsystem::kCharger, spec);
  r.e_b = energy_density(rho, Subsystem::kBattery, spec);
  r.p_b = power_density(gen, rho, spec);
  r.s_b = log_negativity(rho, spec);
  r.w_closed = ergotropy_density(rho, spec);
  r.w_open = r.e_b - thermal_energy_density(spec);
  return r;
}

inline std::vector<ObservableRecord> observe_trajectory(const Generator& gen,
                                                        const Trajectory& traj) {
  std::vector<ObservableRecord> out;
  out.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out.push_back(observe(gen, traj.matrix(k), traj.times[k]));
  }
  if (out.size() >= 3) {
    std::vector<double> s(out.size());
    std::transform(out.begin(), out.end(), s.begin(), [](const auto& r) { return r.s_b; });
    // Truncated or ragged final intervals fall back to the uniform part.
    std::vector<double> times = traj.times;
    std::size_t uniform = times.size();
    const double dt = times[1] - times[0];
    while (uniform >= 3 &&
           std::abs((times[uniform - 1] - times[uniform - 2]) - dt) > 1e-9 * std::max(1.0, times[uniform - 1])) {
      --uniform;
    }
    if (uniform >= 3) {
      times.resize(uniform);
      s.resize(uniform);
      const auto rate = entanglement_rate(times, s);
      for (std::size_t k = 0; k < uniform; ++k) out[k].sdot_b = rate[k];
      for (std::size_t k = uniform; k < out.size(); ++k) {
        out[k].sdot_b = (out[k].s_b - out[k - 1].s_b) / (out[k].t - out[k - 1].t);
      }
    }
  }
  return out;
}

}  // namespace qbattery
