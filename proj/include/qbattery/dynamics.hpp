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
#include <limits>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseLU>

#include "qbattery/linalg.hpp"
#include "qbattery/lindblad.hpp"

namespace qbattery {

struct DensityTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-9;
  double min_eigenvalue = -1e-8;
};

/// Hermitian, unit-trace, positive semidefinite matrix. Construction checks
/// the invariants and throws; nothing is ever projected back onto them.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  explicit DensityMatrix(ComplexMatrix m, const DensityTolerances& tol = {})
      : m_(std::move(m)) {
    require_square(m_, "DensityMatrix");
    if (m_.rows() == 0) throw std::invalid_argument("DensityMatrix: empty matrix");
    const double herm = hermiticity_error(m_);
    if (herm > tol.hermiticity) {
      throw std::invalid_argument("DensityMatrix: not Hermitian (error " + std::to_string(herm) +
                                  ")");
    }
    const double tr = std::abs(m_.trace() - Complex{1.0, 0.0});
    if (tr > tol.trace) {
      throw std::invalid_argument("DensityMatrix: trace differs from 1 by " + std::to_string(tr));
    }
    const double lo = min_eigenvalue(m_);
    if (lo < tol.min_eigenvalue) {
      throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(lo));
    }
  }

  /// Wraps an evolved state without checking; used for trajectory samples
  /// whose diagnostics are recorded separately.
  static DensityMatrix unchecked(ComplexMatrix m) {
    DensityMatrix out;
    out.m_ = std::move(m);
    return out;
  }

  static DensityMatrix pure(const ComplexVector& psi) {
    const ComplexVector v = psi / psi.norm();
    return DensityMatrix(v * v.adjoint());
  }

  const ComplexMatrix& matrix() const { return m_; }
  operator const ComplexMatrix&() const { return m_; }
  Index dim() const { return m_.rows(); }
  Complex operator()(Index r, Index c) const { return m_(r, c); }

 private:
  ComplexMatrix m_;
};

/// Gibbs state exp(-ω J^z / T)/Z on a single Dicke ladder, written through
/// the level ratio n̄/(n̄+1) so that T = 0 gives the exact ground state.
inline ComplexMatrix ladder_gibbs_state(int n_spins, double boltzmann_ratio) {
  const Index dim = n_spins + 1;
  RealVector pops(dim);
  // index dim-1 is the ground state m = -j
  double w = 1.0;
  for (Index k = dim - 1; k >= 0; --k) {
    pops(k) = w;
    w *= boltzmann_ratio;
  }
  pops /= pops.sum();
  return pops.cast<Complex>().asDiagonal();
}

/// Charger in its top Dicke state |j_C, +j_C⟩, battery in equilibrium with
/// the reservoir on its Dicke ladder.
inline DensityMatrix initial_state(const SystemSpec& spec) {
  spec.validate();
  ComplexMatrix charger = ComplexMatrix::Zero(spec.n_c + 1, spec.n_c + 1);
  charger(0, 0) = 1.0;
  return DensityMatrix(kron(charger, ladder_gibbs_state(spec.n_b, spec.boltzmann_ratio())));
}

struct StepDiagnostics {
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
};

/// States sampled on a time grid. Only the entries of ρ that the generator
/// can reach from ρ(0) are stored; `state(k)` rebuilds the dense matrix.
struct Trajectory {
  Index dim = 0;
  std::shared_ptr<const std::vector<Index>> support;  // vec(ρ) indices
  std::vector<double> times;
  std::vector<ComplexVector> samples;
  std::vector<StepDiagnostics> diagnostics;
  bool truncated = false;
  std::string message;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;

  std::size_t size() const { return times.size(); }

  ComplexMatrix matrix(std::size_t k) const {
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    const auto& idx = *support;
    for (std::size_t n = 0; n < idx.size(); ++n) {
      m(idx[n] % dim, idx[n] / dim) = samples[k](static_cast<Index>(n));
    }
    return m;
  }

  DensityMatrix state(std::size_t k) const { return DensityMatrix::unchecked(matrix(k)); }

  double max_trace_error() const {
    double out = 0.0;
    for (const auto& d : diagnostics) out = std::max(out, d.trace_error);
    return out;
  }

  double min_eigenvalue() const {
    double out = std::numeric_limits<double>::infinity();
    for (const auto& d : diagnostics) out = std::min(out, d.min_eigenvalue);
    return out;
  }
};

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_step = 1e-4;
  double min_step = 1e-14;
  double max_step = 1.0;
};

/// The generator restricted to the entries of vec(ρ) in the same
/// J^z-difference sectors as ρ(0). Because the generator conserves
/// m_i − m_j entry by entry, the restriction is exact.
class SectorSystem {
 public:
  SectorSystem(const Generator& gen, const ComplexMatrix& rho0) : dim_(gen.dim()) {
    const Index d = dim_;
    const auto& m2 = gen.total_m2();
    std::set<int> sectors;
    for (Index c = 0; c < d; ++c) {
      for (Index r = 0; r < d; ++r) {
        if (rho0(r, c) != Complex{0.0, 0.0}) sectors.insert(m2(r) - m2(c));
      }
    }
    auto idx = std::make_shared<std::vector<Index>>();
    std::vector<Index> slot(static_cast<std::size_t>(d * d), -1);
    for (Index c = 0; c < d; ++c) {
      for (Index r = 0; r < d; ++r) {
        if (sectors.count(m2(r) - m2(c)) != 0) {
          slot[r + c * d] = static_cast<Index>(idx->size());
          idx->push_back(r + c * d);
        }
      }
    }
    const auto n = static_cast<Index>(idx->size());
    detail::Triplets triplets;
    const auto& full = gen.superoperator();
    for (Index col = 0; col < full.outerSize(); ++col) {
      if (slot[col] < 0) continue;
      for (SparseComplexMatrix::InnerIterator it(full, col); it; ++it) {
        if (slot[it.row()] < 0) {
          throw std::logic_error("SectorSystem: generator leaks out of its J^z sector");
        }
        triplets.emplace_back(slot[it.row()], slot[col], it.value());
      }
    }
    op_.resize(n, n);
    op_.setFromTriplets(triplets.begin(), triplets.end());
    op_.makeCompressed();

    diag_.reserve(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i) {
      if (slot[i + i * d] >= 0) diag_.push_back(slot[i + i * d]);
    }
    support_ = std::move(idx);
  }

  Index dim() const { return dim_; }
  Index size() const { return op_.rows(); }
  const std::shared_ptr<const std::vector<Index>>& support() const { return support_; }
  const SparseComplexMatrix& op() const { return op_; }

  ComplexVector restrict(const ComplexMatrix& rho) const {
    ComplexVector v(size());
    const auto& idx = *support_;
    for (std::size_t n = 0; n < idx.size(); ++n) {
      v(static_cast<Index>(n)) = rho(idx[n] % dim_, idx[n] / dim_);
    }
    return v;
  }

  Complex trace(const ComplexVector& v) const {
    Complex t{0.0, 0.0};
    for (Index k : diag_) t += v(k);
    return t;
  }

 private:
  Index dim_;
  std::shared_ptr<const std::vector<Index>> support_;
  SparseComplexMatrix op_;
  std::vector<Index> diag_;
};

namespace detail {

/// Dormand–Prince 5(4) with first-same-as-last stages for a linear
/// autonomous system y' = A y.
class DormandPrince {
 public:
  DormandPrince(const SparseComplexMatrix& a, const IntegratorOptions& opts)
      : a_(a), opts_(opts) {}

  /// Advances y from t over at most `h_try`; returns the step actually taken
  /// (0 on underflow). Updates h_next with the suggested next step and
  /// `deriv` with A·y at the new point.
  double step(ComplexVector& y, ComplexVector& deriv, double h_try, double& h_next,
              std::size_t& rejected) {
    static constexpr double c21 = 1.0 / 5.0;
    static constexpr double c31 = 3.0 / 40.0, c32 = 9.0 / 40.0;
    static constexpr double c41 = 44.0 / 45.0, c42 = -56.0 / 15.0, c43 = 32.0 / 9.0;
    static constexpr double c51 = 19372.0 / 6561.0, c52 = -25360.0 / 2187.0,
                            c53 = 64448.0 / 6561.0, c54 = -212.0 / 729.0;
    static constexpr double c61 = 9017.0 / 3168.0, c62 = -355.0 / 33.0,
                            c63 = 46732.0 / 5247.0, c64 = 49.0 / 176.0,
                            c65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    double h = h_try;
    const ComplexVector& k1 = deriv;
    while (true) {
      if (h < opts_.min_step) return 0.0;
      k2_ = a_ * (y + h * c21 * k1);
      k3_ = a_ * (y + h * (c31 * k1 + c32 * k2_));
      k4_ = a_ * (y + h * (c41 * k1 + c42 * k2_ + c43 * k3_));
      k5_ = a_ * (y + h * (c51 * k1 + c52 * k2_ + c53 * k3_ + c54 * k4_));
      k6_ = a_ * (y + h * (c61 * k1 + c62 * k2_ + c63 * k3_ + c64 * k4_ + c65 * k5_));
      y_new_ = y + h * (b1 * k1 + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
      k7_ = a_ * y_new_;
      err_ = h * (e1 * k1 + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

      double ratio = 0.0;
      for (Index i = 0; i < y.size(); ++i) {
        const double scale =
            opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y(i)), std::abs(y_new_(i)));
        ratio = std::max(ratio, std::abs(err_(i)) / scale);
      }
      if (ratio <= 1.0) {
        const double grow = ratio == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(ratio, -0.2));
        h_next = std::min(opts_.max_step, h * std::max(1.0, grow));
        y.swap(y_new_);
        deriv.swap(k7_);
        return h;
      }
      ++rejected;
      h *= std::max(0.1, 0.9 * std::pow(ratio, -0.25));
    }
  }

 private:
  const SparseComplexMatrix& a_;
  IntegratorOptions opts_;
  ComplexVector k2_, k3_, k4_, k5_, k6_, k7_, y_new_, err_;
};

inline StepDiagnostics diagnose(const SectorSystem& sys, const ComplexVector& v,
                                const std::shared_ptr<const std::vector<Index>>& support) {
  Trajectory tmp;
  tmp.dim = sys.dim();
  tmp.support = support;
  tmp.samples.push_back(v);
  StepDiagnostics out;
  out.trace_error = std::abs(sys.trace(v) - Complex{1.0, 0.0});
  out.min_eigenvalue = min_eigenvalue(tmp.matrix(0));
  return out;
}

}  // namespace detail

/// Integrates dρ/dt = apply(gen, ρ) from t = 0 to t_end, sampling every
/// sample_interval (the last sample is t_end even if the grid does not
/// divide evenly). On step-size underflow the trajectory ends at the last
/// good sample with `truncated` set.
inline Trajectory evolve(const Generator& gen, const ComplexMatrix& rho0, double t_end,
                         double sample_interval, const IntegratorOptions& opts = {}) {
  if (!(t_end > 0.0)) throw std::invalid_argument("evolve: t_end must be > 0");
  if (!(sample_interval > 0.0)) throw std::invalid_argument("evolve: sample_interval must be > 0");
  if (rho0.rows() != gen.dim() || rho0.cols() != gen.dim()) {
    throw std::invalid_argument("evolve: initial state dimension mismatch");
  }
  const SectorSystem sys(gen, rho0);
  Trajectory traj;
  traj.dim = sys.dim();
  traj.support = sys.support();

  ComplexVector y = sys.restrict(rho0);
  ComplexVector deriv = sys.op() * y;
  detail::DormandPrince stepper(sys.op(), opts);

  const auto n_intervals = static_cast<std::size_t>(std::ceil(t_end / sample_interval - 1e-9));
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.samples.push_back(y);
    traj.diagnostics.push_back(detail::diagnose(sys, y, traj.support));
  };
  record(0.0);

  double t = 0.0;
  double h = std::min(opts.initial_step, sample_interval);
  for (std::size_t k = 1; k <= n_intervals; ++k) {
    const double target = std::min(t_end, static_cast<double>(k) * sample_interval);
    while (t < target) {
      const double remaining = target - t;
      const bool last = h >= remaining;
      double h_next = h;
      const double taken =
          stepper.step(y, deriv, last ? remaining : h, h_next, traj.steps_rejected);
      if (taken == 0.0) {
        traj.truncated = true;
        traj.message = "step size underflow at t = " + std::to_string(t);
        return traj;
      }
      ++traj.steps_accepted;
      t = (last && taken == remaining) ? target : t + taken;
      // Keep the controller's suggestion rather than the clipped step.
      h = last && taken == remaining ? std::max(h, h_next) : h_next;
    }
    record(target);
  }
  return traj;
}

inline Trajectory evolve(const Generator& gen, const DensityMatrix& rho0, double t_end,
                         double sample_interval, const IntegratorOptions& opts = {}) {
  return evolve(gen, rho0.matrix(), t_end, sample_interval, opts);
}

struct SteadyStateResult {
  DensityMatrix rho_ss;
  double residual = 0.0;      // ‖apply(gen, ρ)‖_F
  double elapsed_time = 0.0;  // γt reached when the residual fell below tolerance
  bool converged = false;
  std::size_t steps = 0;
};

struct SteadyStateOptions {
  double first_step = 0.01;
  double step_growth = 2.0;
};

/// Long-time integration of ρ0 with backward-Euler steps of geometrically
/// growing length until ‖apply(gen, ρ)‖_F < tolerance. Each step applies
/// (1 − hL)⁻¹, which is trace preserving, completely positive and leaves
/// every stationary component of ρ0 untouched while damping all decaying
/// modes, so the limit is the same state the exact dynamics relaxes to. The
/// kernel of the generator is degenerate (dark states), which is why the
/// result depends on rho0. On reaching t_cap the last iterate is returned
/// with converged = false.
inline SteadyStateResult steady_state(const Generator& gen, const ComplexMatrix& rho0,
                                      double tolerance = 1e-10, double t_cap = 200.0,
                                      const SteadyStateOptions& opts = {}) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("steady_state: tolerance must be > 0");
  if (!(t_cap > 0.0)) throw std::invalid_argument("steady_state: t_cap must be > 0");
  if (!(opts.first_step > 0.0) || !(opts.step_growth >= 1.0)) {
    throw std::invalid_argument("steady_state: invalid step options");
  }
  if (rho0.rows() != gen.dim() || rho0.cols() != gen.dim()) {
    throw std::invalid_argument("steady_state: initial state dimension mismatch");
  }
  const SectorSystem sys(gen, rho0);
  ComplexVector y = sys.restrict(rho0);
  double residual = (sys.op() * y).norm();

  SparseComplexMatrix identity(sys.size(), sys.size());
  identity.setIdentity();

  double t = 0.0;
  double h = opts.first_step;
  std::size_t steps = 0;
  while (residual >= tolerance && t < t_cap) {
    h = std::min(h, t_cap - t);
    const SparseComplexMatrix system = identity - h * sys.op();
    Eigen::SparseLU<SparseComplexMatrix> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success) {
      throw std::runtime_error("steady_state: implicit step factorisation failed");
    }
    y = lu.solve(y).eval();
    t += h;
    ++steps;
    residual = (sys.op() * y).norm();
    h *= opts.step_growth;
  }

  Trajectory tmp;
  tmp.dim = sys.dim();
  tmp.support = sys.support();
  tmp.samples.push_back(y);
  SteadyStateResult out;
  out.rho_ss = DensityMatrix::unchecked(tmp.matrix(0));
  out.residual = residual;
  out.elapsed_time = t;
  out.converged = residual < tolerance;
  out.steps = steps;
  return out;
}

inline SteadyStateResult steady_state(const Generator& gen, const DensityMatrix& rho0,
                                      double tolerance = 1e-10, double t_cap = 200.0,
                                      const SteadyStateOptions& opts = {}) {
  return steady_state(gen, rho0.matrix(), tolerance, t_cap, opts);
}

}  // namespace qbattery
