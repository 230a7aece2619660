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
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qbattery/linalg.hpp"
#include "qbattery/spinops.hpp"

namespace qbattery {

/// Reservoir temperature in units of ħω/k_B.
struct Temperature {
  double value = 0.0;
};

/// Mean thermal occupation n̄ of the reservoir mode at the spin frequency.
struct MeanOccupation {
  double value = 0.0;
};

using ThermalSpec = std::variant<Temperature, MeanOccupation>;

/// Bose occupation 1/(exp(ω/T) - 1); exactly 0 at T = 0.
inline double thermal_occupation(double omega, double temperature) {
  if (!(omega > 0.0)) throw std::invalid_argument("thermal_occupation: omega must be > 0");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("thermal_occupation: temperature must be finite and >= 0");
  }
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(omega / temperature);
}

/// Physical configuration. ħ = k_B = 1; γ sets the time unit, energies are
/// reported in units of ω.
struct SystemSpec {
  int n_b = 1;
  int n_c = 1;
  double omega = 1.0;
  double gamma = 1.0;
  ThermalSpec thermal = Temperature{0.0};

  /// Throws std::invalid_argument on an unusable configuration and returns
  /// non-fatal warnings (currently only N_C < N_B).
  std::vector<std::string> validate() const {
    if (n_b < 1) throw std::invalid_argument("SystemSpec: n_b must be >= 1");
    if (n_c < 1) throw std::invalid_argument("SystemSpec: n_c must be >= 1");
    if (!(omega > 0.0) || !std::isfinite(omega)) {
      throw std::invalid_argument("SystemSpec: omega must be finite and > 0");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw std::invalid_argument("SystemSpec: gamma must be finite and > 0");
    }
    if (const auto* t = std::get_if<Temperature>(&thermal)) {
      if (!(t->value >= 0.0) || !std::isfinite(t->value)) {
        throw std::invalid_argument("SystemSpec: temperature must be finite and >= 0");
      }
    } else {
      const double n = std::get<MeanOccupation>(thermal).value;
      if (!(n >= 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("SystemSpec: nbar must be finite and >= 0");
      }
    }
    std::vector<std::string> warnings;
    if (n_c < n_b) warnings.emplace_back("n_c < n_b: charger smaller than battery");
    return warnings;
  }

  double nbar() const {
    if (const auto* t = std::get_if<Temperature>(&thermal)) {
      return thermal_occupation(omega, t->value);
    }
    return std::get<MeanOccupation>(thermal).value;
  }

  /// Temperature in units of ω, recovered from n̄ when only n̄ was given.
  double temperature() const {
    if (const auto* t = std::get_if<Temperature>(&thermal)) return t->value;
    const double n = nbar();
    return n == 0.0 ? 0.0 : omega / std::log1p(1.0 / n);
  }

  /// exp(-ω/T) = n̄/(n̄+1): population ratio between neighbouring ladder levels
  /// in equilibrium with the reservoir.
  double boltzmann_ratio() const {
    const double n = nbar();
    return n / (n + 1.0);
  }
};

/// L(O)ρ = 2OρO† − O†Oρ − ρO†O
inline ComplexMatrix dissipator(const ComplexMatrix& op, const ComplexMatrix& rho) {
  require_square(op, "dissipator");
  require_square(rho, "dissipator");
  if (op.rows() != rho.rows()) throw std::invalid_argument("dissipator: dimension mismatch");
  const ComplexMatrix op_dag = op.adjoint();
  const ComplexMatrix number = op_dag * op;
  return 2.0 * op * rho * op_dag - number * rho - rho * number;
}

namespace detail {

using Triplets = std::vector<Eigen::Triplet<Complex, Index>>;

/// Appends coeff · (Bᵀ ⊗ A), the column-major superoperator of ρ ↦ AρB.
inline void add_sandwich(Triplets& out, const SparseComplexMatrix& a,
                         const SparseComplexMatrix& b, Complex coeff) {
  const Index d = a.rows();
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseComplexMatrix::InnerIterator ia(a, k); ia; ++ia) {
      for (Index b_col = 0; b_col < b.outerSize(); ++b_col) {
        for (SparseComplexMatrix::InnerIterator ib(b, b_col); ib; ++ib) {
          // (AρB)(r, c) += A(r, k) ρ(k, l) B(l, c)
          const Index r = ia.row();
          const Index l = ib.row();
          const Index c = ib.col();
          out.emplace_back(r + c * d, k + l * d, coeff * ia.value() * ib.value());
        }
      }
    }
  }
}

inline void add_dissipator(Triplets& out, const ComplexMatrix& op, Complex coeff) {
  const Index d = op.rows();
  const SparseComplexMatrix o = op.sparseView();
  const SparseComplexMatrix o_dag = ComplexMatrix(op.adjoint()).sparseView();
  const SparseComplexMatrix number = ComplexMatrix(op.adjoint() * op).sparseView();
  SparseComplexMatrix id(d, d);
  id.setIdentity();
  add_sandwich(out, o, o_dag, 2.0 * coeff);
  add_sandwich(out, number, id, -coeff);
  add_sandwich(out, id, number, -coeff);
}

}  // namespace detail

/// Lindblad generator
///   dρ/dt = −iω[J_C^z + J_B^z, ρ] + γ(n̄+1) L(J_C^- + J_B^-)ρ + γn̄ L(J_C^+ + J_B^+)ρ
/// stored as a sparse superoperator acting on column-major vec(ρ).
class Generator {
 public:
  explicit Generator(SystemSpec spec) : spec_(std::move(spec)) {
    warnings_ = spec_.validate();
    nbar_ = spec_.nbar();
    ops_ = build_joint_ops(spec_.n_c, spec_.n_b);
    hamiltonian_ = spec_.omega * ops_.total_jz();
    jump_down_ = ops_.total_jminus();
    jump_up_ = ops_.total_jplus();

    const Index d = ops_.dim();
    total_m2_.resize(d);
    for (Index i = 0; i < d; ++i) {
      total_m2_(i) = static_cast<int>(std::lround(2.0 * ops_.total_m(i)));
    }

    detail::Triplets triplets;
    SparseComplexMatrix id(d, d);
    id.setIdentity();
    const SparseComplexMatrix h = hamiltonian_.sparseView();
    detail::add_sandwich(triplets, h, id, -kI);
    detail::add_sandwich(triplets, id, h, kI);
    detail::add_dissipator(triplets, jump_down_, spec_.gamma * (nbar_ + 1.0));
    if (nbar_ > 0.0) detail::add_dissipator(triplets, jump_up_, spec_.gamma * nbar_);

    superop_.resize(d * d, d * d);
    superop_.setFromTriplets(triplets.begin(), triplets.end());
    superop_.prune([](Index, Index, const Complex& v) { return v != Complex{0.0, 0.0}; });
    superop_.makeCompressed();

    // Rows of the superoperator that produce diagonal entries of dρ/dt.
    detail::Triplets diag_triplets;
    const Eigen::SparseMatrix<Complex, Eigen::RowMajor, Index> rows = superop_;
    for (Index i = 0; i < d; ++i) {
      for (decltype(rows)::InnerIterator it(rows, i + i * d); it; ++it) {
        diag_triplets.emplace_back(i, it.col(), it.value());
      }
    }
    diagonal_rows_.resize(d, d * d);
    diagonal_rows_.setFromTriplets(diag_triplets.begin(), diag_triplets.end());
    diagonal_rows_.makeCompressed();
  }

  const SystemSpec& spec() const { return spec_; }
  const JointOps& ops() const { return ops_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  double nbar() const { return nbar_; }
  Index dim() const { return ops_.dim(); }

  const ComplexMatrix& hamiltonian() const { return hamiltonian_; }
  const ComplexMatrix& jump_down() const { return jump_down_; }
  const ComplexMatrix& jump_up() const { return jump_up_; }

  /// d² × d² superoperator on vec(ρ).
  const SparseComplexMatrix& superoperator() const { return superop_; }

  /// Twice the eigenvalue of J_C^z + J_B^z on each joint basis state. The
  /// generator maps the entry (i, j) only onto entries with the same
  /// total_m2(i) − total_m2(j).
  const Eigen::VectorXi& total_m2() const { return total_m2_; }

  /// dρ/dt in units of γ.
  ComplexMatrix apply(const ComplexMatrix& rho) const {
    check_dim(rho);
    const ComplexVector out = superop_ * vectorize(rho);
    return unvectorize(out, dim());
  }

  /// Diagonal of apply(rho) without forming the full derivative.
  ComplexVector apply_diagonal(const ComplexMatrix& rho) const {
    check_dim(rho);
    return diagonal_rows_ * vectorize(rho);
  }

 private:
  void check_dim(const ComplexMatrix& rho) const {
    if (rho.rows() != dim() || rho.cols() != dim()) {
      throw std::invalid_argument("Generator::apply: expected " + std::to_string(dim()) + "x" +
                                  std::to_string(dim()) + " density matrix");
    }
  }

  SystemSpec spec_;
  std::vector<std::string> warnings_;
  double nbar_ = 0.0;
  JointOps ops_;
  ComplexMatrix hamiltonian_;
  ComplexMatrix jump_down_;
  ComplexMatrix jump_up_;
  Eigen::VectorXi total_m2_;
  SparseComplexMatrix superop_;
  SparseComplexMatrix diagonal_rows_;
};

inline Generator build_generator(const SystemSpec& spec) { return Generator(spec); }

inline ComplexMatrix apply(const Generator& gen, const ComplexMatrix& rho) {
  return gen.apply(rho);
}

}  // namespace qbattery
