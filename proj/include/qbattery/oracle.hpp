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

// Closed-form results for one charger spin and one battery spin
// (N_C = N_B = 1). Everything here is written out by hand and never calls
// into the numerical generator, so it can serve as an independent check.

#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbattery/linalg.hpp"
#include "qbattery/lindblad.hpp"

namespace qbattery::oracle {

/// Triplet/singlet basis |1⟩ = ↑↑, |2⟩ = ψ₊, |3⟩ = ψ₋, |4⟩ = ↓↓ with
/// ψ± = (↑↓ ± ↓↑)/√2. Product basis order is {↑↑, ↑↓, ↓↑, ↓↓}.
struct TripletBasis {
  static constexpr std::array<const char*, 4> kLabels = {"up_up", "psi_plus", "psi_minus",
                                                         "down_down"};

  /// Columns are the triplet basis vectors in product coordinates.
  static ComplexMatrix unitary() {
    const double s = 1.0 / std::sqrt(2.0);
    ComplexMatrix u = ComplexMatrix::Zero(4, 4);
    u(0, 0) = 1.0;
    u(1, 1) = s;
    u(2, 1) = s;
    u(1, 2) = s;
    u(2, 2) = -s;
    u(3, 3) = 1.0;
    return u;
  }

  static ComplexVector vector(int label) {
    if (label < 1 || label > 4) throw std::out_of_range("TripletBasis: label must be 1..4");
    return unitary().col(label - 1);
  }

  /// ρ_ij = ⟨i|ρ|j⟩ in the triplet basis.
  static ComplexMatrix from_product(const ComplexMatrix& rho) {
    if (rho.rows() != 4 || rho.cols() != 4) {
      throw std::invalid_argument("TripletBasis: expected a 4x4 matrix");
    }
    const ComplexMatrix u = unitary();
    return u.adjoint() * rho * u;
  }

  static ComplexMatrix to_product(const ComplexMatrix& rho) {
    if (rho.rows() != 4 || rho.cols() != 4) {
      throw std::invalid_argument("TripletBasis: expected a 4x4 matrix");
    }
    const ComplexMatrix u = unitary();
    return u * rho * u.adjoint();
  }
};

/// Linear equations of motion for the ten independent elements ρ_ij (i ≤ j,
/// 1-based labels). Each equation maps a source element (k, l) to its
/// coefficient in dρ_ij/dt.
struct RateTable {
  using Element = std::pair<int, int>;
  std::map<Element, std::map<Element, Complex>> equations;

  Complex coefficient(Element target, Element source) const {
    const auto eq = equations.find(target);
    if (eq == equations.end()) return {0.0, 0.0};
    const auto term = eq->second.find(source);
    return term == eq->second.end() ? Complex{0.0, 0.0} : term->second;
  }

  static std::vector<Element> elements() {
    std::vector<Element> out;
    for (int i = 1; i <= 4; ++i) {
      for (int j = i; j <= 4; ++j) out.emplace_back(i, j);
    }
    return out;
  }
};

/// Reference two-spin rate equations in their commonly quoted form:
///   ρ̇11 = −2γ(n̄+1)ρ11 + 2γn̄ρ22
///   ρ̇22 = 2γ(n̄+1)ρ11 − 2γ(2n̄+1)ρ22 + 2γn̄ρ44
///   ρ̇33 = 0
///   ρ̇44 = 2γ(n̄+1)ρ22 − 2γn̄ρ44
///   ρ̇12 = −[γ(3n̄+2) − iω]ρ12      ρ̇13 = −(γn̄ − iω)ρ13
///   ρ̇14 = −[γ(2n̄+1) − 2iω]ρ14     ρ̇23 = −γ(2n̄+1)ρ23
///   ρ̇24 = −[γ(3n̄+1) − iω]ρ24      ρ̇34 = −(γn̄ − iω)ρ34
/// Compared with Generator this form has half the damping rates, the
/// opposite sign on the precession term, γn̄ instead of γ(n̄+1) for ρ13, and
/// no ρ12 ↔ ρ24 feeding terms. two_spin_master_equation_table is the table
/// Generator actually obeys.
inline RateTable two_spin_rate_matrix(double nbar, double gamma, double omega) {
  if (!(nbar >= 0.0)) throw std::invalid_argument("two_spin_rate_matrix: nbar must be >= 0");
  const double g = gamma;
  const double n = nbar;
  RateTable t;
  t.equations[{1, 1}] = {{{1, 1}, -2.0 * g * (n + 1.0)}, {{2, 2}, 2.0 * g * n}};
  t.equations[{2, 2}] = {{{1, 1}, 2.0 * g * (n + 1.0)},
                         {{2, 2}, -2.0 * g * (2.0 * n + 1.0)},
                         {{4, 4}, 2.0 * g * n}};
  t.equations[{3, 3}] = {};
  t.equations[{4, 4}] = {{{2, 2}, 2.0 * g * (n + 1.0)}, {{4, 4}, -2.0 * g * n}};
  t.equations[{1, 2}] = {{{1, 2}, -(g * (3.0 * n + 2.0) - kI * omega)}};
  t.equations[{1, 3}] = {{{1, 3}, -(g * n - kI * omega)}};
  t.equations[{1, 4}] = {{{1, 4}, -(g * (2.0 * n + 1.0) - 2.0 * kI * omega)}};
  t.equations[{2, 3}] = {{{2, 3}, Complex{-g * (2.0 * n + 1.0), 0.0}}};
  t.equations[{2, 4}] = {{{2, 4}, -(g * (3.0 * n + 1.0) - kI * omega)}};
  t.equations[{3, 4}] = {{{3, 4}, -(g * n - kI * omega)}};
  return t;
}

/// The same ten equations worked out by hand from
///   ρ̇ = −iω[J^z, ρ] + γ(n̄+1)(2J⁻ρJ⁺ − {J⁺J⁻, ρ}) + γn̄(2J⁺ρJ⁻ − {J⁻J⁺, ρ})
/// using J⁻ = √2(|ψ₊⟩⟨↑↑| + |↓↓⟩⟨ψ₊|) and J⁻|ψ₋⟩ = 0.
inline RateTable two_spin_master_equation_table(double nbar, double gamma, double omega) {
  if (!(nbar >= 0.0)) {
    throw std::invalid_argument("two_spin_master_equation_table: nbar must be >= 0");
  }
  const double g = gamma;
  const double n = nbar;
  const double down = 4.0 * g * (n + 1.0);  // |1⟩→|2⟩ and |2⟩→|4⟩
  const double up = 4.0 * g * n;            // reverse transitions
  RateTable t;
  t.equations[{1, 1}] = {{{1, 1}, -down}, {{2, 2}, up}};
  t.equations[{2, 2}] = {{{1, 1}, down}, {{2, 2}, -(down + up)}, {{4, 4}, up}};
  t.equations[{3, 3}] = {};
  t.equations[{4, 4}] = {{{2, 2}, down}, {{4, 4}, -up}};
  // Coherences decay at half the summed escape rates of their two levels;
  // ρ12 and ρ24 are additionally fed by each other through the jumps.
  t.equations[{1, 2}] = {{{1, 2}, -(2.0 * g * (3.0 * n + 2.0) + kI * omega)}, {{2, 4}, up}};
  t.equations[{1, 3}] = {{{1, 3}, -(2.0 * g * (n + 1.0) + kI * omega)}};
  t.equations[{1, 4}] = {{{1, 4}, -(2.0 * g * (2.0 * n + 1.0) + 2.0 * kI * omega)}};
  t.equations[{2, 3}] = {{{2, 3}, Complex{-2.0 * g * (2.0 * n + 1.0), 0.0}}};
  t.equations[{2, 4}] = {{{2, 4}, -(2.0 * g * (3.0 * n + 1.0) + kI * omega)}, {{1, 2}, down}};
  t.equations[{3, 4}] = {{{3, 4}, -(2.0 * g * n + kI * omega)}};
  return t;
}

/// Extracts the rate table of a 4×4 generator action `rhs` (product basis in,
/// product basis out) by applying it to each triplet basis element |k⟩⟨l|.
template <typename Rhs>
RateTable extract_rate_table(const Rhs& rhs, double drop_below = 0.0) {
  const ComplexMatrix u = TripletBasis::unitary();
  RateTable t;
  for (const auto& target : RateTable::elements()) t.equations[target] = {};
  for (int k = 1; k <= 4; ++k) {
    for (int l = 1; l <= 4; ++l) {
      ComplexMatrix e = ComplexMatrix::Zero(4, 4);
      e(k - 1, l - 1) = 1.0;
      const ComplexMatrix out = TripletBasis::from_product(rhs(ComplexMatrix(u * e * u.adjoint())));
      for (const auto& [i, j] : RateTable::elements()) {
        const Complex c = out(i - 1, j - 1);
        if (std::abs(c) > drop_below) t.equations[{i, j}][{k, l}] = c;
      }
    }
  }
  return t;
}

struct RateMismatch {
  RateTable::Element target;
  RateTable::Element source;
  Complex expected;
  Complex actual;
};

/// Every (target, source) pair where the two tables differ by more than tol.
inline std::vector<RateMismatch> compare_rate_tables(const RateTable& expected,
                                                     const RateTable& actual, double tol) {
  std::vector<RateMismatch> out;
  for (const auto& target : RateTable::elements()) {
    for (int k = 1; k <= 4; ++k) {
      for (int l = 1; l <= 4; ++l) {
        const Complex e = expected.coefficient(target, {k, l});
        const Complex a = actual.coefficient(target, {k, l});
        if (std::abs(e - a) > tol) out.push_back({target, {k, l}, e, a});
      }
    }
  }
  return out;
}

/// Steady state reached from an initial state with ψ₋ population ρ33(0):
///   ρ11 = n̄²(1−ρ33(0))/D, ρ22 = n̄(n̄+1)(1−ρ33(0))/D, ρ33 = ρ33(0),
///   ρ44 = (n̄+1)²(1−ρ33(0))/D, D = 1 + 3n̄(n̄+1); all coherences vanish.
/// Returned in the triplet basis.
inline ComplexMatrix two_spin_steady_state(double nbar, double rho33_initial) {
  if (!(nbar >= 0.0)) throw std::invalid_argument("two_spin_steady_state: nbar must be >= 0");
  if (!(rho33_initial >= 0.0 && rho33_initial <= 1.0)) {
    throw std::invalid_argument("two_spin_steady_state: rho33_initial must lie in [0, 1]");
  }
  const double rest = 1.0 - rho33_initial;
  const double denom = 1.0 + 3.0 * nbar * (nbar + 1.0);
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  rho(0, 0) = nbar * nbar * rest / denom;
  rho(1, 1) = nbar * (nbar + 1.0) * rest / denom;
  rho(2, 2) = rho33_initial;
  rho(3, 3) = (nbar + 1.0) * (nbar + 1.0) * rest / denom;
  return rho;
}

/// ⟨J_C^z⟩ = ⟨J_B^z⟩ = −(2n̄+1)/(12n̄(n̄+1)+4) for the charged-charger,
/// ground-battery initial condition.
inline double two_spin_jz_expectation(double nbar) {
  if (!(nbar >= 0.0)) throw std::invalid_argument("two_spin_jz_expectation: nbar must be >= 0");
  return -(2.0 * nbar + 1.0) / (12.0 * nbar * (nbar + 1.0) + 4.0);
}

/// |ψ₀⟩ = |↑⟩_C|↓⟩_B = (ψ₊ + ψ₋)/√2, returned as a density matrix in the
/// triplet basis.
inline ComplexMatrix two_spin_initial_state() {
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  rho(1, 1) = rho(1, 2) = rho(2, 1) = rho(2, 2) = 0.5;
  return rho;
}

/// Populations (ρ11, ρ22, ρ33, ρ44)(t) at n̄ = 0 starting from |ψ₀⟩, from the
/// hand-derived rates: ρ22 decays into ρ44 at 4γ, ρ33 is frozen.
inline std::array<double, 4> two_spin_zero_temperature_populations(double gamma, double t) {
  const double decay = std::exp(-4.0 * gamma * t);
  return {0.0, 0.5 * decay, 0.5, 0.5 * (1.0 - decay)};
}

}  // namespace qbattery::oracle
