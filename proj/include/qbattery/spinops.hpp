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
#include <stdexcept>

#include "qbattery/linalg.hpp"

namespace qbattery {

/// Collective spin operators of N spin-1/2 particles restricted to the
/// symmetric (Dicke) sector j = N/2. Basis states are ordered by descending
/// m = j, j-1, ..., -j, so index k carries m = j - k.
struct CollectiveOps {
  int n_spins = 0;
  ComplexMatrix jz;
  ComplexMatrix jplus;
  ComplexMatrix jminus;

  double spin() const { return 0.5 * n_spins; }
  Index dim() const { return n_spins + 1; }
  double m_value(Index k) const { return spin() - static_cast<double>(k); }
};

inline CollectiveOps build_collective_ops(int n_spins) {
  if (n_spins < 1) {
    throw std::invalid_argument("build_collective_ops: n_spins must be >= 1");
  }
  CollectiveOps ops;
  ops.n_spins = n_spins;
  const Index dim = n_spins + 1;
  const double j = ops.spin();
  ops.jz = ComplexMatrix::Zero(dim, dim);
  ops.jplus = ComplexMatrix::Zero(dim, dim);
  for (Index k = 0; k < dim; ++k) {
    ops.jz(k, k) = ops.m_value(k);
  }
  // J+ |j, m> = sqrt(j(j+1) - m(m+1)) |j, m+1>; m+1 sits one index above m.
  for (Index k = 1; k < dim; ++k) {
    const double m = ops.m_value(k);
    ops.jplus(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  ops.jminus = ops.jplus.adjoint();
  return ops;
}

/// Charger and battery collective operators embedded in the joint space
/// charger ⊗ battery (charger index major, battery index minor).
struct JointOps {
  CollectiveOps charger;
  CollectiveOps battery;
  ComplexMatrix jz_c, jplus_c, jminus_c;
  ComplexMatrix jz_b, jplus_b, jminus_b;

  Index dim_charger() const { return charger.dim(); }
  Index dim_battery() const { return battery.dim(); }
  Index dim() const { return dim_charger() * dim_battery(); }

  Index joint_index(Index c, Index b) const { return c * dim_battery() + b; }
  Index charger_index(Index joint) const { return joint / dim_battery(); }
  Index battery_index(Index joint) const { return joint % dim_battery(); }

  /// Eigenvalue of J_C^z + J_B^z on joint basis state `joint`.
  double total_m(Index joint) const {
    return charger.m_value(charger_index(joint)) + battery.m_value(battery_index(joint));
  }

  ComplexMatrix total_jz() const { return jz_c + jz_b; }
  ComplexMatrix total_jminus() const { return jminus_c + jminus_b; }
  ComplexMatrix total_jplus() const { return jplus_c + jplus_b; }
};

inline JointOps embed_joint(const CollectiveOps& ops_c, const CollectiveOps& ops_b) {
  if (ops_c.n_spins < 1 || ops_b.n_spins < 1 || ops_c.jz.rows() != ops_c.dim() ||
      ops_b.jz.rows() != ops_b.dim()) {
    throw std::invalid_argument("embed_joint: invalid collective operators");
  }
  JointOps out;
  out.charger = ops_c;
  out.battery = ops_b;
  const ComplexMatrix id_c = ComplexMatrix::Identity(ops_c.dim(), ops_c.dim());
  const ComplexMatrix id_b = ComplexMatrix::Identity(ops_b.dim(), ops_b.dim());
  out.jz_c = kron(ops_c.jz, id_b);
  out.jplus_c = kron(ops_c.jplus, id_b);
  out.jminus_c = kron(ops_c.jminus, id_b);
  out.jz_b = kron(id_c, ops_b.jz);
  out.jplus_b = kron(id_c, ops_b.jplus);
  out.jminus_b = kron(id_c, ops_b.jminus);
  return out;
}

inline JointOps build_joint_ops(int n_c, int n_b) {
  return embed_joint(build_collective_ops(n_c), build_collective_ops(n_b));
}

}  // namespace qbattery
