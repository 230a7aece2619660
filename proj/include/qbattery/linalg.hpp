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
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace qbattery {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseComplexMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, Index>;

inline constexpr Complex kI{0.0, 1.0};

/// Entrywise comparison: every |a_ij - b_ij| <= tol. Shapes must agree.
inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

/// Kronecker product a ⊗ b, with a's index major.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
  }
}

inline double hermiticity_error(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

namespace detail {

struct DisjointSets {
  std::vector<Index> parent;

  explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }

  Index find(Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

inline ComplexMatrix gather(const ComplexMatrix& m, const std::vector<Index>& idx) {
  const auto n = static_cast<Index>(idx.size());
  ComplexMatrix out(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) out(r, c) = m(idx[r], idx[c]);
  }
  return out;
}

}  // namespace detail

/// Partition of the indices of a square matrix into groups that are coupled
/// through exactly-nonzero entries. After permuting each group to be
/// contiguous the matrix is block diagonal, so spectra and singular values
/// can be computed block by block without approximation.
inline std::vector<std::vector<Index>> coupled_blocks(const ComplexMatrix& m) {
  require_square(m, "coupled_blocks");
  const Index n = m.rows();
  detail::DisjointSets sets(n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < n; ++r) {
      if (r != c && m(r, c) != Complex{0.0, 0.0}) sets.unite(r, c);
    }
  }
  std::vector<std::vector<Index>> blocks;
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    const Index root = sets.find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[root]].push_back(i);
  }
  return blocks;
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  require_square(m, "hermitian_eigenvalues");
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.rows()));
  for (const auto& block : coupled_blocks(h)) {
    if (block.size() == 1) {
      values.push_back(h(block[0], block[0]).real());
      continue;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(detail::gather(h, block),
                                                        Eigen::EigenvaluesOnly);
    for (Index k = 0; k < solver.eigenvalues().size(); ++k) {
      values.push_back(solver.eigenvalues()(k));
    }
  }
  std::sort(values.begin(), values.end());
  return Eigen::Map<RealVector>(values.data(), static_cast<Index>(values.size()));
}

inline double min_eigenvalue(const ComplexMatrix& m) {
  if (m.size() == 0) throw std::invalid_argument("min_eigenvalue: empty matrix");
  return hermitian_eigenvalues(m)(0);
}

/// Singular values of a square matrix, descending.
inline RealVector singular_values(const ComplexMatrix& m) {
  require_square(m, "singular_values");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.rows()));
  for (const auto& block : coupled_blocks(m)) {
    if (block.size() == 1) {
      values.push_back(std::abs(m(block[0], block[0])));
      continue;
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(detail::gather(m, block));
    for (Index k = 0; k < svd.singularValues().size(); ++k) {
      values.push_back(svd.singularValues()(k));
    }
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  return Eigen::Map<RealVector>(values.data(), static_cast<Index>(values.size()));
}

inline double trace_norm(const ComplexMatrix& m) { return singular_values(m).sum(); }

/// ½‖a − b‖₁
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  return 0.5 * trace_norm(a - b);
}

/// Column-major vectorisation, vec(ρ)[i + j·d] = ρ(i, j).
inline ComplexVector vectorize(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

inline ComplexMatrix unvectorize(const ComplexVector& v, Index dim) {
  if (v.size() != dim * dim) throw std::invalid_argument("unvectorize: size mismatch");
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

}  // namespace qbattery
