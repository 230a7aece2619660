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

#include <gtest/gtest.h>

#include "qbattery/lindblad.hpp"
#include "qbattery/oracle.hpp"

namespace qbattery::oracle {
namespace {

TEST(TripletBasis, IsUnitary) {
  const ComplexMatrix u = TripletBasis::unitary();
  EXPECT_TRUE(approx_equal(u.adjoint() * u, ComplexMatrix::Identity(4, 4), 1e-15));
  EXPECT_THROW(TripletBasis::vector(0), std::out_of_range);
  EXPECT_THROW(TripletBasis::vector(5), std::out_of_range);
}

TEST(TripletBasis, RoundTrip) {
  ComplexMatrix m(4, 4);
  for (Index r = 0; r < 4; ++r) {
    for (Index c = 0; c < 4; ++c) m(r, c) = Complex(r + 0.5 * c, r - c);
  }
  EXPECT_TRUE(approx_equal(TripletBasis::from_product(TripletBasis::to_product(m)), m, 1e-14));
  EXPECT_THROW(TripletBasis::from_product(ComplexMatrix::Zero(3, 3)), std::invalid_argument);
}

TEST(TripletBasis, InitialStateDecomposition) {
  // |up,down> = (psi_plus + psi_minus)/sqrt(2)
  ComplexMatrix product = ComplexMatrix::Zero(4, 4);
  product(1, 1) = 1.0;
  EXPECT_TRUE(approx_equal(TripletBasis::from_product(product), two_spin_initial_state(), 1e-15));
}

TEST(ReferenceRateTable, ExampleCoefficients) {
  const RateTable t = two_spin_rate_matrix(1.0, 1.0, 1.0);
  EXPECT_EQ(t.coefficient({1, 1}, {1, 1}), Complex(-4.0, 0.0));
  EXPECT_EQ(t.coefficient({1, 1}, {2, 2}), Complex(2.0, 0.0));
  EXPECT_EQ(t.coefficient({2, 2}, {2, 2}), Complex(-6.0, 0.0));
  EXPECT_EQ(t.coefficient({1, 2}, {1, 2}), Complex(-5.0, 1.0));
  EXPECT_EQ(t.coefficient({1, 4}, {1, 4}), Complex(-3.0, 2.0));
  EXPECT_EQ(t.coefficient({3, 3}, {3, 3}), Complex(0.0, 0.0));
  EXPECT_EQ(t.coefficient({1, 2}, {2, 4}), Complex(0.0, 0.0));
  EXPECT_THROW(two_spin_rate_matrix(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(ReferenceRateTable, PopulationEquationsConserveTrace) {
  for (double nbar : {0.0, 0.4, 5.0}) {
    const RateTable t = two_spin_rate_matrix(nbar, 0.9, 1.0);
    for (int k = 1; k <= 4; ++k) {
      Complex column{0.0, 0.0};
      for (int i = 1; i <= 4; ++i) column += t.coefficient({i, i}, {k, k});
      EXPECT_NEAR(std::abs(column), 0.0, 1e-14);
    }
  }
}

TEST(HandDerivedTable, PopulationEquationsConserveTrace) {
  for (double nbar : {0.0, 0.4, 5.0}) {
    const RateTable t = two_spin_master_equation_table(nbar, 0.9, 1.0);
    for (int k = 1; k <= 4; ++k) {
      Complex column{0.0, 0.0};
      for (int i = 1; i <= 4; ++i) column += t.coefficient({i, i}, {k, k});
      EXPECT_NEAR(std::abs(column), 0.0, 1e-14);
    }
  }
}

TEST(HandDerivedTable, MatchesGeneratorAcrossParameters) {
  for (double nbar : {0.0, 0.25, 1.0, 7.0}) {
    for (double omega : {0.5, 2.0}) {
      SystemSpec s;
      s.n_c = 1;
      s.n_b = 1;
      s.omega = omega;
      s.gamma = 1.4;
      s.thermal = MeanOccupation{nbar};
      const Generator gen(s);
      const RateTable numeric =
          extract_rate_table([&gen](const ComplexMatrix& m) { return gen.apply(m); });
      EXPECT_TRUE(compare_rate_tables(two_spin_master_equation_table(nbar, 1.4, omega), numeric,
                                      1e-12)
                      .empty());
    }
  }
}

TEST(HandDerivedTable, DiffersFromReferenceForm) {
  const auto mismatches = compare_rate_tables(two_spin_rate_matrix(1.0, 1.0, 1.0),
                                              two_spin_master_equation_table(1.0, 1.0, 1.0), 1e-12);
  EXPECT_FALSE(mismatches.empty());
}

TEST(CompareRateTables, ReportsEachDifference) {
  RateTable a;
  RateTable b;
  a.equations[{1, 1}] = {{{1, 1}, Complex{-1.0, 0.0}}};
  b.equations[{1, 1}] = {{{1, 1}, Complex{-1.0, 0.0}}, {{2, 2}, Complex{0.5, 0.0}}};
  const auto m = compare_rate_tables(a, b, 1e-12);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].source, (RateTable::Element{2, 2}));
  EXPECT_EQ(m[0].actual, Complex(0.5, 0.0));
}

TEST(SteadyState, ZeroAndUnitOccupation) {
  const ComplexMatrix zero = two_spin_steady_state(0.0, 0.5);
  EXPECT_NEAR(zero(3, 3).real(), 0.5, 1e-15);
  EXPECT_NEAR(zero(2, 2).real(), 0.5, 1e-15);
  EXPECT_NEAR(zero(0, 0).real() + zero(1, 1).real(), 0.0, 1e-15);
  const ComplexMatrix one = two_spin_steady_state(1.0, 0.5);
  EXPECT_NEAR(one(0, 0).real(), 1.0 / 14.0, 1e-15);
  EXPECT_NEAR(one(1, 1).real(), 1.0 / 7.0, 1e-15);
  EXPECT_NEAR(one(3, 3).real(), 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(one.trace().real(), 1.0, 1e-15);
  EXPECT_THROW(two_spin_steady_state(0.0, 1.5), std::invalid_argument);
  EXPECT_THROW(two_spin_steady_state(-0.1, 0.5), std::invalid_argument);
}

TEST(SteadyState, JzClosedFormIsConsistent) {
  for (double nbar : {0.0, 0.1, 1.0, 10.0}) {
    const ComplexMatrix rho = two_spin_steady_state(nbar, 0.5);
    // Total J^z is +1, 0, 0, -1 on the triplet basis; half of it per spin.
    const double total = rho(0, 0).real() - rho(3, 3).real();
    EXPECT_NEAR(0.5 * total, two_spin_jz_expectation(nbar), 1e-15);
  }
  EXPECT_NEAR(two_spin_jz_expectation(0.0), -0.25, 1e-15);
}

TEST(SteadyState, HighTemperatureLimit) {
  // Triplet equally populated: 1/6 each, ψ₋ keeps 1/2.
  const ComplexMatrix rho = two_spin_steady_state(1e6, 0.5);
  for (int k : {0, 1, 3}) EXPECT_NEAR(rho(k, k).real(), 1.0 / 6.0, 1e-6);
}

TEST(ZeroTemperaturePopulations, LimitsAndNormalisation) {
  const auto p0 = two_spin_zero_temperature_populations(1.0, 0.0);
  EXPECT_DOUBLE_EQ(p0[1], 0.5);
  EXPECT_DOUBLE_EQ(p0[3], 0.0);
  const auto p = two_spin_zero_temperature_populations(2.0, 0.3);
  EXPECT_NEAR(p[0] + p[1] + p[2] + p[3], 1.0, 1e-15);
  EXPECT_NEAR(p[1], 0.5 * std::exp(-2.4), 1e-15);
}

}  // namespace
}  // namespace qbattery::oracle
