// Copyright 2026 The dtherm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dtherm/bounds.hpp"

#include <cmath>
#include <random>

#include "dtherm/weight_io.hpp"
#include "gtest/gtest.h"

using namespace dtherm;

namespace {

struct RandomBlock {
  double g0, g1, g2, g3;
};

/// Admissible (g1, g2, g3): g1 > 0 and sqrt(g2^2 + g3^2) <= g1.
RandomBlock random_block(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double g1 = 0.05 + 3.0 * u(gen);
  const double rho = g1 * u(gen);
  const double angle = 2.0 * M_PI * u(gen);
  return {3.0 * u(gen), g1, rho * std::cos(angle), rho * std::sin(angle)};
}

RealMatrix random_psd(std::mt19937_64& gen, Index n) {
  std::normal_distribution<double> normal;
  RealMatrix b(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) b(i, j) = normal(gen);
  return b * b.transpose();
}

}  // namespace

TEST(ThetaPoint, zeta_is_scaled_quadrature_pair) {
  const ThetaPoint p(1.0, -2.0, 0.5);
  EXPECT_EQ(p.zeta(), cplx(1.0, -2.0) / std::sqrt(2.0));
  const ThetaPoint q = ThetaPoint::from_zeta(cplx(0.3, 0.4), 1.0);
  EXPECT_NEAR(q.zeta().real(), 0.3, 1e-16);
  EXPECT_NEAR(q.zeta().imag(), 0.4, 1e-16);
  EXPECT_THROW(ThetaPoint(0.0, 0.0, 0.0), DomainError);
  EXPECT_THROW(ThetaPoint(0.0, 0.0, -1.0), DomainError);
}

TEST(WeightMatrix, two_param_decomposition_round_trips) {
  const WeightMatrix w = WeightMatrix::two_param(2.0, 0.5, -0.3);
  const auto p = w.block_params();
  ASSERT_TRUE(p);
  EXPECT_DOUBLE_EQ(p->g1, 2.0);
  EXPECT_DOUBLE_EQ(p->g2, 0.5);
  EXPECT_DOUBLE_EQ(p->g3, -0.3);
  EXPECT_EQ(p->g0, 0.0);
}

TEST(WeightMatrix, coupled_three_by_three_has_no_block_form) {
  RealMatrix m = RealMatrix::Identity(3, 3);
  m(0, 2) = m(2, 0) = 0.1;
  EXPECT_FALSE(WeightMatrix(m).block_params());
  EXPECT_TRUE(WeightMatrix::block(1, 1, 0, 0).block_params());
}

TEST(WeightMatrix, rejects_bad_inputs) {
  RealMatrix asym(2, 2);
  asym << 1, 0.2, 0.1, 1;
  EXPECT_THROW(WeightMatrix{asym}, DomainError);
  EXPECT_THROW(WeightMatrix::two_param(1.0, 2.0, 0.0), DomainError);
  EXPECT_THROW(WeightMatrix(RealMatrix::Identity(4, 4)), DomainError);
  // Degenerate (zero eigenvalue) weights are allowed.
  EXPECT_NO_THROW(WeightMatrix::two_param(1.0, 1.0, 0.0));
}

TEST(RldInverse, two_param_matches_tabulated_matrix) {
  ComplexMatrix expected(2, 2);
  expected << 1.5, cplx(0, 0.5), cplx(0, -0.5), 1.5;
  EXPECT_EQ(rld_inverse_2param(1.0), expected);
  expected << 1.0, cplx(0, 0.5), cplx(0, -0.5), 1.0;
  EXPECT_EQ(rld_inverse_2param(0.5), expected);
  EXPECT_THROW(rld_inverse_2param(0.0), DomainError);
  EXPECT_THROW(rld_inverse_2param(-1e-300), DomainError);
}

TEST(RldInverse, three_param_is_block_diagonal) {
  const ComplexMatrix m = rld_inverse_3param(1.0);
  EXPECT_EQ(ComplexMatrix(m.topLeftCorner(2, 2)), rld_inverse_2param(1.0));
  EXPECT_EQ(m(2, 2), cplx(2.0, 0.0));
  EXPECT_EQ(rld_inverse_3param(2.0)(2, 2), cplx(6.0, 0.0));
  for (double n : {0.1, 1.0, 7.5}) {
    const ComplexMatrix k = rld_inverse_3param(n);
    EXPECT_EQ(k(2, 2).imag(), 0.0);
    EXPECT_EQ(k(0, 2), cplx(0.0));
    EXPECT_EQ(k(2, 1), cplx(0.0));
    EXPECT_TRUE(is_hermitian(k, 0.0));
    EXPECT_GE(symmetric_eigenvalues(k.real()).minCoeff(), 0.0);
  }
}

TEST(CrGeneral, hand_evaluated_values) {
  EXPECT_NEAR(c_r_general(WeightMatrix::identity(2), rld_inverse_2param(1.0)).value, 4.0, 1e-14);
  EXPECT_NEAR(c_r_general(WeightMatrix::identity(3), rld_inverse_3param(1.0)).value, 6.0, 1e-14);
  EXPECT_EQ(c_r_general(WeightMatrix(RealMatrix::Zero(2, 2)), rld_inverse_2param(1.0)).value, 0.0);
}

TEST(CrGeneral, rejects_mismatched_and_non_hermitian) {
  EXPECT_THROW(c_r_general(WeightMatrix::identity(3), rld_inverse_2param(1.0)), DomainError);
  ComplexMatrix bad = rld_inverse_2param(1.0);
  bad(0, 1) = cplx(0, 1);
  EXPECT_THROW(c_r_general(WeightMatrix::identity(2), bad), DomainError);
}

TEST(CrGeneral, invariant_under_conjugating_the_fisher_matrix) {
  std::mt19937_64 gen(23);
  for (int i = 0; i < 20; ++i) {
    const WeightMatrix w(random_psd(gen, 3));
    const ComplexMatrix j = rld_inverse_3param(0.8);
    EXPECT_NEAR(c_r_general(w, j).value, c_r_general(w, j.conjugate()).value, 1e-12);
  }
}

TEST(CrClosed, two_param_values) {
  EXPECT_DOUBLE_EQ(c_r_closed_2param(1, 0, 0, 1).value, 4.0);
  EXPECT_DOUBLE_EQ(c_r_closed_2param(1, 1, 0, 1).value, 3.0);
  EXPECT_EQ(c_r_closed_2param(1, 0, 0, 1).kind, BoundKind::Closed2Param);
  EXPECT_THROW(c_r_closed_2param(1, 1, 0.1, 1), DomainError);
  EXPECT_THROW(c_r_closed_2param(-1, 0, 0, 1), DomainError);
  EXPECT_THROW(c_r_closed_2param(1, 0, 0, 0), DomainError);
}

TEST(CrClosed, three_param_values_and_g0_reduction) {
  EXPECT_DOUBLE_EQ(c_r_closed_3param(1, 1, 0, 0, 1).value, 6.0);
  std::mt19937_64 gen(29);
  for (int i = 0; i < 50; ++i) {
    const RandomBlock b = random_block(gen);
    EXPECT_DOUBLE_EQ(c_r_closed_3param(0, b.g1, b.g2, b.g3, 1.3).value,
                     c_r_closed_2param(b.g1, b.g2, b.g3, 1.3).value);
  }
  EXPECT_THROW(c_r_closed_3param(-0.1, 1, 0, 0, 1), DomainError);
}

TEST(CrClosed, property_general_formula_agrees_on_random_weights) {
  std::mt19937_64 gen(31);
  for (int i = 0; i < 100; ++i) {
    const RandomBlock b = random_block(gen);
    for (double n : {0.5, 1.0, 2.0}) {
      const double general2 =
          c_r_general(WeightMatrix::two_param(b.g1, b.g2, b.g3), rld_inverse_2param(n)).value;
      EXPECT_NEAR(general2, c_r_closed_2param(b.g1, b.g2, b.g3, n).value, 1e-10);
      const double general3 =
          c_r_general(WeightMatrix::block(b.g0, b.g1, b.g2, b.g3), rld_inverse_3param(n)).value;
      EXPECT_NEAR(general3, c_r_closed_3param(b.g0, b.g1, b.g2, b.g3, n).value, 1e-10);
    }
  }
}

// The real part contributes linearly in G and Tr|sqrt(G) A sqrt(G)| is concave
// (2 |a| sqrt(det G) for d = 2), so C^R is superadditive in G.
TEST(CrGeneral, property_superadditive_and_positively_homogeneous) {
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Index d = 2 + i % 2;
    const RealMatrix a = random_psd(gen, d);
    const RealMatrix b = random_psd(gen, d);
    const ComplexMatrix j = d == 2 ? rld_inverse_2param(1.7) : rld_inverse_3param(1.7);
    const double ca = c_r_general(WeightMatrix(a), j).value;
    const double cb = c_r_general(WeightMatrix(b), j).value;
    const double cab = c_r_general(WeightMatrix(RealMatrix(a + b)), j).value;
    EXPECT_GE(cab, ca + cb - 1e-10);
    const double c = u(gen);
    EXPECT_NEAR(c_r_general(WeightMatrix(RealMatrix(c * a)), j).value, c * ca, 1e-9 * std::max(1.0, c * ca));
    EXPECT_GE(ca, 0.0);
  }
}

TEST(GaussianTradeoff, isotropic_weight_needs_no_squeezing) {
  for (double n : {0.5, 1.0, 3.0}) {
    const GaussianTradeoff t = optimal_gaussian_tradeoff(1, 0, 0, n);
    EXPECT_NEAR(t.squeeze_r, 0.0, 1e-7);  // value-based search resolves r to ~sqrt(eps)
    EXPECT_NEAR(t.achieved, 2.0 * (n + 0.5) + 1.0, 1e-12);
  }
}

TEST(GaussianTradeoff, axis_aligned_weight_matches_calculus_oracle) {
  // d/dr [(g1+g2) e^{2r} + (g1-g2) e^{-2r}] = 0  =>  e^{2r} = sqrt((g1-g2)/(g1+g2)).
  const double g1 = 1.3, g2 = 0.9, n = 0.7;
  const GaussianTradeoff t = optimal_gaussian_tradeoff(g1, g2, 0.0, n);
  EXPECT_NEAR(std::exp(2.0 * t.squeeze_r), std::sqrt((g1 - g2) / (g1 + g2)), 1e-7);
  EXPECT_NEAR(t.achieved, 2.0 * (n + 0.5) * g1 + std::sqrt(g1 * g1 - g2 * g2), 1e-12);
  EXPECT_NEAR(t.squeeze_angle, 0.0, 1e-15);
}

TEST(GaussianTradeoff, grid_scan_never_beats_closed_form) {
  const double g1 = 1.0, g2 = 0.4, g3 = -0.5, n = 1.2;
  const RealMatrix g = WeightMatrix::two_param(g1, g2, g3).matrix();
  const double bound = c_r_closed_2param(g1, g2, g3, n).value;
  double best = INFINITY;
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j < 180; ++j) {
      const double r = -3.0 + 6.0 * i / 200.0;
      const double phi = M_PI * j / 180.0;
      const double cost = gaussian_measurement_cost(g, n, r, phi);
      EXPECT_GE(cost, bound - 1e-12);
      best = std::min(best, cost);
    }
  }
  EXPECT_LT(best - bound, 1e-3);
  EXPECT_NEAR(optimal_gaussian_tradeoff(g1, g2, g3, n).achieved, bound, 1e-9);
}

TEST(GaussianTradeoff, random_admissible_weights_reach_closed_form) {
  std::mt19937_64 gen(41);
  for (int i = 0; i < 50; ++i) {
    const RandomBlock b = random_block(gen);
    const GaussianTradeoff t = optimal_gaussian_tradeoff(b.g1, b.g2, b.g3, 1.0);
    EXPECT_NEAR(t.achieved, c_r_closed_2param(b.g1, b.g2, b.g3, 1.0).value, 1e-6);
  }
}

TEST(GaussianTradeoff, rejects_inadmissible) {
  EXPECT_THROW(optimal_gaussian_tradeoff(0.0, 0.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(optimal_gaussian_tradeoff(1.0, 1.0, 1.0, 1.0), DomainError);
}

TEST(WeightIo, parses_presets_and_text) {
  EXPECT_EQ(load_weight("identity2").dim(), 2);
  EXPECT_EQ(load_weight("identity3").matrix(), RealMatrix::Identity(3, 3));
  const WeightMatrix w = parse_weight("2\n 2 0.5\n 0.5 1\n");
  EXPECT_EQ(w.matrix()(0, 1), 0.5);
}

TEST(WeightIo, malformed_text_is_an_input_error) {
  EXPECT_THROW(parse_weight("4 1 0 0 0"), InputError);
  EXPECT_THROW(parse_weight("2 1 0 0"), InputError);
  EXPECT_THROW(parse_weight("2 1 0 0 1 7"), InputError);
  EXPECT_THROW(parse_weight("two"), InputError);
  EXPECT_THROW(load_weight("/nonexistent/weight.txt"), InputError);
  EXPECT_THROW(parse_weight("2 1 0 0 -1"), DomainError);
}
