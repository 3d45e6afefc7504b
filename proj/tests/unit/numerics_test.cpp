// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mcf/errors.hpp"
#include "mcf/linalg.hpp"
#include "mcf/random.hpp"
#include "support.hpp"

namespace mcf {
namespace {

using testing::Gen;

TEST(SymEig, DiagonalMatrix) {
  const auto eig = sym_eig(SymmetricMatrix::diagonal(Vector{3.0, 2.0}));
  EXPECT_DOUBLE_EQ(eig.values[0], 2.0);
  EXPECT_DOUBLE_EQ(eig.values[1], 3.0);
}

TEST(SymEig, Identity) {
  const auto eig = sym_eig(SymmetricMatrix::identity(4));
  for (double v : eig.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(SymEig, TwoByTwoMatchesCharacteristicRoots) {
  // λ² − 4λ + 3 = 0.
  const auto eig = sym_eig(SymmetricMatrix{{2.0, 1.0}, {1.0, 2.0}});
  EXPECT_NEAR(eig.values[0], 1.0, 1e-12);
  EXPECT_NEAR(eig.values[1], 3.0, 1e-12);
}

TEST(SymEig, PropertyOrthonormalAndReconstructs) {
  Gen gen(11);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t d = gen.index(1, 32);
    const SymmetricMatrix m = gen.symmetric(d);
    const auto eig = sym_eig(m);
    const Matrix& q = eig.vectors;
    EXPECT_LE(testing::max_abs_diff(q.transpose() * q, Matrix::identity(d)), 1e-10) << "dim " << d;
    EXPECT_LE(testing::max_abs_diff(q * Matrix::diagonal(eig.values) * q.transpose(), m.matrix()),
              1e-10 * std::max(1.0, m.matrix().max_abs()));
    for (std::size_t i = 1; i < d; ++i) EXPECT_LE(eig.values[i - 1], eig.values[i]);
  }
}

TEST(QuadForm, Examples) {
  EXPECT_DOUBLE_EQ(quad_form(SymmetricMatrix::identity(2), Vector{1.0, 1.0}), 2.0);
  EXPECT_DOUBLE_EQ(quad_form(SymmetricMatrix::diagonal(Vector{2.0, 3.0}), Vector{1.0, 1.0}), 5.0);
  EXPECT_DOUBLE_EQ(quad_form(SymmetricMatrix{{4.0, -1.0}, {-1.0, 7.0}}, Vector(2)), 0.0);
}

TEST(QuadForm, RejectsDimensionMismatch) {
  EXPECT_THROW(quad_form(SymmetricMatrix::identity(2), Vector{1.0}), ValidationError);
}

TEST(QuadForm, PropertyNonnegativeOnSpd) {
  Gen gen(12);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = gen.index(1, 6);
    const SymmetricMatrix m = gen.spd(d, 0.0);
    if (!is_spd(m, 0.0)) continue;
    for (int k = 0; k < 500; ++k) EXPECT_GE(quad_form(m, gen.vector(d, 10.0)), 0.0);
  }
}

TEST(IsSpd, Examples) {
  EXPECT_TRUE(is_spd(SymmetricMatrix::identity(3), 0.0));
  EXPECT_FALSE(is_spd(SymmetricMatrix::diagonal(Vector{1.0, -1.0}), 0.0));
  EXPECT_FALSE(is_spd(SymmetricMatrix::diagonal(Vector{1e-14, 1.0}), 1e-12));
}

TEST(SymmetricMatrix, RejectsAsymmetricAndNonFinite) {
  EXPECT_THROW(SymmetricMatrix(Matrix{{1.0, 2.0}, {2.0 + 1e-15, 1.0}}), ValidationError);
  EXPECT_THROW(SymmetricMatrix(Matrix{{1.0, 0.0}, {0.0, NAN}}), ValidationError);
  EXPECT_THROW(SymmetricMatrix(Matrix(2, 3)), ValidationError);
}

TEST(Vector, RejectsNonFiniteConstruction) {
  EXPECT_THROW(Vector({1.0, INFINITY}), ValidationError);
  EXPECT_THROW(Vector(std::vector<double>{NAN}), ValidationError);
}

TEST(Cholesky, ReconstructsAndRejectsIndefinite) {
  Gen gen(13);
  for (int rep = 0; rep < 20; ++rep) {
    const SymmetricMatrix m = gen.spd(gen.index(1, 8));
    const Matrix l = cholesky(m);
    EXPECT_LE(testing::max_abs_diff(l * l.transpose(), m.matrix()), 1e-10 * m.matrix().max_abs());
  }
  EXPECT_THROW(cholesky(SymmetricMatrix::diagonal(Vector{1.0, -1.0})), ValidationError);
}

TEST(SpdInverse, InverseTimesMatrixIsIdentity) {
  Gen gen(14);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = gen.index(1, 8);
    const SymmetricMatrix m = gen.spd(d, 0.5);
    EXPECT_LE(testing::max_abs_diff(spd_inverse(m).matrix() * m.matrix(), Matrix::identity(d)), 1e-8);
    const Vector b = gen.vector(d);
    EXPECT_LE(norm(m.matrix() * spd_solve(m, b) - b), 1e-8 * std::max(1.0, norm(b)));
  }
}

// Known-answer vectors published with the reference Philox4x32-10.
TEST(Philox, KnownAnswerVectors) {
  using Block = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngState, ReplayIsDeterministic) {
  RngState a(42, 0), b(42, 0);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  RngState c(42, 0), d(42, 0);
  EXPECT_EQ(gaussian_sample(c, Vector{0.0, 0.0}, SymmetricMatrix::identity(2)),
            gaussian_sample(d, Vector{0.0, 0.0}, SymmetricMatrix::identity(2)));
}

TEST(RngState, StreamsAndSubstreamsDiffer) {
  std::set<std::uint64_t> firsts;
  const RngState base(7, 0);
  for (std::uint64_t k = 0; k < 256; ++k) {
    RngState s = base.substream(k);
    firsts.insert(s.next_u64());
  }
  for (std::uint64_t k = 0; k < 256; ++k) {
    RngState s(7, k + 1);
    firsts.insert(s.next_u64());
  }
  EXPECT_EQ(firsts.size(), 512u);
}

TEST(RngState, SubstreamDoesNotAdvanceParent) {
  RngState a(9, 3), b(9, 3);
  (void)a.substream(5);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngState, UniformRanges) {
  RngState rng(3, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.uniform_positive();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(RngState, PoissonMomentsBothRegimes) {
  for (double rate : {2.0, 40.0}) {
    RngState rng(5, 0);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(rate));
      sum += k;
      sum_sq += k * k;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    EXPECT_NEAR(mean, rate, 4.0 * std::sqrt(rate / n)) << "rate " << rate;
    EXPECT_NEAR(var / rate, 1.0, 0.05) << "rate " << rate;
  }
}

TEST(GaussianSample, DegenerateCovarianceReturnsMean) {
  RngState rng(1, 0);
  EXPECT_EQ(gaussian_sample(rng, Vector{1.0, 1.0}, SymmetricMatrix::zeros(2)), (Vector{1.0, 1.0}));
}

TEST(GaussianSample, StandardNormalMean) {
  RngState rng(2, 0);
  const GaussianSampler sampler(Vector(2), SymmetricMatrix::identity(2));
  const int n = 100000;
  Vector sum(2);
  for (int i = 0; i < n; ++i) sum += sampler(rng);
  for (double s : sum) EXPECT_NEAR(s / n, 0.0, 0.02);
}

TEST(GaussianSample, PropertyEmpiricalCovarianceConverges) {
  const SymmetricMatrix cov{{2.0, 0.6}, {0.6, 0.5}};
  RngState rng(4, 0);
  const GaussianSampler sampler(Vector{1.0, -1.0}, cov);
  const int n = 100000;
  double s00 = 0, s01 = 0, s11 = 0;
  for (int i = 0; i < n; ++i) {
    const Vector x = sampler(rng) - Vector{1.0, -1.0};
    s00 += x[0] * x[0];
    s01 += x[0] * x[1];
    s11 += x[1] * x[1];
  }
  // Var of x_i x_j is C_ii C_jj + C_ij².
  auto se = [&](double cii, double cjj, double cij) { return std::sqrt((cii * cjj + cij * cij) / n); };
  EXPECT_NEAR(s00 / n, 2.0, 5 * se(2.0, 2.0, 2.0));
  EXPECT_NEAR(s01 / n, 0.6, 5 * se(2.0, 0.5, 0.6));
  EXPECT_NEAR(s11 / n, 0.5, 5 * se(0.5, 0.5, 0.5));
}

}  // namespace
}  // namespace mcf
