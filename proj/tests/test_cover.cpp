#include <gtest/gtest.h>

#include <cmath>

#include "equicap/cover.hpp"
#include "equicap/random.hpp"
#include "equicap/separability.hpp"

using namespace equicap;

namespace {

ExactFraction frac(long n, long d) { return ExactFraction(BigInt(n), BigInt(d)); }

}  // namespace

TEST(ExactFraction, Reduces) {
  const ExactFraction f(BigInt(8), BigInt(16));
  EXPECT_EQ(f.numerator(), 1);
  EXPECT_EQ(f.denominator(), 2);
  EXPECT_EQ(f.str(), "1/2");
  EXPECT_EQ(ExactFraction(BigInt(-3), BigInt(-6)).str(), "1/2");
  EXPECT_EQ(frac(4, 4).str(), "1");
  EXPECT_LT(frac(1, 3), frac(1, 2));
}

TEST(CoverCount, ThreePointsInThePlaneByEnumeration) {
  // Oracle: enumerate all 8 dichotomies of 3 Gaussian points in 2D.
  const Matrix pts = gaussian_matrix(2, 3, 11u);
  const ExactFraction enumerated = brute_force_fraction(pts);
  EXPECT_EQ(enumerated, frac(6, 8));
  EXPECT_EQ(cover_count(3, 2), 6);
  EXPECT_EQ(cover_fraction(3, 2), frac(3, 4));
}

TEST(CoverCount, WorkedValues) {
  EXPECT_EQ(cover_count(4, 2), 8);
  EXPECT_EQ(cover_fraction(4, 2), frac(1, 2));
  EXPECT_EQ(cover_count(5, 5), 32);
  EXPECT_EQ(cover_fraction(40, 20), frac(1, 2));
  for (long p = 1; p <= 30; ++p) EXPECT_EQ(cover_fraction(p, 0), frac(0, 1));
  EXPECT_EQ(cover_fraction(16, 8), frac(1, 2));
  EXPECT_EQ(cover_fraction(16, 4), frac(576, 32768));
}

TEST(CoverCount, MatchesRecursionExhaustively) {
  // Independent route: C(1, N) = 2 for N >= 1, C(P, 0) = 0, and
  // C(P+1, N) = C(P, N) + C(P, N-1).
  constexpr int kMax = 65;
  std::vector<std::vector<BigInt>> c(kMax + 1, std::vector<BigInt>(kMax + 2, 0));
  for (int n = 1; n <= kMax + 1; ++n) c[1][n] = 2;
  for (int p = 1; p < kMax; ++p)
    for (int n = 1; n <= kMax + 1; ++n) c[p + 1][n] = c[p][n] + c[p][n - 1];
  for (int p = 1; p <= kMax; ++p)
    for (int n = 0; n <= kMax + 1; ++n) ASSERT_EQ(cover_count(p, n), c[p][n]) << p << "," << n;
}

TEST(CoverFraction, OneExactlyWhenPAtMostN) {
  for (long p = 1; p <= 40; ++p) {
    for (long n = 0; n <= 45; ++n) {
      const bool one = cover_fraction(p, n) == frac(1, 1);
      EXPECT_EQ(one, p <= n) << p << "," << n;
    }
  }
}

TEST(CoverFraction, Monotone) {
  for (long p = 1; p <= 30; ++p) {
    for (long n = 0; n <= 30; ++n) {
      EXPECT_LE(cover_fraction(p, n), cover_fraction(p, n + 1));
      EXPECT_GE(cover_fraction(p, n), cover_fraction(p + 1, n));
      EXPECT_GE(cover_fraction(p, n), frac(0, 1));
      EXPECT_LE(cover_fraction(p, n), frac(1, 1));
    }
  }
}

TEST(CoverFraction, HalfAtAlphaTwo) {
  for (long n = 1; n <= 60; ++n) EXPECT_EQ(cover_fraction(2 * n, n), frac(1, 2));
}

TEST(CoverFraction, ConvergesToGardnerLimit) {
  constexpr long n = 500;
  for (double alpha : {1.5, 2.5}) {
    const long p = static_cast<long>(std::ceil(alpha * n));
    EXPECT_LT(std::abs(cover_fraction(p, n).to_double() - gardner_limit(alpha)), 0.05) << alpha;
  }
}

TEST(CoverFraction, LargeP) {
  const ExactFraction f = cover_fraction(10000, 5000);
  EXPECT_EQ(f, frac(1, 2));
  EXPECT_NEAR(cover_fraction(10000, 4800).to_double(), 0.0, 1e-3);
}

TEST(Gardner, StepFunction) {
  EXPECT_EQ(gardner_limit(1.0), 1.0);
  EXPECT_EQ(gardner_limit(2.0), 0.5);
  EXPECT_EQ(gardner_limit(3.0), 0.0);
  EXPECT_EQ(gardner_limit(0.0), 1.0);
}

TEST(VcDimension, EqualsFixedDimension) {
  EXPECT_EQ(vc_dimension(1), 1);
  EXPECT_EQ(vc_dimension(0), 0);
  EXPECT_EQ(vc_dimension(17), 17);
}

TEST(PooledBounds, Cases) {
  const PooledBounds none = pooled_capacity_bounds(20, 7, 1);
  EXPECT_EQ(none.lower, none.upper);
  EXPECT_EQ(none.upper, cover_fraction(20, 7));

  const PooledBounds fig = pooled_capacity_bounds(40, 8, 4);
  EXPECT_EQ(fig.lower, cover_fraction(40, 2));
  EXPECT_EQ(fig.upper, cover_fraction(40, 8));
  EXPECT_LE(fig.lower, fig.upper);

  EXPECT_EQ(pooled_capacity_bounds(10, 3, 4).lower, frac(0, 1));
}

TEST(PooledBounds, LowerBoundSatisfiesPoolingRecursion) {
  // C(P+1, N0) >= C(P, N0) + C(P, N0 - k) is what the floor(N0/k) bound solves.
  for (long k = 1; k <= 4; ++k) {
    for (long p = 1; p <= 30; ++p) {
      for (long n0 = k; n0 <= 24; ++n0) {
        EXPECT_GE(cover_count(p + 1, n0), cover_count(p, n0) + cover_count(p, n0 - k));
        EXPECT_LE(pooled_capacity_bounds(p, n0, k).lower, pooled_capacity_bounds(p, n0, k).upper);
      }
    }
  }
}
