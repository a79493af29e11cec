#include <gtest/gtest.h>

#include <cmath>

#include "encctl/linalg.hpp"
#include "encctl/modmath.hpp"

using namespace encctl;

TEST(HPoly, BoxContainsAndIntersect) {
  const HPoly b = HPoly::box(Vec::Constant(2, -1), Vec::Constant(2, 1));
  EXPECT_EQ(b.rows(), 4);
  EXPECT_TRUE(b.contains(Vec::Zero(2)));
  EXPECT_TRUE(b.contains(Vec::Constant(2, 1)));
  EXPECT_FALSE(b.contains(Vec::Constant(2, 1.1)));
  const HPoly c = b.intersect(HPoly::box(Vec::Constant(2, 0), Vec::Constant(2, 2)));
  EXPECT_FALSE(c.contains(Vec::Constant(2, -0.5)));
  EXPECT_TRUE(c.contains(Vec::Constant(2, 0.5)));
}

TEST(Lp, TextbookProblem) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18: optimum 36 at (2, 6)
  Mat A(5, 2);
  A << 1, 0, 0, 2, 3, 2, -1, 0, 0, -1;
  Vec b(5);
  b << 4, 12, 18, 0, 0;
  Vec c(2);
  c << 3, 5;
  const LpResult r = lp_maximize(c, A, b);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.value, 36, 1e-9);
  EXPECT_NEAR(r.x(0), 2, 1e-9);
  EXPECT_NEAR(r.x(1), 6, 1e-9);
}

TEST(Lp, InfeasibleAndUnbounded) {
  Mat A(2, 1);
  A << 1, -1;
  Vec b(2);
  b << -1, -1;  // x <= -1 and x >= 1
  EXPECT_EQ(lp_maximize(Vec::Ones(1), A, b).status, LpStatus::Infeasible);
  Mat A2(1, 1);
  A2 << -1;
  EXPECT_EQ(lp_maximize(Vec::Ones(1), A2, Vec::Zero(1)).status, LpStatus::Unbounded);
}

TEST(Lp, SupportOfBoxMatchesClosedForm) {
  Rng rng(1);
  Vec lo(3), hi(3);
  lo << -1, -2, 0.5;
  hi << 2, 1, 3;
  const HPoly P = HPoly::box(lo, hi);
  for (int t = 0; t < 100; ++t) {
    Vec d(3);
    for (int i = 0; i < 3; ++i) d(i) = rng.uniform(-1, 1);
    double expect = 0;
    for (int i = 0; i < 3; ++i) expect += d(i) > 0 ? d(i) * hi(i) : d(i) * lo(i);
    const LpResult r = support(P, d);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    ASSERT_NEAR(r.value, expect, 1e-9);
  }
}

TEST(Chebyshev, UnitBoxRadius) {
  const Chebyshev c = chebyshev_ball(HPoly::box(Vec::Constant(2, -1), Vec::Constant(2, 1)));
  ASSERT_EQ(c.status, LpStatus::Optimal);
  EXPECT_NEAR(c.radius, 1, 1e-9);
  EXPECT_NEAR(c.center.norm(), 0, 1e-9);
  const Chebyshev flat = chebyshev_ball(HPoly::box(Vec::Constant(1, 2), Vec::Constant(1, 2)));
  EXPECT_LE(flat.radius, 1e-9);
}

TEST(RemoveRedundant, DropsImpliedRows) {
  HPoly P = HPoly::box(Vec::Constant(2, -1), Vec::Constant(2, 1));
  Mat extra(2, 2);
  extra << 1, 1, 1, 0;
  Vec eb(2);
  eb << 5, 3;
  HPoly Q{Mat(6, 2), Vec(6)};
  Q.A << P.A, extra;
  Q.b << P.b, eb;
  EXPECT_EQ(remove_redundant(Q).rows(), 4);
}

TEST(LambdaMax, MatchesEigenSolver) {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 5;
    Mat M(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) = rng.uniform(-1, 1);
    }
    const Mat H = M * M.transpose() + 0.1 * Mat::Identity(n, n);
    const double oracle = Eigen::SelfAdjointEigenSolver<Mat>(H).eigenvalues().maxCoeff();
    ASSERT_NEAR(lambda_max(H), oracle, 1e-9 * oracle);
  }
}

TEST(SpectralRadius, RotationTimesContraction) {
  const double th = 0.7, r = 0.9;
  Mat A(2, 2);
  A << r * std::cos(th), -r * std::sin(th), r * std::sin(th), r * std::cos(th);
  EXPECT_NEAR(spectral_radius(A), r, 1e-12);
  Mat J(2, 2);
  J << 1.1, 5, 0, 0.3;
  EXPECT_NEAR(spectral_radius(J), 1.1, 1e-12);
}
