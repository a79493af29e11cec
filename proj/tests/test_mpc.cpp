#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "encctl/mpc.hpp"

using namespace encctl;

namespace {

OcpSpec double_integrator(int N) {
  OcpSpec o;
  o.A.resize(2, 2);
  o.A << 1, 1, 0, 1;
  o.B.resize(2, 1);
  o.B << 0.5, 1;
  o.Q = Mat::Identity(2, 2);
  o.R = Mat::Constant(1, 1, 0.1);
  o.Pf = Mat::Identity(2, 2);
  o.N = N;
  o.u_min = Vec::Constant(1, -1);
  o.u_max = Vec::Constant(1, 1);
  return o;
}

OcpSpec scalar_ocp(double a, double b, double bound) {
  OcpSpec o;
  o.A = Mat::Constant(1, 1, a);
  o.B = Mat::Constant(1, 1, b);
  o.Q = Mat::Constant(1, 1, 1);
  o.R = Mat::Constant(1, 1, 1);
  o.Pf = Mat::Constant(1, 1, 2);
  o.N = 1;
  o.u_min = Vec::Constant(1, -bound);
  o.u_max = Vec::Constant(1, bound);
  return o;
}

// First input of the unconstrained finite-horizon problem by backward Riccati recursion.
Vec riccati_first_input(const OcpSpec& o, const Vec& x) {
  Mat P = o.Pf;
  Mat K;
  for (int k = o.N - 1; k >= 0; --k) {
    const Mat S = o.R + o.B.transpose() * P * o.B;
    K = S.ldlt().solve(o.B.transpose() * P * o.A);
    P = o.Q + o.A.transpose() * P * o.A - o.A.transpose() * P * o.B * K;
    P = 0.5 * (P + P.transpose());
  }
  return -K * x;
}

HPoly square(double r) { return HPoly::box(Vec::Constant(2, -r), Vec::Constant(2, r)); }

FixedPointCode code(int delta) { return FixedPointCode{10, 1, delta, BigInt(1) << 64}; }

}  // namespace

TEST(Condense, ScalarOneStep) {
  const double a = 1.2, b = 0.7, pf = 2, r = 1;
  const QPData qp = condense(scalar_ocp(a, b, 1));
  EXPECT_NEAR(qp.H(0, 0), 2 * (b * pf * b + r), 1e-12);
  EXPECT_NEAR(qp.F(0, 0), 2 * a * pf * b, 1e-12);
  EXPECT_EQ(qp.G.rows(), 2);
  EXPECT_NEAR(qp.rho, 1 / qp.H(0, 0), 1e-12);
}

TEST(Condense, ZeroDynamicsBlockDiagonal) {
  OcpSpec o = double_integrator(3);
  o.A.setZero();
  const QPData qp = condense(o);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) EXPECT_NEAR(qp.H(i, j), 0, 1e-12);
    }
  }
}

TEST(Condense, UnconstrainedOptimumMatchesRiccati) {
  const OcpSpec o = double_integrator(3);
  const QPData qp = condense(o);
  for (double x1 : {-2.0, 0.3, 1.7}) {
    for (double x2 : {-1.0, 0.5}) {
      Vec x(2);
      x << x1, x2;
      const Vec z = -qp.H.ldlt().solve(qp.F * x);
      EXPECT_NEAR(z(0), riccati_first_input(o, x)(0), 1e-10);
    }
  }
}

TEST(Condense, RejectsBadWeights) {
  OcpSpec o = double_integrator(2);
  o.R = Mat::Constant(1, 1, -1);
  EXPECT_THROW(condense(o), Error);
  o = double_integrator(0);
  EXPECT_THROW(condense(o), Error);
}

TEST(ExplicitSolve, ScalarThreeSegments) {
  const QPData qp = condense(scalar_ocp(1.2, 1, 1));
  const PwaLaw law = explicit_solve(qp, HPoly::box(Vec::Constant(1, -10), Vec::Constant(1, 10)));
  ASSERT_EQ(law.size(), 3u);
  const double interior = -qp.F(0, 0) / qp.H(0, 0);
  int unconstrained = 0;
  for (const auto& s : law.segments) {
    if (s.active.empty()) {
      ++unconstrained;
      EXPECT_NEAR(s.K(0, 0), interior, 1e-12);
      EXPECT_NEAR(s.b(0), 0, 1e-12);
    } else {
      EXPECT_NEAR(s.K(0, 0), 0, 1e-12);
      EXPECT_NEAR(std::fabs(s.b(0)), 1, 1e-12);
    }
  }
  EXPECT_EQ(unconstrained, 1);
  for (double x = -10; x <= 10; x += 0.05) {
    const double expect = std::clamp(interior * x, -1.0, 1.0);
    ASSERT_NEAR(law.evaluate(Vec::Constant(1, x))(0), expect, 1e-9);
  }
}

TEST(ExplicitSolve, NoActiveConstraintsSingleSegment) {
  const OcpSpec o = [] {
    OcpSpec s = double_integrator(2);
    s.u_min = Vec::Constant(1, -100);
    s.u_max = Vec::Constant(1, 100);
    return s;
  }();
  const QPData qp = condense(o);
  const PwaLaw law = explicit_solve(qp, square(1));
  ASSERT_EQ(law.size(), 1u);
  const Mat K = -qp.H.ldlt().solve(qp.F).topRows(1);
  EXPECT_LT((law.segments[0].K - K).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(law.segments[0].b.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExplicitSolve, BudgetEnforced) {
  const QPData qp = condense(double_integrator(7));  // 14 rows
  try {
    explicit_solve(qp, square(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EnumerationBudgetExceeded);
  }
}

TEST(ExplicitSolve, AgreesWithConvergedPgsOnGrid) {
  const QPData qp = condense(double_integrator(2));
  const PwaLaw law = explicit_solve(qp, square(5));
  double worst = 0;
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 25; ++j) {
      Vec x(2);
      x << -5 + 10.0 * i / 24, -5 + 10.0 * j / 24;
      const PgsResult r = pgs_solve(qp, x, 1e-13);
      ASSERT_TRUE(r.converged);
      worst = std::max(worst, std::fabs(law.evaluate(x)(0) - r.z(0)));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(ExplicitSolve, Continuity) {
  const QPData qp = condense(double_integrator(2));
  const HPoly dom = square(5);
  EXPECT_LT(pwa_continuity_gap(explicit_solve(qp, dom), dom), 1e-8);
}

TEST(PointLocate, InteriorFacetAndOutside) {
  const QPData qp = condense(scalar_ocp(1.2, 1, 1));
  const PwaLaw law = explicit_solve(qp, HPoly::box(Vec::Constant(1, -10), Vec::Constant(1, 10)));
  const double kink = 1.0 / std::fabs(qp.F(0, 0) / qp.H(0, 0));
  const std::size_t mid = point_locate(law, Vec::Zero(1));
  EXPECT_TRUE(law.segments[mid].active.empty());
  // facet shared by two regions resolves to the smaller index
  std::vector<std::size_t> hits;
  for (std::size_t s = 0; s < law.size(); ++s) {
    if (law.segments[s].region.contains(Vec::Constant(1, kink), 1e-9)) hits.push_back(s);
  }
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(point_locate(law, Vec::Constant(1, kink)), hits.front());
  EXPECT_THROW(point_locate(law, Vec::Constant(1, 11)), Error);
}

TEST(PointLocate, MatchesMembershipScan) {
  const QPData qp = condense(double_integrator(2));
  const PwaLaw law = explicit_solve(qp, square(5));
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    Vec x(2);
    x << rng.uniform(-5, 5), rng.uniform(-5, 5);
    std::size_t first = law.size();
    for (std::size_t s = 0; s < law.size() && first == law.size(); ++s) {
      if (law.segments[s].region.contains(x, 1e-9)) first = s;
    }
    ASSERT_EQ(point_locate(law, x), first);
  }
}

TEST(PwaTable, RoundTrip) {
  const PwaLaw law = explicit_solve(condense(double_integrator(2)), square(5));
  std::stringstream ss;
  write_pwa(ss, law);
  const PwaLaw back = read_pwa(ss);
  ASSERT_EQ(back.size(), law.size());
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    Vec x(2);
    x << rng.uniform(-5, 5), rng.uniform(-5, 5);
    ASSERT_LT((back.evaluate(x) - law.evaluate(x)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pgs, SingleStepLandsOnMinimizer) {
  QPData qp;
  qp.n = 2;
  qp.m = 2;
  qp.N = 1;
  qp.H = 2 * Mat::Identity(2, 2);
  qp.F.resize(2, 2);
  qp.F << 1, 0.5, -0.3, 0.2;
  qp.z_min = Vec::Constant(2, -10);
  qp.z_max = Vec::Constant(2, 10);
  qp.lambda_max_H = 2;
  qp.rho = 0.5;
  Vec x(2);
  x << 1, 2;
  const Vec zstar = -0.5 * qp.F * x;
  EXPECT_LT((pgs_iterate(qp, Vec::Zero(2), x) - zstar).norm(), 1e-15);
  EXPECT_LT((pgs_iterate(qp, zstar, x) - zstar).norm(), 1e-15);
}

TEST(Pgs, StepSizeGuard) {
  const QPData qp = condense(double_integrator(2));
  EXPECT_THROW(pgs_iterate(qp, Vec::Zero(2), Vec::Zero(2), 2.01 / qp.lambda_max_H), Error);
  EXPECT_THROW(pgs_iterate(qp, Vec::Zero(2), Vec::Zero(2), 0.0), Error);
  // the unguarded scalar recursion z+ = (1 - rho h) z diverges for rho h = 2.01
  double z = 1;
  for (int j = 0; j < 200; ++j) z *= 1 - 2.01;
  EXPECT_GT(std::fabs(z), 2.0);
}

TEST(Pgs, DistanceToOptimumNonIncreasing) {
  Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    OcpSpec o;
    const int n = 1 + t % 4, m = 1 + t % 2;
    o.N = 1 + t % 5;
    o.A.resize(n, n);
    o.B.resize(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) o.A(i, j) = rng.uniform(-1, 1);
      for (int j = 0; j < m; ++j) o.B(i, j) = rng.uniform(-1, 1);
    }
    o.Q = Mat::Identity(n, n);
    o.R = Mat::Identity(m, m);
    o.Pf = Mat::Identity(n, n);
    o.u_min = Vec::Constant(m, -0.5);
    o.u_max = Vec::Constant(m, 0.5);
    const QPData qp = condense(o);
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(-3, 3);
    const PgsResult ref = pgs_solve(qp, x, 1e-14);
    ASSERT_TRUE(ref.converged);
    Vec z = Vec::Zero(qp.nz());
    double prev = (z - ref.z).norm();
    for (int j = 0; j < 5000; ++j) {
      z = pgs_iterate(qp, z, x);
      const double d = (z - ref.z).norm();
      ASSERT_LE(d, prev + 1e-12);
      prev = d;
    }
    EXPECT_LT(prev, 1e-8);
  }
}

TEST(Warmstart, ShiftRepeatsLastBlock) {
  const Mat D = shift_warmstart(3, 2);
  Vec z(6);
  z << 1, 2, 3, 4, 5, 6;
  Vec expect(6);
  expect << 3, 4, 5, 6, 5, 6;
  EXPECT_EQ(D * z, expect);
}

TEST(ExplicitMpc, VariantsMatchOracleAndMessageCounts) {
  const PwaLaw law = explicit_solve(condense(double_integrator(2)), square(5));
  const auto s = static_cast<std::uint64_t>(law.size());
  ASSERT_GT(s, 1u);
  Rng rng(4);
  for (auto v : {ExplicitVariant::IndexToCloud, ExplicitVariant::IndexToActuator}) {
    ExplicitMpc ctl(law, code(2), 64, v, Rng(5));
    Network net;
    for (int t = 0; t < 100; ++t) {
      Vec x(2);
      x << rng.uniform(-5, 5), rng.uniform(-5, 5);
      ASSERT_EQ(ctl.step(net, x), ctl.oracle(x));
    }
    const auto to_act = net.ledger().edges.at({cloud(1), actuator()}).messages;
    EXPECT_EQ(to_act, 100u * (v == ExplicitVariant::IndexToCloud ? 1u : s));
    EXPECT_EQ(net.ledger().messages_between(sensor(), cloud(1)), 100u * (v == ExplicitVariant::IndexToCloud ? 3u : 2u));
  }
}

TEST(ExplicitMpc, SingleRegionVariantsCoincide) {
  OcpSpec o = double_integrator(2);
  o.u_min = Vec::Constant(1, -100);
  o.u_max = Vec::Constant(1, 100);
  const PwaLaw law = explicit_solve(condense(o), square(1));
  ASSERT_EQ(law.size(), 1u);
  ExplicitMpc a(law, code(2), 64, ExplicitVariant::IndexToCloud, Rng(6));
  ExplicitMpc b(law, code(2), 64, ExplicitVariant::IndexToActuator, Rng(6));
  Network na, nb;
  Vec x(2);
  x << 0.4, -0.7;
  EXPECT_EQ(a.step(na, x), b.step(nb, x));
  EXPECT_EQ(na.ledger().edges.at({cloud(1), actuator()}).messages,
            nb.ledger().edges.at({cloud(1), actuator()}).messages);
}

TEST(RealtimePgs, MatchesOracleAndShiftsWarmstart) {
  const QPData qp = condense(double_integrator(3));
  RealtimePgs ctl(qp, code(3), 64, Rng(7));
  Network net;
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    Vec x(2);
    x << rng.uniform(-3, 3), rng.uniform(-3, 3);
    const Vec before = ctl.warmstart();
    const Vec expect = ctl.oracle(x);
    ASSERT_EQ(ctl.warmstart(), before);
    ASSERT_EQ(ctl.step(net, x), expect);
    const Vec z0 = ctl.warmstart();
    ASSERT_EQ(z0(qp.nz() - 1), z0(qp.nz() - 2));
  }
}

TEST(RealtimePgs, FixedPointWarmstartGivesOptimalInput) {
  const QPData qp = condense(double_integrator(2));
  RealtimePgs ctl(qp, code(4), 128, Rng(9));
  Vec x(2);
  x << 0.5, -0.25;
  const PgsResult ref = pgs_solve(qp, x, 1e-14);
  ctl.set_warmstart(ref.z);
  Network net;
  // quantized M and L at delta = 4 move the fixed point by a few resolution steps
  EXPECT_NEAR(ctl.step(net, x)(0), ref.z(0), 20 * 1e-4);
}

TEST(TwoCloudPgs, IteratesMatchPlaintextFixedPoint) {
  const QPData qp = condense(double_integrator(2));
  TwoCloudPgs ctl(qp, code(1), 96, 3, 8, Rng(10));
  ctl.set_audit(true);
  Network net;
  Vec x(2);
  x << 1.3, -0.4;
  const Vec u = ctl.step(net, x);
  const auto want = ctl.oracle_iterates(x);
  ASSERT_EQ(ctl.audited_iterates().size(), want.size());
  for (std::size_t j = 0; j < want.size(); ++j) EXPECT_EQ(ctl.audited_iterates()[j], want[j]);
  EXPECT_EQ(u, ctl.oracle(x));
  EXPECT_GT(net.ledger().messages_between(cloud(1), cloud(2)), 0u);
  EXPECT_EQ(net.ledger().messages_between(sensor(), cloud(2)), 0u);
}

TEST(TwoCloudPgs, SingleIterationMatchesRealtimeFromZero) {
  const QPData qp = condense(double_integrator(2));
  TwoCloudPgs two(qp, code(2), 96, 1, 8, Rng(11));
  RealtimePgs one(qp, code(2), 64, Rng(12));
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    Vec x(2);
    x << rng.uniform(-5, 5), rng.uniform(-5, 5);
    one.set_warmstart(Vec::Zero(qp.nz()));
    ASSERT_EQ(two.oracle(x), one.oracle(x));
  }
}

TEST(TwoCloudPgs, InteriorTrajectoryIsAffine) {
  OcpSpec o = double_integrator(2);
  o.u_min = Vec::Constant(1, -9);
  o.u_max = Vec::Constant(1, 9);
  const QPData qp = condense(o);
  TwoCloudPgs ctl(qp, code(1), 96, 2, 8, Rng(14));
  Network net;
  Vec x(2);
  x << 0.2, 0.1;
  // two unprojected iterations from zero: z2 = M L x + L x at the quantized values
  const IntMat Mq = quantize_matrix(Mat::Identity(2, 2) - qp.rho * qp.H, code(1));
  const IntMat Lq = quantize_matrix(-qp.rho * qp.F, code(1));
  const IntVec xq = quantize_vector(x, code(1));
  const IntVec lx = int_matvec(Lq, xq);
  const IntVec mlx = int_matvec(Mq, lx);
  const double expect = to_real(IntVec{mlx[0] + lx[0] * 10}, 3, code(1))(0);
  EXPECT_EQ(ctl.step(net, x)(0), expect);
}

TEST(TwoCloudPgs, HeadroomChecked) {
  const QPData qp = condense(double_integrator(2));
  EXPECT_THROW(TwoCloudPgs(qp, code(1), 8, 3, 8, Rng(15)), Error);
}
