#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "regret/model.hpp"

using namespace regret;
using fixtures::random_costs;
using fixtures::random_system;

TEST_CASE("scalar one-step operators") {
  const double a = 0.7, b = 1.3;
  const LtvSystem sys = LtvSystem::constant(Mat::Constant(1, 1, a), Mat::Constant(1, 1, b), Mat::Identity(1, 1), 1);
  const auto stk = build_stacked(sys, CostWeights::constant(Mat::Identity(1, 1), Mat::Identity(1, 1), 1));
  Mat F(2, 2), G(2, 2);
  F << 0, 0, b, 0;
  G << 1, 0, a, 1;
  CHECK((stk.F - F).norm() < 1e-15);
  CHECK((stk.G - G).norm() < 1e-15);
}

TEST_CASE("empty horizon") {
  const LtvSystem sys = LtvSystem::constant(Mat::Identity(2, 2), Mat::Ones(2, 1), Mat::Identity(2, 2), 0);
  const auto stk = build_stacked(sys, CostWeights::constant(Mat::Identity(2, 2), Mat::Identity(1, 1), 0));
  CHECK(stk.F.rows() == 2);
  CHECK(stk.F.cols() == 1);
  CHECK(stk.F.norm() == 0.0);
  CHECK((stk.G - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("spring-damper dimensions") {
  const auto stk = build_stacked(fixtures::spring_damper(100), fixtures::spring_damper_costs(100));
  CHECK(stk.F.rows() == 202);
  CHECK(stk.F.cols() == 101);
  CHECK(stk.G.rows() == 202);
  CHECK(stk.G.cols() == 202);
  CHECK(stk.C.rows() == 303);
  CHECK(stk.C.cols() == 303);
  CHECK((stk.Cinv * stk.C - Mat::Identity(303, 303)).norm() < 1e-12);
  // Last block column of F is zero: u_T moves no state.
  CHECK(stk.F.rightCols(1).norm() == 0.0);
}

TEST_CASE("derived omega") {
  CHECK(derived_omega(DisturbanceModel::ellipsoid(Mat::Identity(2, 2)), 100) == doctest::Approx(100.0));
  CHECK(derived_omega(DisturbanceModel::ellipsoid(4.0 * Mat::Identity(2, 2)), 8) == doctest::Approx(2.0));
  Mat P = Mat::Zero(2, 2);
  P.diagonal() << 1.0, 0.25;
  CHECK(derived_omega(DisturbanceModel::ellipsoid(P), 10) == doctest::Approx(40.0));
  CHECK(derived_omega(DisturbanceModel::energy(3.5), 10) == 3.5);
  CHECK_THROWS_AS((void)derived_omega(DisturbanceModel::ellipsoid(-Mat::Identity(2, 2)), 3), std::invalid_argument);
}

TEST_CASE("derived omega bounds boundary samples") {
  std::mt19937_64 rng(11);
  const int r = 2, T = 6;
  const Mat P = fixtures::random_pd(rng, r);
  const double omega = derived_omega(DisturbanceModel::ellipsoid(P), T);
  const Mat S = P.llt().matrixU().solve(Mat::Identity(r, r));  // S'PS = I
  for (int s = 0; s < 1000; ++s) {
    Vec w(r * T);
    for (int k = 0; k < T; ++k) {
      Vec v = fixtures::random_vector(rng, r);
      w.segment(k * r, r) = S * (v / v.norm());
    }
    CHECK(w.squaredNorm() <= omega * (1.0 + 1e-12));
  }
}

TEST_CASE("stacked operators reproduce the recursion") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(1, 3), hor(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng), m = dim(rng), T = hor(rng);
    const int r = std::uniform_int_distribution<int>(1, n)(rng);
    const LtvSystem sys = random_system(rng, n, m, r, T);
    const auto stk = build_stacked(sys, random_costs(rng, n, m, T));
    const Vec u = fixtures::random_vector(rng, m * (T + 1));
    const Vec x0 = fixtures::random_vector(rng, n);
    const Vec w = fixtures::random_vector(rng, r * T);
    Vec xs(n * (T + 1));
    Vec x = x0;
    for (int k = 0; k <= T; ++k) {
      xs.segment(k * n, n) = x;
      if (k < T) x = sys.A[k] * x + sys.B[k] * u.segment(k * m, m) + sys.E[k] * w.segment(k * r, r);
    }
    const Vec stacked = stk.F * u + stk.G * make_delta(x0, w);
    CHECK((stacked - xs).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, xs.cwiseAbs().maxCoeff()));
    // Zero disturbance: only the first block column of G matters.
    const Vec free = stk.G.leftCols(n) * x0;
    CHECK((free - stk.G * make_delta(x0, Vec::Zero(r * T))).norm() < 1e-12);
  }
}

TEST_CASE("validation errors") {
  LtvSystem sys = fixtures::spring_damper(3);
  sys.E[1] = Mat::Zero(2, 2);
  CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
  sys = fixtures::spring_damper(3);
  sys.A.pop_back();
  CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
  sys = LtvSystem::constant(Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Ones(1, 2), 2);
  CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
  CostWeights c = fixtures::spring_damper_costs(3);
  c.Q[2] = -c.Q[2];
  CHECK_THROWS_AS(c.validate(fixtures::spring_damper(3)), std::invalid_argument);
  c = fixtures::spring_damper_costs(2);
  CHECK_THROWS_AS(c.validate(fixtures::spring_damper(3)), std::invalid_argument);
}

TEST_CASE("constraint stacking") {
  ConstraintSet cs;
  cs.Hx = Mat::Ones(1, 2);
  cs.Hu = Mat::Ones(2, 1);
  const Mat H = cs.stacked(3);
  CHECK(H.rows() == 3 * 4);
  CHECK(H.cols() == 2 * 4 + 4);
  cs.Hx = Mat::Ones(1, 3);
  CHECK_THROWS_AS(cs.validate(2, 1), std::invalid_argument);
}
