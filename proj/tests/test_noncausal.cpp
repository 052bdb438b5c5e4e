#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "regret/noncausal.hpp"
#include "regret/verify.hpp"

using namespace regret;
using fixtures::rel;

namespace {

LtvSystem scalar_system() {
  return LtvSystem::constant(Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1), 1);
}

double stacked_cost(const StackedDynamics& stk, const Vec& u, const Vec& delta) {
  const Vec x = stk.F * u + stk.G * delta;
  return x.dot(stk.calQ() * x) + u.dot(stk.calR() * u);
}

}  // namespace

TEST_CASE("empty horizon prices the initial state") {
  const LtvSystem sys = LtvSystem::constant(Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1), 0);
  const auto oracle = build_oracle(build_stacked(sys, CostWeights::constant(Mat::Constant(1, 1, 2.5), Mat::Ones(1, 1), 0)));
  CHECK(oracle.O(0, 0) == doctest::Approx(2.5));
}

TEST_CASE("scalar one-step benchmark") {
  const auto stk = build_stacked(scalar_system(), CostWeights::constant(Mat::Ones(1, 1), Mat::Ones(1, 1), 1));
  const auto oracle = build_oracle(stk);
  Mat O(2, 2);
  O << 1.5, 0.5, 0.5, 0.5;
  CHECK((oracle.O - O).norm() < 1e-12);
  CHECK(benchmark_cost(oracle, Vec::Ones(2)) == doctest::Approx(3.0));
  CHECK(benchmark_cost(oracle, Vec::Zero(2)) == 0.0);
  const Vec u = optimal_sequence(stk, (Vec(2) << 1.0, 0.0).finished());
  CHECK(u(0) == doctest::Approx(-0.5));
  CHECK(std::abs(u(1)) < 1e-14);
  CHECK(optimal_sequence(stk, Vec::Zero(2)).norm() == 0.0);
}

TEST_CASE("block partition") {
  const auto stk = build_stacked(fixtures::spring_damper(5), fixtures::spring_damper_costs(5));
  const auto oracle = build_oracle(stk);
  Mat O(12, 12);
  O << oracle.O1, oracle.O2.transpose(), oracle.O2, oracle.O3;
  CHECK((O - oracle.O).norm() == 0.0);
  CHECK((oracle.O - oracle.O.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(oracle.O);
  CHECK(es.eigenvalues()(0) > -1e-10);
}

TEST_CASE("spring-damper non-causal cost") {
  const int T = 100;
  const LtvSystem sys = fixtures::spring_damper(T);
  const auto stk = build_stacked(sys, fixtures::spring_damper_costs(T));
  const auto oracle = build_oracle(stk);
  const Vec delta = make_delta(fixtures::spring_damper_x0(), Vec::Constant(2 * T, 1.0 / std::sqrt(2.0)));
  const double J = benchmark_cost(oracle, delta);
  CHECK(rel(J, 7218.0) < 0.01 * 7218.0);
  CHECK(rel(stacked_cost(stk, optimal_sequence(stk, delta), delta), J) < 1e-8);
}

TEST_CASE("benchmark equals dense least squares") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 3), hor(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = dim(rng), m = dim(rng), T = hor(rng);
    const int r = std::uniform_int_distribution<int>(1, n)(rng);
    const LtvSystem sys = fixtures::random_system(rng, n, m, r, T);
    const CostWeights costs = fixtures::random_costs(rng, n, m, T);
    const auto stk = build_stacked(sys, costs);
    const auto oracle = build_oracle(stk);
    const Vec delta = fixtures::random_vector(rng, n + r * T);
    const double J = benchmark_cost(oracle, delta);
    const double ref = verify::noncausal_cost_oracle(sys, costs, delta);
    CHECK(std::abs(J - ref) <= 1e-8 * std::max(1.0, ref));
  }
}

TEST_CASE("optimal sequence properties") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2, m = 1, r = 2, T = 4;
    const LtvSystem sys = fixtures::random_system(rng, n, m, r, T);
    const auto stk = build_stacked(sys, fixtures::random_costs(rng, n, m, T));
    const auto oracle = build_oracle(stk);
    const Vec delta = fixtures::random_vector(rng, n + r * T);
    const Vec u = optimal_sequence(stk, delta);
    const double J = benchmark_cost(oracle, delta);
    CHECK(J >= 0.0);
    CHECK(rel(stacked_cost(stk, u, delta), J) < 1e-8);
    // Gradient of the quadratic cost vanishes at the optimum.
    const Vec grad = stk.calR() * u + stk.F.transpose() * stk.calQ() * (stk.F * u + stk.G * delta);
    CHECK(grad.norm() <= 1e-8 * (1.0 + u.norm()));
    for (int s = 0; s < 50; ++s) {
      const Vec other = u + fixtures::random_vector(rng, u.size(), 0.3);
      CHECK(stacked_cost(stk, other, delta) > J);
    }
  }
}

TEST_CASE("indefinite costs are rejected") {
  const LtvSystem sys = scalar_system();
  StackedDynamics stk = build_stacked(sys, CostWeights::constant(Mat::Ones(1, 1), Mat::Ones(1, 1), 1));
  stk.C(0, 0) = -1.0;
  stk.Cinv(0, 0) = -1.0;
  CHECK_THROWS((void)build_oracle(stk));
}
