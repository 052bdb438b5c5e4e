#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "regret/analysis.hpp"
#include "regret/sim.hpp"
#include "regret/verify.hpp"

using namespace regret;
using fixtures::rel;

TEST_CASE("scalar ball maximum") {
  const BallMaximum bm = maximize_on_ball(Mat::Constant(1, 1, 2.0), Vec::Ones(1), 0.0, 1.0);
  CHECK(bm.w(0) == doctest::Approx(1.0));
  CHECK(bm.value == doctest::Approx(4.0));
  verify::QuadraticForm f{Mat::Constant(1, 1, 2.0), Vec::Ones(1), 0.0};
  CHECK(verify::inner_max_oracle(f, 1.0, 401) == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("concave quadratic peaks inside") {
  const BallMaximum bm = maximize_on_ball(-Mat::Identity(3, 3), Vec::Zero(3), 1.5, 4.0);
  CHECK(bm.w.norm() == 0.0);
  CHECK(bm.value == doctest::Approx(1.5));
  CHECK(bm.interior);
  // Interior stationary point of a strictly concave quadratic.
  const BallMaximum in = maximize_on_ball(-2.0 * Mat::Identity(2, 2), Vec::Ones(2), 0.0, 10.0);
  CHECK((in.w - 0.5 * Vec::Ones(2)).norm() < 1e-8);
}

TEST_CASE("hard case fills the ball along the top eigenvector") {
  Mat M = Mat::Zero(2, 2);
  M.diagonal() << 3.0, 1.0;
  const Vec b = (Vec(2) << 0.0, 0.5).finished();
  const BallMaximum bm = maximize_on_ball(M, b, 0.0, 1.0);
  CHECK(bm.hard_case);
  CHECK(bm.w.squaredNorm() == doctest::Approx(1.0));
  const verify::QuadraticForm f{M, b, 0.0};
  // Exact value: w2 = b2/(3 - 1) = 0.25, w1^2 = 1 - 0.0625.
  CHECK(bm.value == doctest::Approx(3.0 * (1.0 - 0.0625) + 0.0625 + 2.0 * 0.5 * 0.25));
  CHECK(verify::inner_max_oracle(f, 1.0, 401) <= bm.value + 1e-12);
}

TEST_CASE("secular solver agrees with the grid oracle") {
  std::mt19937_64 rng(201);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 3;
    Mat M = fixtures::random_matrix(rng, d, d);
    M = 0.5 * (M + M.transpose());
    const Vec b = fixtures::random_vector(rng, d);
    const double c = fixtures::random_vector(rng, 1)(0);
    const double omega = 0.1 + 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const BallMaximum bm = maximize_on_ball(M, b, c, omega);
    CHECK(bm.w.squaredNorm() <= omega * (1.0 + 1e-9));
    const int grid = d == 1 ? 4001 : d == 2 ? 401 : 101;
    const double g = verify::inner_max_oracle({M, b, c}, omega, grid);
    const double scale = M.norm() * omega + b.norm() * std::sqrt(omega) + std::abs(c) + 1.0;
    CHECK(g <= bm.value + 1e-9 * scale);
    CHECK(bm.value - g <= 2e-3 * scale);
  }
}

TEST_CASE("dimension guard of the grid oracle") {
  const verify::QuadraticForm f{Mat::Identity(5, 5), Vec::Zero(5), 0.0};
  CHECK_THROWS_AS((void)verify::inner_max_oracle(f, 1.0, 3), std::invalid_argument);
}

TEST_CASE("certificate of an oracle-exact response") {
  const LtvSystem sys = LtvSystem::constant(Mat::Identity(2, 2), Mat::Ones(2, 1), Mat::Identity(2, 2), 0);
  const auto pb = SynthesisProblem::build(sys, CostWeights::constant(Mat::Identity(2, 2), Mat::Identity(1, 1), 0));
  Mat Phi = Mat::Zero(3, 2);
  Phi.topRows(2) = Mat::Identity(2, 2);
  const auto cert = regret_certificate(pb, Phi);
  CHECK(std::abs(cert.sigma_max) < 1e-12);
}

TEST_CASE("strong duality and spectral bounds on small instances") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 2, m = 1, r = n, T = 2 + trial % 3;
    const LtvSystem sys = fixtures::random_system(rng, n, m, r, T);
    const CostWeights costs = fixtures::random_costs(rng, n, m, T);
    const auto pb = SynthesisProblem::build(sys, costs);
    const Vec x0 = fixtures::random_vector(rng, n);
    const double omega = std::vector<double>{0.1, 1.0, 10.0}[trial % 3];
    const auto res = synth_energy_regret(pb, x0, omega);
    REQUIRE(res.ok());
    REQUIRE(res.controller.has_value());
    const BallMaximum wc = worst_case_disturbance(pb, res.Phi, x0, omega);
    CHECK(rel(wc.value, res.gamma_star) <= 1e-4);
    const Plant plant = Plant::build(sys, costs);
    const Trajectory tr = rollout(plant, *res.controller, x0, wc.w);
    CHECK(rel(tr.regret, res.gamma_star) <= 1e-4);
    const auto cert = regret_certificate(pb, res.Phi);
    const double ratio = res.gamma_star / (omega + x0.squaredNorm());
    CHECK(ratio <= cert.sigma_max + 1e-8);
    CHECK(ratio >= cert.sigma_min - 1e-8);
    // Monte-Carlo check of the spectral bound.
    for (int s = 0; s < 100; ++s) {
      const Vec w = fixtures::random_vector(rng, r * T);
      const Trajectory t = rollout(plant, *res.controller, x0, w);
      CHECK(t.regret <= cert.bound(x0, w) + 1e-8 * std::max(1.0, t.regret));
    }
    // The top eigenvector attains the bound.
    const Vec top = 2.0 * cert.top_direction;
    const Trajectory t = rollout(plant, *res.controller, top.head(n), top.tail(r * T));
    CHECK(std::abs(t.regret - cert.sigma_max * top.squaredNorm()) <= 1e-6 * std::max(1.0, t.regret));
  }
}

TEST_CASE("regret quadratic matches the oracle form") {
  std::mt19937_64 rng(203);
  const LtvSystem sys = fixtures::random_system(rng, 2, 1, 2, 3);
  const CostWeights costs = fixtures::random_costs(rng, 2, 1, 3);
  const auto pb = SynthesisProblem::build(sys, costs);
  const Mat Phi = h2_response(pb.stk);
  const Vec x0 = fixtures::random_vector(rng, 2);
  const RegretQuadratic q = regret_quadratic(pb, Phi, x0);
  const auto f = verify::regret_form_oracle(sys, costs, Phi, x0);
  CHECK((q.M - f.M).norm() <= 1e-9 * (1.0 + f.M.norm()));
  CHECK((q.b - f.b).norm() <= 1e-9 * (1.0 + f.b.norm()));
  CHECK(std::abs(q.c - f.c) <= 1e-9 * (1.0 + std::abs(f.c)));
  CHECK_THROWS_AS((void)regret_quadratic(pb, Phi, Vec::Zero(3)), std::invalid_argument);
}
