#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "regret/slp.hpp"

using namespace regret;

namespace {

// Random causal gain: block lower triangular including the diagonal blocks.
Mat random_causal_gain(std::mt19937_64& rng, int n, int m, int T, double scale) {
  Mat K = Mat::Zero(m * (T + 1), n * (T + 1));
  for (int k = 0; k <= T; ++k)
    for (int j = 0; j <= k; ++j) K.block(k * m, j * n, m, n) = fixtures::random_matrix(rng, m, n, scale);
  return K;
}

// Rolls the closed loop of `ctrl` and returns [x; u].
Vec closed_loop(const LtvSystem& sys, const CausalController& ctrl, const Vec& x0, const Vec& w) {
  const int n = sys.n, m = sys.m, r = sys.r, T = sys.T;
  Vec z(n * (T + 1) + m * (T + 1));
  auto exec = ctrl.start();
  Vec x = x0;
  for (int k = 0; k <= T; ++k) {
    const Vec u = exec.input(k, x);
    z.segment(k * n, n) = x;
    z.segment(n * (T + 1) + k * m, m) = u;
    if (k < T) x = sys.A[k] * x + sys.B[k] * u + sys.E[k] * w.segment(k * r, r);
  }
  return z;
}

}  // namespace

TEST_CASE("causality mask sizes") {
  CHECK(causality_mask(1, 1, 1, 1).size() == 2);
  CHECK(causality_mask(1, 1, 1, 0).empty());
  // (n + m) r (T - k) summed over k = 0..T.
  CHECK(causality_mask(2, 1, 2, 2).size() == 18);
  const auto mask = causality_mask(1, 1, 1, 1);
  // Rows: x0, x1, u0, u1; column 1 is w0.
  CHECK(std::find(mask.begin(), mask.end(), std::make_pair(0, 1)) != mask.end());
  CHECK(std::find(mask.begin(), mask.end(), std::make_pair(2, 1)) != mask.end());
}

TEST_CASE("achievability residual") {
  const LtvSystem sys = fixtures::spring_damper(6);
  const auto stk = build_stacked(sys, fixtures::spring_damper_costs(6));
  const Mat open = response_from_gain(stk, Mat::Zero(stk.Nu(), stk.Nx()));
  CHECK(residual(stk, open) <= 1e-12);
  CHECK(causality_violation(stk, open) == 0.0);
  CHECK(residual(stk, Mat::Zero(stk.Nz(), stk.Nd())) == doctest::Approx(1.0));
}

TEST_CASE("zero gain round trip") {
  const LtvSystem sys = fixtures::spring_damper(4);
  const auto stk = build_stacked(sys, fixtures::spring_damper_costs(4));
  const auto ctrl = CausalController::recover(stk, response_from_gain(stk, Mat::Zero(stk.Nu(), stk.Nx())));
  REQUIRE(ctrl.has_gain());
  CHECK(ctrl.gain().norm() == 0.0);
}

TEST_CASE("scalar causal gain round trip") {
  std::mt19937_64 rng(21);
  const LtvSystem sys = LtvSystem::constant(Mat::Constant(1, 1, 0.9), Mat::Ones(1, 1), Mat::Ones(1, 1), 3);
  const auto stk = build_stacked(sys, CostWeights::constant(Mat::Ones(1, 1), Mat::Ones(1, 1), 3));
  const Mat K = random_causal_gain(rng, 1, 1, 3, 0.5);
  const auto ctrl = CausalController::recover(stk, response_from_gain(stk, K));
  CHECK((ctrl.gain() - K).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("gain round trip on random systems") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const int m = std::uniform_int_distribution<int>(1, 2)(rng);
    const int T = std::uniform_int_distribution<int>(0, 6)(rng);
    const LtvSystem sys = fixtures::random_system(rng, n, m, n, T);
    const auto stk = build_stacked(sys, fixtures::random_costs(rng, n, m, T));
    const Mat K = random_causal_gain(rng, n, m, T, 0.3);
    const Mat Phi = response_from_gain(stk, K);
    CHECK(residual(stk, Phi) <= 1e-9);
    CHECK(causality_violation(stk, Phi) == 0.0);
    const auto ctrl = CausalController::recover(stk, Phi);
    REQUIRE(ctrl.has_gain());
    CHECK((ctrl.gain() - K).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, K.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("closed loop reproduces the response") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3, m = 2, T = 5;
    const int r = trial % 2 == 0 ? 3 : 2;  // square and thin disturbance channels
    const LtvSystem sys = fixtures::random_system(rng, n, m, r, T);
    const auto stk = build_stacked(sys, fixtures::random_costs(rng, n, m, T));
    const Mat Phi = response_from_gain(stk, random_causal_gain(rng, n, m, T, 0.3));
    const auto ctrl = CausalController::recover(stk, Phi);
    CHECK(ctrl.has_gain() == (r == n));
    const Vec x0 = fixtures::random_vector(rng, n);
    const Vec w = fixtures::random_vector(rng, r * T);
    const Vec z = closed_loop(sys, ctrl, x0, w);
    const Vec ref = Phi * make_delta(x0, w);
    CHECK((z - ref).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("response from inputs completes the state rows") {
  std::mt19937_64 rng(24);
  const LtvSystem sys = fixtures::random_system(rng, 2, 1, 2, 4);
  const auto stk = build_stacked(sys, fixtures::random_costs(rng, 2, 1, 4));
  const Mat Phi = response_from_gain(stk, random_causal_gain(rng, 2, 1, 4, 0.4));
  const Mat again = response_from_inputs(stk, Phi.bottomRows(stk.Nu()));
  CHECK((again - Phi).norm() <= 1e-10 * Phi.norm());
}

TEST_CASE("recover rejects unachievable responses") {
  const LtvSystem sys = fixtures::spring_damper(3);
  const auto stk = build_stacked(sys, fixtures::spring_damper_costs(3));
  CHECK_THROWS_AS((void)CausalController::recover(stk, Mat::Zero(stk.Nz(), stk.Nd())), std::invalid_argument);
  CHECK_THROWS_AS(SystemResponse(stk, Mat::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("executor enforces step order") {
  const LtvSystem sys = fixtures::spring_damper(2);
  const auto stk = build_stacked(sys, fixtures::spring_damper_costs(2));
  const auto ctrl = CausalController::open_loop(stk, Vec::Ones(stk.Nu()));
  auto exec = ctrl.start();
  (void)exec.input(0, Vec::Zero(2));
  CHECK_THROWS_AS((void)exec.input(2, Vec::Zero(2)), std::logic_error);
}

TEST_CASE("block lower inverse") {
  std::mt19937_64 rng(25);
  Mat L = Mat::Zero(6, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) L.block(2 * i, 2 * j, 2, 2) = fixtures::random_matrix(rng, 2, 2);
  for (int i = 0; i < 3; ++i) L.block(2 * i, 2 * i, 2, 2) += 3.0 * Mat::Identity(2, 2);
  CHECK((block_lower_inverse(L, 2) * L - Mat::Identity(6, 6)).norm() < 1e-12);
}
