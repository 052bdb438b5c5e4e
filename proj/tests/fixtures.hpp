#pragma once

#include <random>

#include "regret/model.hpp"

namespace fixtures {

using regret::CostWeights;
using regret::LtvSystem;
using regret::Mat;
using regret::Vec;

/// Mass-spring-damper (c = 0.2, d = 0.1, Ts = 0.1) with Q = 0.1 I, R = 1.
inline LtvSystem spring_damper(int T) {
  Mat A(2, 2), B(2, 1);
  A << 1.0, 0.1, -0.02, 0.99;
  B << 0.0, 0.1;
  return LtvSystem::constant(A, B, Mat::Identity(2, 2), T);
}

inline CostWeights spring_damper_costs(int T) {
  return CostWeights::constant(0.1 * Mat::Identity(2, 2), Mat::Identity(1, 1), T);
}

inline Vec spring_damper_x0() { return (Vec(2) << 1.0, 10.0).finished(); }

inline Mat random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = nd(rng);
  return M;
}

inline Vec random_vector(std::mt19937_64& rng, int n, double scale = 1.0) { return random_matrix(rng, n, 1, scale); }

inline Mat random_pd(std::mt19937_64& rng, int n) {
  const Mat X = random_matrix(rng, n, n);
  return X * X.transpose() / n + 0.5 * Mat::Identity(n, n);
}

/// Random time-varying system; E_k has full column rank.
inline LtvSystem random_system(std::mt19937_64& rng, int n, int m, int r, int T) {
  LtvSystem s;
  s.n = n;
  s.m = m;
  s.r = r;
  s.T = T;
  for (int k = 0; k < T; ++k) {
    s.A.push_back(random_matrix(rng, n, n, 0.6));
    s.B.push_back(random_matrix(rng, n, m));
    Mat E = random_matrix(rng, n, r, 0.5);
    E.topRows(r) += Mat::Identity(r, r);
    s.E.push_back(E);
  }
  return s;
}

inline CostWeights random_costs(std::mt19937_64& rng, int n, int m, int T) {
  CostWeights c;
  for (int k = 0; k <= T; ++k) {
    c.Q.push_back(random_pd(rng, n));
    c.R.push_back(random_pd(rng, m));
  }
  return c;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace fixtures
