#include <cmath>
#include <stdexcept>

#include "regret/verify.hpp"

namespace regret::verify {

namespace {

// Upper factor U with U'U = S.
Mat root_factor(const Mat& S) {
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("oracle: weight is not positive definite");
  return llt.matrixU();
}

Mat weight_roots(const std::vector<Mat>& W) {
  int rows = 0;
  for (const auto& w : W) rows += static_cast<int>(w.rows());
  Mat out = Mat::Zero(rows, rows);
  int at = 0;
  for (const auto& w : W) {
    const int d = static_cast<int>(w.rows());
    out.block(at, at, d, d) = root_factor(w);
    at += d;
  }
  return out;
}

Mat weight_blocks(const std::vector<Mat>& Q, const std::vector<Mat>& R) {
  int rows = 0;
  for (const auto& q : Q) rows += static_cast<int>(q.rows());
  for (const auto& q : R) rows += static_cast<int>(q.rows());
  Mat C = Mat::Zero(rows, rows);
  int at = 0;
  for (const auto* list : {&Q, &R})
    for (const auto& q : *list) {
      const int d = static_cast<int>(q.rows());
      C.block(at, at, d, d) = q;
      at += d;
    }
  return C;
}

struct LeastSquares {
  Mat A;  // weighted input map
  Mat B;  // weighted perturbation map
};

LeastSquares weighted_maps(const LtvSystem& sys, const CostWeights& costs) {
  const ImpulseOperators ops = impulse_operators(sys);
  const Mat Qh = weight_roots(costs.Q);
  const Mat Rh = weight_roots(costs.R);
  const int nx = static_cast<int>(Qh.rows()), nu = static_cast<int>(Rh.rows());
  LeastSquares ls;
  ls.A.resize(nx + nu, nu);
  ls.A << Qh * ops.Fu, Rh;
  ls.B = Mat::Zero(nx + nu, ops.Fd.cols());
  ls.B.topRows(nx) = Qh * ops.Fd;
  return ls;
}

// Visits every point of a grid_n^d lattice on [-half, half]^d.
template <class F>
void for_each_lattice_point(int d, int grid_n, double half, F&& visit) {
  if (grid_n < 2) throw std::invalid_argument("oracle: grid_n must be at least 2");
  std::vector<int> idx(d, 0);
  Vec p(d);
  while (true) {
    for (int i = 0; i < d; ++i) p(i) = -half + 2.0 * half * idx[i] / (grid_n - 1);
    visit(p);
    int i = 0;
    while (i < d && ++idx[i] == grid_n) idx[i++] = 0;
    if (i == d) break;
  }
}

}  // namespace

Vec simulate_states(const LtvSystem& sys, const Vec& x0, const Vec& u, const Vec& w) {
  const int n = sys.n, m = sys.m, r = sys.r, T = sys.T;
  Vec xs(n * (T + 1));
  Vec x = x0;
  for (int k = 0; k <= T; ++k) {
    xs.segment(k * n, n) = x;
    if (k < T) x = sys.A[k] * x + sys.B[k] * u.segment(k * m, m) + sys.E[k] * w.segment(k * r, r);
  }
  return xs;
}

double trajectory_cost(const LtvSystem& sys, const CostWeights& costs, const Vec& x0, const Vec& u, const Vec& w) {
  const Vec xs = simulate_states(sys, x0, u, w);
  double J = 0.0;
  for (int k = 0; k <= sys.T; ++k) {
    const Vec xk = xs.segment(k * sys.n, sys.n);
    const Vec uk = u.segment(k * sys.m, sys.m);
    J += xk.dot(costs.Q[k] * xk) + uk.dot(costs.R[k] * uk);
  }
  return J;
}

ImpulseOperators impulse_operators(const LtvSystem& sys) {
  const int n = sys.n, m = sys.m, r = sys.r, T = sys.T;
  const int Nu = m * (T + 1), Nd = n + r * T;
  ImpulseOperators ops;
  ops.Fu.resize(n * (T + 1), Nu);
  ops.Fd.resize(n * (T + 1), Nd);
  const Vec zx = Vec::Zero(n), zu = Vec::Zero(Nu), zw = Vec::Zero(r * T);
  for (int j = 0; j < Nu; ++j) ops.Fu.col(j) = simulate_states(sys, zx, Vec::Unit(Nu, j), zw);
  for (int j = 0; j < Nd; ++j) {
    const Vec e = Vec::Unit(Nd, j);
    ops.Fd.col(j) = simulate_states(sys, e.head(n), zu, e.tail(r * T));
  }
  return ops;
}

double noncausal_cost_oracle(const LtvSystem& sys, const CostWeights& costs, const Vec& delta) {
  const LeastSquares ls = weighted_maps(sys, costs);
  const Vec rhs = -(ls.B * delta);
  const Vec u = ls.A.colPivHouseholderQr().solve(rhs);
  return (ls.A * u - rhs).squaredNorm();
}

Mat noncausal_gram_oracle(const LtvSystem& sys, const CostWeights& costs) {
  const LeastSquares ls = weighted_maps(sys, costs);
  const Mat U = ls.A.colPivHouseholderQr().solve(ls.B);
  const Mat res = ls.B - ls.A * U;
  Mat O = res.transpose() * res;
  return 0.5 * (O + O.transpose());
}

std::vector<Mat> lqr_oracle(const LtvSystem& sys, const CostWeights& costs) {
  const int T = sys.T;
  std::vector<Mat> K(T + 1);
  K[T] = Mat::Zero(sys.m, sys.n);
  Mat P = costs.Q[T];
  for (int k = T - 1; k >= 0; --k) {
    const Mat& A = sys.A[k];
    const Mat& B = sys.B[k];
    const Mat S = costs.R[k] + B.transpose() * P * B;
    K[k] = S.ldlt().solve(B.transpose() * P * A);
    P = costs.Q[k] + A.transpose() * P * (A - B * K[k]);
    P = 0.5 * (P + P.transpose());
  }
  return K;
}

Vec lqr_inputs(const LtvSystem& sys, const std::vector<Mat>& K, const Vec& x0, const Vec& w) {
  const int m = sys.m, r = sys.r, T = sys.T;
  Vec u = Vec::Zero(m * (T + 1));
  Vec x = x0;
  for (int k = 0; k <= T; ++k) {
    const Vec uk = -K[k] * x;
    u.segment(k * m, m) = uk;
    if (k < T) x = sys.A[k] * x + sys.B[k] * uk + sys.E[k] * w.segment(k * r, r);
  }
  return u;
}

QuadraticForm regret_form_oracle(const LtvSystem& sys, const CostWeights& costs, const Mat& Phi, const Vec& x0) {
  const int n = sys.n, d = sys.r * sys.T;
  const Mat C = weight_blocks(costs.Q, costs.R);
  if (Phi.rows() != C.rows() || Phi.cols() != n + d) throw std::invalid_argument("oracle: Phi has wrong shape");
  Mat R = Phi.transpose() * C * Phi - noncausal_gram_oracle(sys, costs);
  R = 0.5 * (R + R.transpose());
  QuadraticForm q;
  q.M = R.bottomRightCorner(d, d);
  q.b = R.bottomLeftCorner(d, n) * x0;
  q.c = x0.dot(R.topLeftCorner(n, n) * x0);
  return q;
}

double inner_max_oracle(const QuadraticForm& f, double omega, int grid_n) {
  const int d = static_cast<int>(f.M.rows());
  if (d > 4) throw std::invalid_argument("inner_max_oracle: refuses more than 4 disturbance coordinates");
  if (!(omega >= 0.0)) throw std::invalid_argument("inner_max_oracle: omega must be nonnegative");
  if (d == 0 || omega == 0.0) return f.c;
  const double rho = std::sqrt(omega);
  double best = -INFINITY;
  for_each_lattice_point(d, grid_n, rho, [&](const Vec& p) {
    const double nn = p.norm();
    if (nn * nn <= omega) best = std::max(best, f(p));
    if (nn > 0.0) best = std::max(best, f(p * (rho / nn)));
  });
  return best;
}

double pointwise_grid_oracle(const QuadraticForm& f, double P, int T, int grid_n) {
  if (f.M.rows() != T) throw std::invalid_argument("pointwise_grid_oracle: needs one disturbance coordinate per step");
  if (T > 4) throw std::invalid_argument("pointwise_grid_oracle: refuses horizons above 4");
  if (!(P > 0.0)) throw std::invalid_argument("pointwise_grid_oracle: P must be positive");
  if (T == 0) return f.c;
  double best = -INFINITY;
  for_each_lattice_point(T, grid_n, 1.0 / std::sqrt(P), [&](const Vec& p) { best = std::max(best, f(p)); });
  return best;
}

}  // namespace regret::verify
