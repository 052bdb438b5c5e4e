#include "regret/slp.hpp"

#include <stdexcept>
#include <string>

namespace regret {

SystemResponse::SystemResponse(const StackedDynamics& stk, Mat phi)
    : n(stk.n), m(stk.m), r(stk.r), T(stk.T), Phi(std::move(phi)) {
  if (Phi.rows() != stk.Nz() || Phi.cols() != stk.Nd())
    throw std::invalid_argument("slp: Phi must be (n+m)(T+1) x (n+rT)");
}

std::vector<std::pair<int, int>> causality_mask(int n, int m, int r, int T) {
  std::vector<std::pair<int, int>> mask;
  const int Nx = n * (T + 1);
  for (int j = 0; j < T; ++j)
    for (int c = 0; c < r; ++c) {
      const int col = n + j * r + c;
      for (int k = 0; k <= j; ++k) {
        for (int i = 0; i < n; ++i) mask.emplace_back(k * n + i, col);
        for (int i = 0; i < m; ++i) mask.emplace_back(Nx + k * m + i, col);
      }
    }
  return mask;
}

double causality_violation(const StackedDynamics& stk, const Mat& Phi) {
  double v = 0.0;
  for (const auto& [i, j] : causality_mask(stk.n, stk.m, stk.r, stk.T)) v = std::max(v, std::abs(Phi(i, j)));
  return v;
}

double residual(const StackedDynamics& stk, const Mat& Phi) {
  const int Nx = stk.Nx();
  const Mat lhs = (Mat::Identity(Nx, Nx) - stk.Z * stk.calA) * Phi.topRows(Nx) -
                  stk.Z * stk.calB * Phi.bottomRows(stk.Nu());
  return (lhs - stk.calE).cwiseAbs().maxCoeff();
}

Mat response_from_gain(const StackedDynamics& stk, const Mat& K) {
  const int Nx = stk.Nx();
  if (K.rows() != stk.Nu() || K.cols() != Nx) throw std::invalid_argument("slp: K must be m(T+1) x n(T+1)");
  const Mat M = Mat::Identity(Nx, Nx) - stk.Z * (stk.calA + stk.calB * K);
  // Unit block lower triangular.
  const Mat Phix = M.triangularView<Eigen::UnitLower>().solve(stk.calE);
  Mat Phi(stk.Nz(), stk.Nd());
  Phi << Phix, K * Phix;
  return Phi;
}

Mat response_from_inputs(const StackedDynamics& stk, const Mat& Phi_u) {
  Mat Phi(stk.Nz(), stk.Nd());
  Phi << stk.G + stk.F * Phi_u, Phi_u;
  return Phi;
}

Mat block_lower_inverse(const Mat& L, int b) {
  const int N = static_cast<int>(L.rows());
  if (L.cols() != N || b <= 0 || N % b != 0) throw std::invalid_argument("block_lower_inverse: bad shape");
  const int nb = N / b;
  Mat X = Mat::Zero(N, N);
  std::vector<Eigen::PartialPivLU<Mat>> diag;
  diag.reserve(nb);
  for (int i = 0; i < nb; ++i) {
    diag.emplace_back(L.block(i * b, i * b, b, b));
    if (!(std::abs(diag.back().determinant()) > 0.0)) throw std::runtime_error("block_lower_inverse: singular diagonal block");
  }
  for (int j = 0; j < nb; ++j) {
    X.block(j * b, j * b, b, b) = diag[j].inverse();
    for (int i = j + 1; i < nb; ++i) {
      Mat acc = L.block(i * b, j * b, b, (i - j) * b) * X.block(j * b, j * b, (i - j) * b, b);
      X.block(i * b, j * b, b, b) = -diag[i].solve(acc);
    }
  }
  return X;
}

CausalController CausalController::recover(const StackedDynamics& stk, const Mat& Phi) {
  const double res = residual(stk, Phi);
  if (!(res <= 1e-6 * (1.0 + Phi.cwiseAbs().maxCoeff())))
    throw std::invalid_argument("slp: response violates the achievability constraint (residual " +
                                std::to_string(res) + ")");
  CausalController c;
  c.n = stk.n;
  c.m = stk.m;
  c.r = stk.r;
  c.T = stk.T;
  c.Phi_u_ = Phi.bottomRows(stk.Nu());
  const int n = stk.n, m = stk.m, r = stk.r;
  bool invertible = (r == n);
  for (int k = 0; k < stk.T; ++k) {
    const Mat A = stk.calA.block(k * n, k * n, n, n);
    const Mat B = stk.calB.block(k * n, k * m, n, m);
    const Mat E = stk.calE.block((k + 1) * n, n + k * r, n, r);
    c.A_.push_back(A);
    c.B_.push_back(B);
    c.Epinv_.push_back((E.transpose() * E).ldlt().solve(E.transpose()));
    if (invertible) {
      Eigen::FullPivLU<Mat> lu(E);
      lu.setThreshold(1e-12);
      invertible = lu.isInvertible();
    }
  }
  if (invertible) {
    const Mat inv = block_lower_inverse(Phi.topRows(stk.Nx()), n);
    c.K_ = c.Phi_u_ * inv;
    if (!c.K_.allFinite()) throw std::runtime_error("slp: Phi_x is numerically singular");
    c.realisation_ = Realisation::StateFeedback;
  }
  return c;
}

CausalController CausalController::open_loop(const StackedDynamics& stk, const Vec& u) {
  if (u.size() != stk.Nu()) throw std::invalid_argument("slp: open-loop input has wrong length");
  CausalController c;
  c.n = stk.n;
  c.m = stk.m;
  c.r = stk.r;
  c.T = stk.T;
  c.open_loop_ = true;
  c.u_open_ = u;
  return c;
}

ControllerExecutor::ControllerExecutor(const CausalController& ctrl) : ctrl_(ctrl) {}

Vec ControllerExecutor::input(int k, const Vec& xk) {
  if (k != next_ || k > ctrl_.T) throw std::logic_error("controller executor: steps must be 0..T in order");
  const int n = ctrl_.n, m = ctrl_.m, r = ctrl_.r;
  Vec u;
  if (ctrl_.open_loop_) {
    u = ctrl_.u_open_.segment(k * m, m);
  } else if (ctrl_.realisation_ == Realisation::StateFeedback) {
    history_.conservativeResize(n * (k + 1));
    history_.segment(k * n, n) = xk;
    u = ctrl_.K_.block(k * m, 0, m, n * (k + 1)) * history_;
  } else {
    if (k == 0) {
      history_ = xk;
    } else {
      const Vec resid = xk - ctrl_.A_[k - 1] * x_prev_ - ctrl_.B_[k - 1] * u_prev_;
      history_.conservativeResize(n + r * k);
      history_.segment(n + r * (k - 1), r) = ctrl_.Epinv_[k - 1] * resid;
    }
    u = ctrl_.Phi_u_.block(k * m, 0, m, n + r * k) * history_;
  }
  x_prev_ = xk;
  u_prev_ = u;
  ++next_;
  return u;
}

}  // namespace regret
