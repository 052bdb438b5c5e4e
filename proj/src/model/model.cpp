#include "regret/model.hpp"

#include <stdexcept>
#include <string>

namespace regret {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool is_pd(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() == 0) return false;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + M.cwiseAbs().maxCoeff())) return false;
  Eigen::LLT<Mat> llt(M);
  return llt.info() == Eigen::Success;
}

}  // namespace

LtvSystem LtvSystem::constant(const Mat& A, const Mat& B, const Mat& E, int T) {
  LtvSystem s;
  s.n = static_cast<int>(A.rows());
  s.m = static_cast<int>(B.cols());
  s.r = static_cast<int>(E.cols());
  s.T = T;
  s.A.assign(T, A);
  s.B.assign(T, B);
  s.E.assign(T, E);
  return s;
}

void LtvSystem::validate() const {
  require(n > 0 && m > 0 && r > 0, "system: dimensions must be positive");
  require(T >= 0, "system: horizon must be nonnegative");
  require(r <= n, "system: disturbance dimension r must not exceed n");
  require(static_cast<int>(A.size()) == T && static_cast<int>(B.size()) == T && static_cast<int>(E.size()) == T,
          "system: A, B, E must have exactly T entries");
  for (int k = 0; k < T; ++k) {
    const std::string at = " at step " + std::to_string(k);
    require(A[k].rows() == n && A[k].cols() == n, "system: A has wrong shape" + at);
    require(B[k].rows() == n && B[k].cols() == m, "system: B has wrong shape" + at);
    require(E[k].rows() == n && E[k].cols() == r, "system: E has wrong shape" + at);
    require(A[k].allFinite() && B[k].allFinite() && E[k].allFinite(), "system: non-finite entry" + at);
    Eigen::ColPivHouseholderQR<Mat> qr(E[k]);
    qr.setThreshold(1e-12);
    require(qr.rank() == r, "system: E is not full column rank" + at);
  }
}

CostWeights CostWeights::constant(const Mat& Q, const Mat& R, int T) {
  CostWeights c;
  c.Q.assign(T + 1, Q);
  c.R.assign(T + 1, R);
  return c;
}

void CostWeights::validate(const LtvSystem& sys) const {
  require(static_cast<int>(Q.size()) == sys.T + 1 && static_cast<int>(R.size()) == sys.T + 1,
          "costs: Q and R must have T+1 entries");
  for (int k = 0; k <= sys.T; ++k) {
    const std::string at = " at step " + std::to_string(k);
    require(Q[k].rows() == sys.n && Q[k].cols() == sys.n, "costs: Q has wrong shape" + at);
    require(R[k].rows() == sys.m && R[k].cols() == sys.m, "costs: R has wrong shape" + at);
    require(is_pd(Q[k]), "costs: Q is not symmetric positive definite" + at);
    require(is_pd(R[k]), "costs: R is not symmetric positive definite" + at);
  }
}

StackedDynamics build_stacked(const LtvSystem& sys, const CostWeights& costs) {
  sys.validate();
  costs.validate(sys);
  StackedDynamics s;
  s.n = sys.n;
  s.m = sys.m;
  s.r = sys.r;
  s.T = sys.T;
  const int n = sys.n, m = sys.m, r = sys.r, T = sys.T;
  const int Nx = s.Nx(), Nu = s.Nu(), Nd = s.Nd();

  s.calA = Mat::Zero(Nx, Nx);
  s.calB = Mat::Zero(Nx, Nu);
  s.calE = Mat::Zero(Nx, Nd);
  s.Z = Mat::Zero(Nx, Nx);
  s.calE.topLeftCorner(n, n).setIdentity();
  for (int k = 0; k < T; ++k) {
    s.calA.block(k * n, k * n, n, n) = sys.A[k];
    s.calB.block(k * n, k * m, n, m) = sys.B[k];
    s.calE.block((k + 1) * n, n + k * r, n, r) = sys.E[k];
    s.Z.block((k + 1) * n, k * n, n, n).setIdentity();
  }

  s.F = Mat::Zero(Nx, Nu);
  s.G = Mat::Zero(Nx, Nd);
  s.G.topLeftCorner(n, n).setIdentity();
  for (int k = 0; k < T; ++k) {
    s.F.middleRows((k + 1) * n, n) = sys.A[k] * s.F.middleRows(k * n, n);
    s.F.block((k + 1) * n, k * m, n, m) += sys.B[k];
    s.G.middleRows((k + 1) * n, n) = sys.A[k] * s.G.middleRows(k * n, n);
    s.G.block((k + 1) * n, n + k * r, n, r) += sys.E[k];
  }

  s.C = Mat::Zero(Nx + Nu, Nx + Nu);
  s.Cinv = Mat::Zero(Nx + Nu, Nx + Nu);
  for (int k = 0; k <= T; ++k) {
    s.C.block(k * n, k * n, n, n) = costs.Q[k];
    s.C.block(Nx + k * m, Nx + k * m, m, m) = costs.R[k];
    Mat qi = costs.Q[k].llt().solve(Mat::Identity(n, n));
    Mat ri = costs.R[k].llt().solve(Mat::Identity(m, m));
    s.Cinv.block(k * n, k * n, n, n) = 0.5 * (qi + qi.transpose());
    s.Cinv.block(Nx + k * m, Nx + k * m, m, m) = 0.5 * (ri + ri.transpose());
  }
  return s;
}

Vec make_delta(const Vec& x0, const Vec& w) {
  Vec d(x0.size() + w.size());
  d << x0, w;
  return d;
}

DisturbanceModel DisturbanceModel::energy(double omega) {
  DisturbanceModel d;
  d.kind = DisturbanceKind::EnergyBall;
  d.omega = omega;
  return d;
}

DisturbanceModel DisturbanceModel::ellipsoid(const Mat& P) {
  DisturbanceModel d;
  d.kind = DisturbanceKind::PointwiseEllipsoid;
  d.P = P;
  return d;
}

double derived_omega(const DisturbanceModel& model, int T) {
  if (model.kind == DisturbanceKind::EnergyBall) {
    require(model.omega >= 0.0, "disturbance: omega must be nonnegative");
    return model.omega;
  }
  require(is_pd(model.P), "disturbance: P is not symmetric positive definite");
  Eigen::SelfAdjointEigenSolver<Mat> es(model.P, Eigen::EigenvaluesOnly);
  return static_cast<double>(T) / es.eigenvalues()(0);
}

void ConstraintSet::validate(int n, int m) const {
  require(Hx.cols() == n, "constraints: Hx must have n columns");
  require(Hu.cols() == m, "constraints: Hu must have m columns");
  require(Hx.allFinite() && Hu.allFinite(), "constraints: non-finite entry");
}

Mat ConstraintSet::stacked(int T) const {
  const int nx = static_cast<int>(Hx.rows()), nu = static_cast<int>(Hu.rows());
  const int n = static_cast<int>(Hx.cols()), m = static_cast<int>(Hu.cols());
  Mat H = Mat::Zero((nx + nu) * (T + 1), (n + m) * (T + 1));
  for (int k = 0; k <= T; ++k) {
    H.block(k * nx, k * n, nx, n) = Hx;
    H.block(nx * (T + 1) + k * nu, n * (T + 1) + k * m, nu, m) = Hu;
  }
  return H;
}

}  // namespace regret
