#pragma once

#include <Eigen/Dense>
#include <vector>

namespace regret {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// x_{k+1} = A_k x_k + B_k u_k + E_k w_k,  k = 0..T-1.
struct LtvSystem {
  int n = 0;
  int m = 0;
  int r = 0;
  int T = 0;
  std::vector<Mat> A;
  std::vector<Mat> B;
  std::vector<Mat> E;

  /// Replicates one (A, B, E) triple over the horizon.
  static LtvSystem constant(const Mat& A, const Mat& B, const Mat& E, int T);

  /// Throws std::invalid_argument on shape errors, r > n or rank-deficient E_k.
  void validate() const;
};

/// Stage cost x_k' Q_k x_k + u_k' R_k u_k for k = 0..T.
struct CostWeights {
  std::vector<Mat> Q;
  std::vector<Mat> R;

  static CostWeights constant(const Mat& Q, const Mat& R, int T);
  void validate(const LtvSystem& sys) const;
};

/// Stacked operators over the horizon.  Trajectories are ordered
/// x = [x_0; ..; x_T], u = [u_0; ..; u_T], delta = [x_0; w_0; ..; w_{T-1}].
struct StackedDynamics {
  int n = 0, m = 0, r = 0, T = 0;
  Mat calA, calB, calE, Z;
  Mat F;     // x = F u + G delta
  Mat G;
  Mat C;     // blkdiag(Q_0..Q_T, R_0..R_T)
  Mat Cinv;  // block-diagonal inverse

  [[nodiscard]] int Nx() const { return n * (T + 1); }
  [[nodiscard]] int Nu() const { return m * (T + 1); }
  [[nodiscard]] int Nd() const { return n + r * T; }
  [[nodiscard]] int Nz() const { return Nx() + Nu(); }

  /// Stacked cost blocks, convenient views of C.
  [[nodiscard]] Mat calQ() const { return C.topLeftCorner(Nx(), Nx()); }
  [[nodiscard]] Mat calR() const { return C.bottomRightCorner(Nu(), Nu()); }
};

[[nodiscard]] StackedDynamics build_stacked(const LtvSystem& sys, const CostWeights& costs);

/// delta = [x0; w] with w stacked as [w_0; ..; w_{T-1}].
[[nodiscard]] Vec make_delta(const Vec& x0, const Vec& w);

enum class DisturbanceKind { EnergyBall, PointwiseEllipsoid };

struct DisturbanceModel {
  DisturbanceKind kind = DisturbanceKind::EnergyBall;
  double omega = 0.0;  // energy bound ||w||^2 <= omega
  Mat P;               // w_k' P w_k <= 1

  static DisturbanceModel energy(double omega);
  static DisturbanceModel ellipsoid(const Mat& P);
};

/// Smallest omega with ||w||^2 <= omega for all admissible w: T / lambda_min(P)
/// for ellipsoids, the stored omega otherwise.
[[nodiscard]] double derived_omega(const DisturbanceModel& model, int T);

/// Hx x_k <= 1 and Hu u_k <= 1 for every k = 0..T.
struct ConstraintSet {
  Mat Hx;  // n_x x n (may have zero rows)
  Mat Hu;  // n_u x m

  [[nodiscard]] int rows_per_step() const { return static_cast<int>(Hx.rows() + Hu.rows()); }
  /// Hx must have n columns and Hu m columns, even when they have no rows.
  void validate(int n, int m) const;
  /// blkdiag(I (x) Hx, I (x) Hu) acting on [x; u].
  [[nodiscard]] Mat stacked(int T) const;
};

}  // namespace regret
