#pragma once

#include <utility>
#include <vector>

#include "regret/model.hpp"

namespace regret {

/// Closed-loop maps from delta = [x0; w] to states and inputs,
/// Phi = [Phi_x; Phi_u] = [Phi0 Phiw].
struct SystemResponse {
  int n = 0, m = 0, r = 0, T = 0;
  Mat Phi;

  SystemResponse() = default;
  SystemResponse(const StackedDynamics& stk, Mat phi);

  [[nodiscard]] int Nx() const { return n * (T + 1); }
  [[nodiscard]] int Nu() const { return m * (T + 1); }
  [[nodiscard]] Mat Phi_x() const { return Phi.topRows(Nx()); }
  [[nodiscard]] Mat Phi_u() const { return Phi.bottomRows(Nu()); }
  [[nodiscard]] Mat Phi0() const { return Phi.leftCols(n); }
  [[nodiscard]] Mat Phiw() const { return Phi.rightCols(r * T); }
};

/// (row, col) entries of Phi that causality forces to zero: the response of
/// x_k and u_k to w_j for k <= j.
[[nodiscard]] std::vector<std::pair<int, int>> causality_mask(int n, int m, int r, int T);

/// Largest magnitude among the masked entries.
[[nodiscard]] double causality_violation(const StackedDynamics& stk, const Mat& Phi);

/// max |[I - ZA, -ZB] Phi - E|.
[[nodiscard]] double residual(const StackedDynamics& stk, const Mat& Phi);

/// Response of the state feedback u = K x, K causal (block lower triangular).
[[nodiscard]] Mat response_from_gain(const StackedDynamics& stk, const Mat& K);

/// Completes Phi from its input rows: Phi_x = G + F Phi_u.
[[nodiscard]] Mat response_from_inputs(const StackedDynamics& stk, const Mat& Phi_u);

enum class Realisation { StateFeedback, DisturbanceFeedback };

class CausalController;

/// Per-rollout state of a controller.  Call input(k, x_k) for k = 0, 1, ..
/// in order; one executor per trajectory.
class ControllerExecutor {
 public:
  explicit ControllerExecutor(const CausalController& ctrl);
  [[nodiscard]] Vec input(int k, const Vec& xk);

 private:
  const CausalController& ctrl_;
  Vec history_;  // x_0..x_k (state feedback) or delta prefix (disturbance feedback)
  Vec x_prev_, u_prev_;
  int next_ = 0;
};

class CausalController {
 public:
  /// Recovers a controller from an achievable, causal response.  Uses the
  /// explicit gain K = Phi_u Phi_x^{-1} when Phi_x is square (r = n, all E_k
  /// invertible), else replays Phi_u on least-squares reconstructed
  /// disturbances.  Throws std::runtime_error if Phi_x is singular.
  static CausalController recover(const StackedDynamics& stk, const Mat& Phi);

  /// Feeds the recorded inputs regardless of the state (open loop).
  static CausalController open_loop(const StackedDynamics& stk, const Vec& u);

  [[nodiscard]] Realisation realisation() const { return realisation_; }
  [[nodiscard]] bool has_gain() const { return realisation_ == Realisation::StateFeedback; }
  [[nodiscard]] const Mat& gain() const { return K_; }
  [[nodiscard]] const Mat& input_response() const { return Phi_u_; }
  [[nodiscard]] ControllerExecutor start() const { return ControllerExecutor(*this); }

  int n = 0, m = 0, r = 0, T = 0;

 private:
  friend class ControllerExecutor;
  Realisation realisation_ = Realisation::DisturbanceFeedback;
  bool open_loop_ = false;
  Mat K_;
  Mat Phi_u_;
  Vec u_open_;
  std::vector<Mat> A_, B_, Epinv_;
};

/// Inverse of a block lower-triangular matrix with square diagonal blocks of
/// size `b`, by block forward substitution.
[[nodiscard]] Mat block_lower_inverse(const Mat& L, int b);

}  // namespace regret
