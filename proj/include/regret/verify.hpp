#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "regret/model.hpp"

namespace regret::verify {

/// Outcome of comparing a library value against an oracle value.
struct OracleReport {
  std::string name;
  double value = 0.0;
  double oracle = 0.0;
  double rel_gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  [[nodiscard]] std::string to_json() const;
};

/// |value - oracle| / max(1, |oracle|) against `tolerance`.
[[nodiscard]] OracleReport compare(const std::string& name, double value, double oracle, double tolerance);
/// One-sided check value <= bound + tolerance; rel_gap holds the excess.
[[nodiscard]] OracleReport upper_bound(const std::string& name, double value, double bound, double tolerance);

/// One JSON object per line.
void write_jsonl(std::ostream& os, const std::vector<OracleReport>& reports);

// The oracles below rebuild every operator from step-by-step simulation and
// dense least squares; none of them call into the stacked-operator code.

/// States x_0..x_T (stacked) of the open-loop system under u and w.
[[nodiscard]] Vec simulate_states(const LtvSystem& sys, const Vec& x0, const Vec& u, const Vec& w);

/// sum_k x_k'Q_k x_k + u_k'R_k u_k of the open-loop trajectory.
[[nodiscard]] double trajectory_cost(const LtvSystem& sys, const CostWeights& costs, const Vec& x0, const Vec& u,
                                     const Vec& w);

/// Affine maps x = Fu u + Fd delta recovered column by column from impulse simulations.
struct ImpulseOperators {
  Mat Fu;
  Mat Fd;
};
[[nodiscard]] ImpulseOperators impulse_operators(const LtvSystem& sys);

/// min_u of the quadratic cost by a QR least-squares solve.
[[nodiscard]] double noncausal_cost_oracle(const LtvSystem& sys, const CostWeights& costs, const Vec& delta);

/// Benchmark Gram matrix delta -> min_u cost, built from QR projections.
[[nodiscard]] Mat noncausal_gram_oracle(const LtvSystem& sys, const CostWeights& costs);

/// Finite-horizon LQR gains by backward Riccati recursion with terminal weight
/// Q_T: u_k = -K_k x_k for k < T, and u_T = 0.
[[nodiscard]] std::vector<Mat> lqr_oracle(const LtvSystem& sys, const CostWeights& costs);

/// Inputs u_0..u_T (stacked) of the LQR feedback under (x0, w).
[[nodiscard]] Vec lqr_inputs(const LtvSystem& sys, const std::vector<Mat>& K, const Vec& x0, const Vec& w);

/// Regret of a response as an explicit quadratic w'Mw + 2b'w + c.
struct QuadraticForm {
  Mat M;
  Vec b;
  double c = 0.0;
  [[nodiscard]] double operator()(const Vec& w) const { return w.dot(M * w) + 2.0 * b.dot(w) + c; }
};

/// Regret quadratic of Phi at x0, assembled from the cost weights and the
/// benchmark Gram matrix of noncausal_gram_oracle.
[[nodiscard]] QuadraticForm regret_form_oracle(const LtvSystem& sys, const CostWeights& costs, const Mat& Phi,
                                               const Vec& x0);

/// Lattice maximum of `f` over ||w||^2 <= omega with grid_n points per axis,
/// plus every lattice direction pushed radially onto the sphere.  Lower bound
/// on the true maximum.  Throws std::invalid_argument when the dimension
/// exceeds 4.
[[nodiscard]] double inner_max_oracle(const QuadraticForm& f, double omega, int grid_n);

/// Lattice maximum over the product of intervals w_k' P w_k <= 1 for r = 1.
/// Throws std::invalid_argument for r != 1 or T > 4.
[[nodiscard]] double pointwise_grid_oracle(const QuadraticForm& f, double P, int T, int grid_n);

}  // namespace regret::verify
