#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "regret/model.hpp"
#include "regret/noncausal.hpp"
#include "regret/slp.hpp"

namespace regret {

/// One closed-loop episode.  Rows of x, u, w are time steps.
struct Trajectory {
  Mat x;  // (T+1) x n
  Mat u;  // (T+1) x m
  Mat w;  // T x r
  Vec stage_costs;  // T+1
  double total_cost = 0.0;
  double benchmark = 0.0;  // J* of the same (x0, w)
  double regret = 0.0;
};

/// Thrown when the state leaves the finite range.
class RolloutError : public std::runtime_error {
 public:
  RolloutError(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
  [[nodiscard]] int step() const { return step_; }

 private:
  int step_;
};

/// Everything a rollout needs besides the controller.
struct Plant {
  LtvSystem sys;
  CostWeights costs;
  NonCausalOracle oracle;

  static Plant build(const LtvSystem& sys, const CostWeights& costs);
};

/// Simulates x_{k+1} = A_k x_k + B_k u_k + E_k w_k under `ctrl`; w is
/// stacked [w_0; ..; w_{T-1}].
[[nodiscard]] Trajectory rollout(const Plant& plant, const CausalController& ctrl, const Vec& x0, const Vec& w);

/// Prefix sums of the stage costs.
[[nodiscard]] Vec cumulative_cost_series(const Trajectory& traj);

/// max(Hx x_k - 1, Hu u_k - 1) per step (T+1 entries).
[[nodiscard]] Vec constraint_violation_series(const Trajectory& traj, const ConstraintSet& cs);
/// Largest entry of the series; negative means strictly feasible.
[[nodiscard]] double check_constraints(const Trajectory& traj, const ConstraintSet& cs);

enum class ScenarioKind { Constant, RandomInEllipsoid, BoundaryEllipsoid, WorstCaseEnergy, Custom };

struct DisturbanceScenario {
  ScenarioKind kind = ScenarioKind::Constant;
  Vec value;  // Constant: one w_k (r); WorstCaseEnergy / Custom: the stacked sequence (rT)
  Mat P;      // ellipsoid kinds
  std::uint64_t seed = 0;

  static DisturbanceScenario constant(const Vec& wk);
  static DisturbanceScenario random_in_ellipsoid(const Mat& P, std::uint64_t seed);
  static DisturbanceScenario boundary_ellipsoid(const Mat& P, std::uint64_t seed);
  static DisturbanceScenario sequence(ScenarioKind kind, const Vec& w);
};

/// Disturbance sequence number `index` of a scenario (random kinds draw a
/// fresh, reproducible sample per index).
[[nodiscard]] Vec generate(const DisturbanceScenario& sc, int r, int T, std::uint64_t index = 0);

/// Independent rollouts, OpenMP-parallel over the disturbances.
[[nodiscard]] std::vector<Trajectory> rollout_batch(const Plant& plant, const CausalController& ctrl, const Vec& x0,
                                                    const std::vector<Vec>& ws);
/// Serial reference of rollout_batch.
[[nodiscard]] std::vector<Trajectory> rollout_batch_serial(const Plant& plant, const CausalController& ctrl,
                                                           const Vec& x0, const std::vector<Vec>& ws);

/// CSV with columns step, x0.., u0.., w0.., stage_cost, cum_cost.  The last
/// row has empty w cells.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace regret
