#include "regret/sim.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>

namespace regret {

Plant Plant::build(const LtvSystem& sys, const CostWeights& costs) {
  Plant p;
  p.sys = sys;
  p.costs = costs;
  p.oracle = build_oracle(build_stacked(sys, costs));
  return p;
}

Trajectory rollout(const Plant& plant, const CausalController& ctrl, const Vec& x0, const Vec& w) {
  const auto& s = plant.sys;
  const int n = s.n, m = s.m, r = s.r, T = s.T;
  if (x0.size() != n || w.size() != r * T) throw std::invalid_argument("rollout: x0 or w has wrong length");
  if (ctrl.n != n || ctrl.m != m || ctrl.r != r || ctrl.T != T)
    throw std::invalid_argument("rollout: controller built for another system");
  Trajectory tr;
  tr.x = Mat::Zero(T + 1, n);
  tr.u = Mat::Zero(T + 1, m);
  tr.w = Mat::Zero(T, r);
  tr.stage_costs = Vec::Zero(T + 1);
  ControllerExecutor exec = ctrl.start();
  Vec x = x0;
  for (int k = 0; k <= T; ++k) {
    const Vec u = exec.input(k, x);
    tr.x.row(k) = x.transpose();
    tr.u.row(k) = u.transpose();
    tr.stage_costs(k) = x.dot(plant.costs.Q[k] * x) + u.dot(plant.costs.R[k] * u);
    if (k == T) break;
    const auto wk = w.segment(k * r, r);
    tr.w.row(k) = wk.transpose();
    x = s.A[k] * x + s.B[k] * u + s.E[k] * wk;
    if (!x.allFinite()) throw RolloutError(k + 1, "rollout: state is not finite at step " + std::to_string(k + 1));
  }
  tr.total_cost = tr.stage_costs.sum();
  tr.benchmark = plant.oracle.cost(make_delta(x0, w));
  tr.regret = tr.total_cost - tr.benchmark;
  return tr;
}

Vec cumulative_cost_series(const Trajectory& traj) {
  Vec c(traj.stage_costs.size());
  double acc = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = (acc += traj.stage_costs(k));
  return c;
}

Vec constraint_violation_series(const Trajectory& traj, const ConstraintSet& cs) {
  const Eigen::Index steps = traj.x.rows();
  Vec v = Vec::Constant(steps, -INFINITY);
  for (Eigen::Index k = 0; k < steps; ++k) {
    if (cs.Hx.rows() > 0) v(k) = std::max(v(k), (cs.Hx * traj.x.row(k).transpose()).maxCoeff() - 1.0);
    if (cs.Hu.rows() > 0) v(k) = std::max(v(k), (cs.Hu * traj.u.row(k).transpose()).maxCoeff() - 1.0);
  }
  return v;
}

double check_constraints(const Trajectory& traj, const ConstraintSet& cs) {
  return constraint_violation_series(traj, cs).maxCoeff();
}

DisturbanceScenario DisturbanceScenario::constant(const Vec& wk) {
  DisturbanceScenario s;
  s.kind = ScenarioKind::Constant;
  s.value = wk;
  return s;
}

DisturbanceScenario DisturbanceScenario::random_in_ellipsoid(const Mat& P, std::uint64_t seed) {
  DisturbanceScenario s;
  s.kind = ScenarioKind::RandomInEllipsoid;
  s.P = P;
  s.seed = seed;
  return s;
}

DisturbanceScenario DisturbanceScenario::boundary_ellipsoid(const Mat& P, std::uint64_t seed) {
  DisturbanceScenario s = random_in_ellipsoid(P, seed);
  s.kind = ScenarioKind::BoundaryEllipsoid;
  return s;
}

DisturbanceScenario DisturbanceScenario::sequence(ScenarioKind kind, const Vec& w) {
  DisturbanceScenario s;
  s.kind = kind;
  s.value = w;
  return s;
}

Vec generate(const DisturbanceScenario& sc, int r, int T, std::uint64_t index) {
  Vec w(r * T);
  switch (sc.kind) {
    case ScenarioKind::Constant:
      if (sc.value.size() != r) throw std::invalid_argument("scenario: constant disturbance must have r entries");
      for (int k = 0; k < T; ++k) w.segment(k * r, r) = sc.value;
      return w;
    case ScenarioKind::WorstCaseEnergy:
    case ScenarioKind::Custom:
      if (sc.value.size() != r * T) throw std::invalid_argument("scenario: sequence must have r*T entries");
      return sc.value;
    case ScenarioKind::RandomInEllipsoid:
    case ScenarioKind::BoundaryEllipsoid: {
      if (sc.P.rows() != r || sc.P.cols() != r) throw std::invalid_argument("scenario: P must be r x r");
      Eigen::SelfAdjointEigenSolver<Mat> es(sc.P);
      if (es.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("scenario: P is not positive definite");
      const Mat Pis = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                      es.eigenvectors().transpose();
      std::seed_seq seq{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32),
                        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal;
      std::uniform_real_distribution<double> unif;
      for (int k = 0; k < T; ++k) {
        Vec g(r);
        do {
          for (int i = 0; i < r; ++i) g(i) = normal(rng);
        } while (g.norm() == 0.0);
        g.normalize();
        if (sc.kind == ScenarioKind::RandomInEllipsoid) g *= std::pow(unif(rng), 1.0 / r);
        w.segment(k * r, r) = Pis * g;
      }
      return w;
    }
  }
  throw std::invalid_argument("scenario: unknown kind");
}

std::vector<Trajectory> rollout_batch(const Plant& plant, const CausalController& ctrl, const Vec& x0,
                                      const std::vector<Vec>& ws) {
  std::vector<Trajectory> out(ws.size());
  const long count = static_cast<long>(ws.size());
  std::string error;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) {
    try {
      out[i] = rollout(plant, ctrl, x0, ws[i]);
    } catch (const std::exception& e) {
#pragma omp critical
      if (error.empty()) error = e.what();
    }
  }
  if (!error.empty()) throw std::runtime_error(error);
  return out;
}

std::vector<Trajectory> rollout_batch_serial(const Plant& plant, const CausalController& ctrl, const Vec& x0,
                                             const std::vector<Vec>& ws) {
  std::vector<Trajectory> out;
  out.reserve(ws.size());
  for (const auto& w : ws) out.push_back(rollout(plant, ctrl, x0, w));
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index n = traj.x.cols(), m = traj.u.cols(), r = traj.w.cols(), steps = traj.x.rows();
  out << "step";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
  for (Eigen::Index i = 0; i < r; ++i) out << ",w" << i;
  out << ",stage_cost,cum_cost\n";
  const Vec cum = cumulative_cost_series(traj);
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < steps; ++k) {
    out << k;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << traj.x(k, i);
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << traj.u(k, i);
    for (Eigen::Index i = 0; i < r; ++i) {
      out << ',';
      if (k < traj.w.rows()) out << traj.w(k, i);
    }
    out << ',' << traj.stage_costs(k) << ',' << cum(k) << '\n';
  }
}

}  // namespace regret
