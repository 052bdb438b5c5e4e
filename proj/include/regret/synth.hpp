#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regret/conic.hpp"
#include "regret/model.hpp"
#include "regret/noncausal.hpp"
#include "regret/slp.hpp"

namespace regret {

enum class SynthesisMode { EnergyRegret, AdversarialX0, PointwiseRegret, H2, Hinf };

[[nodiscard]] std::string to_string(SynthesisMode mode);

/// Stacked operators and the non-causal oracle, shared by every program.
struct SynthesisProblem {
  StackedDynamics stk;
  NonCausalOracle oracle;

  static SynthesisProblem build(const LtvSystem& sys, const CostWeights& costs);
};

struct SynthesisSpec {
  LtvSystem system;
  CostWeights costs;
  DisturbanceModel disturbance;
  std::optional<ConstraintSet> constraints;
  SynthesisMode mode = SynthesisMode::EnergyRegret;
  Vec x0;
  conic::SolverOptions solver;
};

struct SynthesisResult {
  SynthesisMode mode = SynthesisMode::EnergyRegret;
  Mat Phi;
  double gamma_star = 0.0;
  std::vector<double> multipliers;  // lambda (energy) or lambda_0..lambda_T (pointwise)
  std::optional<CausalController> controller;
  conic::SolveReport report;
  std::string message;  // diagnostics, e.g. the offending constraint row

  [[nodiscard]] bool ok() const { return report.status == conic::SolveStatus::Optimal; }
};

/// Decision variables of a synthesis program.  Only the causal entries of
/// Phi_u are free; Phi_x = G + F Phi_u eliminates the achievability
/// constraint.  With a known x0 the initial-state column enters only through
/// psi = Phi_u^0 x0.
struct ResponseLayout {
  int n = 0, m = 0, r = 0, T = 0;
  bool full_x0 = false;  // Phi_u^0 free (m(T+1) x n) instead of psi
  int psi_begin = -1;    // m(T+1) variables, or -1
  int x0_begin = -1;     // Phi_u^0 column-major, or -1
  std::vector<int> w_var;  // (l, c) -> variable or -1, row-major over (Nu, rT)

  [[nodiscard]] int w_index(int l, int c) const { return w_var[static_cast<std::size_t>(l) * r * T + c]; }
};

struct BuiltProgram {
  conic::ConicProgram program;
  ResponseLayout layout;
  int gamma_var = -1;
  std::vector<int> multiplier_vars;
  Vec x0;
};

/// min gamma  s.t.  lambda >= 0 and the energy-ball regret LMI.
[[nodiscard]] BuiltProgram build_energy_program(const SynthesisProblem& pb, const Vec& x0, double omega);
/// min sum lambda_i  s.t.  lambda_i >= 0 and the pointwise-ellipsoid LMI.
[[nodiscard]] BuiltProgram build_pointwise_program(const SynthesisProblem& pb, const Vec& x0, const Mat& P);
/// min gamma  s.t.  Phi' C Phi - O <= gamma I (subtract_oracle) or Phi' C Phi <= gamma I.
[[nodiscard]] BuiltProgram build_norm_program(const SynthesisProblem& pb, bool subtract_oracle);

/// Robust constraint rows: Hz Phi0 x0 + sum_j ||Hz Phiw_j P^{-1/2}|| <= 1 per
/// row of Hz.  Returns the index of a row that already fails at w = 0 and
/// time 0, or -1.
int add_safety_rows(BuiltProgram& bp, const SynthesisProblem& pb, const Mat& P, const ConstraintSet& cs);

/// Worst case of each row of Hz [x; u] <= 1 over the pointwise ellipsoid,
/// evaluated directly from Phi.
[[nodiscard]] Vec robust_constraint_values(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0, const Mat& P,
                                           const ConstraintSet& cs);

/// Phi from a primal point of a built program.
[[nodiscard]] Mat extract_response(const SynthesisProblem& pb, const BuiltProgram& bp, const Vec& primal);

/// Minimiser of trace(Phi' C Phi) over causal achievable Phi (the LQR
/// response), solved column by column.
[[nodiscard]] Mat h2_response(const StackedDynamics& stk);

[[nodiscard]] SynthesisResult synth_energy_regret(const SynthesisProblem& pb, const Vec& x0, double omega,
                                                  const conic::SolverOptions& opts = {});
[[nodiscard]] SynthesisResult synth_adversarial_x0(const SynthesisProblem& pb, const conic::SolverOptions& opts = {});
[[nodiscard]] SynthesisResult synth_pointwise_regret(const SynthesisProblem& pb, const Vec& x0, const Mat& P,
                                                     const ConstraintSet* constraints = nullptr,
                                                     const conic::SolverOptions& opts = {});

/// Solves a built program and recovers Phi and the controller.
[[nodiscard]] SynthesisResult solve_built(const SynthesisProblem& pb, const BuiltProgram& bp, SynthesisMode mode,
                                          const conic::SolverOptions& opts);

/// Validates the request and dispatches on its mode.
[[nodiscard]] SynthesisResult synthesize(const SynthesisSpec& spec);

/// Dense regret LMI at a given point, assembled directly from its block
/// definition.  Used to re-check certificates.
[[nodiscard]] Mat energy_lmi(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0, double omega, double gamma,
                             double lambda);
[[nodiscard]] Mat pointwise_lmi(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0, const Mat& P,
                                const std::vector<double>& lambdas);

}  // namespace regret
