#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

// Solver-agnostic description of the conic programs built by the synthesis
// code, and the interior-point backend that solves them.
//
// A program has decision vector x in R^m and reads
//
//     minimise   c'x
//     subject to sum_j a_ij x_j = b_i                  (equalities)
//                F0 + sum_j x_j F_j  is PSD            (one map per PSD block)
//                (s_0, s_1..s_d) = f + A x  in the second-order cone
//                x_j >= 0                              (nonneg_vars)
//
// A PSD coefficient matrix F_j is stored as a sum of symmetric outer products
// of "atoms" (sparse vectors of the block dimension):
//
//     F_j = sum_t coef_t * (a_p a_q' + a_q a_p') / 2.
//
// Block structured LMIs (Schur complements of system responses) have
// coefficient matrices of rank two, so this keeps the normal-matrix assembly
// at O(1) per entry pair instead of O(nnz^2).
namespace regret::conic {

struct SparseVector {
  std::vector<int> index;
  std::vector<double> value;

  void push(int i, double v) {
    index.push_back(i);
    value.push_back(v);
  }
  [[nodiscard]] std::size_t size() const { return index.size(); }
};

struct PsdTerm {
  int var = 0;
  int atom_p = 0;
  int atom_q = 0;
  double coef = 0.0;
};

struct PsdBlock {
  int size = 0;
  Eigen::MatrixXd constant;          // symmetric, size x size
  std::vector<SparseVector> atoms;   // each atom lives in R^size
  std::vector<PsdTerm> terms;

  int add_atom(SparseVector atom) {
    atoms.push_back(std::move(atom));
    return static_cast<int>(atoms.size()) - 1;
  }
  int add_unit_atom(int i) {
    SparseVector a;
    a.push(i, 1.0);
    return add_atom(std::move(a));
  }
  /// Adds coef * (a_p a_q' + a_q a_p') / 2 to the coefficient of `var`.
  void add_term(int var, int p, int q, double coef) { terms.push_back({var, p, q, coef}); }

  /// Dense coefficient matrix of one variable (testing and diagnostics).
  [[nodiscard]] Eigen::MatrixXd coefficient(int var) const;
  /// constant + sum_j x_j F_j
  [[nodiscard]] Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

/// One component of an affine map: constant + sum coeffs.value[k] * x[coeffs.index[k]].
struct AffineRow {
  SparseVector coeffs;
  double constant = 0.0;

  [[nodiscard]] double evaluate(const Eigen::VectorXd& x) const;
};

/// rows[0] >= ||rows[1..]||.  A single row is a nonnegativity constraint.
struct SocConstraint {
  std::vector<AffineRow> rows;
};

struct EqualityTriplet {
  int row = 0;
  int var = 0;
  double coef = 0.0;
};

struct ConicProgram {
  int num_vars = 0;
  Eigen::VectorXd objective;
  int num_equalities = 0;
  std::vector<EqualityTriplet> equalities;
  Eigen::VectorXd equality_rhs;
  std::vector<PsdBlock> psd_blocks;
  std::vector<SocConstraint> soc_constraints;
  std::vector<int> nonneg_vars;

  /// Appends a variable with zero objective coefficient and returns its index.
  int add_variable(double cost = 0.0);
  /// Appends sum coeffs x = rhs, returns the row index.
  int add_equality(const SparseVector& coeffs, double rhs);

  /// Structural validation: index ranges, matrix shapes, symmetry of constants.
  /// Throws std::invalid_argument naming the offending item.
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalTrouble };

[[nodiscard]] std::string to_string(SolveStatus status);

struct Violations {
  double max_eq_violation = 0.0;
  double max_psd_violation = 0.0;   // max over blocks of max(0, -lambda_min)
  double max_soc_violation = 0.0;   // max over cones of max(0, ||s_1..|| - s_0)
  double max_nonneg_violation = 0.0;
  std::vector<double> psd_min_eigenvalues;
  std::vector<double> soc_slacks;   // s_0 - ||s_1..|| per cone
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalTrouble;
  Eigen::VectorXd primal;
  double objective_value = 0.0;
  double dual_objective = 0.0;
  double max_psd_violation = 0.0;
  double max_eq_violation = 0.0;
  double solve_seconds = 0.0;
  int iterations = 0;
  /// Optimal status reached at the looser fallback tolerance after progress stalled.
  bool reduced_accuracy = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  Violations violations;
};

struct SolverOptions {
  double tolerance = 1e-8;   // relative feasibility and gap tolerance
  int max_iterations = 120;
  int refinement_steps = 1;
  double time_limit_seconds = 0.0;  // <= 0: unlimited
  bool verbose = false;
  /// Largest relative dual residual accepted for a stalled solve whose
  /// primal residual and gap already meet the fallback tolerance.
  double dual_residual_floor = 1e-3;
  /// Use the OpenMP normal-matrix kernel; false selects the serial reference.
  bool parallel_assembly = true;
};

/// Recomputes every constraint residual from scratch at `primal`.
[[nodiscard]] Violations check_solution(const ConicProgram& program, const Eigen::VectorXd& primal);

/// Homogeneous self-dual primal-dual interior-point method with
/// Nesterov-Todd scaling and Mehrotra correction.
[[nodiscard]] SolveReport solve(const ConicProgram& program, const SolverOptions& options = {});

/// Text dump of a program.  Doubles are written with 17 significant digits so
/// that read_program(write_program(p)) reproduces every coefficient exactly.
void write_program(std::ostream& out, const ConicProgram& program);
[[nodiscard]] ConicProgram read_program(std::istream& in);

}  // namespace regret::conic
