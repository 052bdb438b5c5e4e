#pragma once

// Internal representation used by the interior-point iterations.  Not part of
// the installed interface.

#include <Eigen/Dense>
#include <vector>

#include "regret/conic.hpp"

namespace regret::conic::detail {

struct TermEntry {
  int p = 0;
  int q = 0;
  double coef = 0.0;
};

struct PsdData {
  int size = 0;
  int num_atoms = 0;
  Eigen::MatrixXd atoms;     // size x num_atoms, column k is atom k
  Eigen::MatrixXd constant;
  std::vector<int> vars;     // variables with at least one term, ascending
  std::vector<int> offsets;  // entries of vars[k] are entries[offsets[k] .. offsets[k+1])
  std::vector<TermEntry> entries;
};

// Nonnegative ray (dim 1) or second-order cone, as an affine map of x.
struct SmallCone {
  int dim = 1;
  bool soc = false;
  int offset = 0;            // first slot in the packed small-cone vector
  std::vector<int> vars;
  Eigen::MatrixXd coeffs;    // dim x vars.size()
  Eigen::VectorXd constant;  // dim
};

struct Structure {
  int m = 0;
  int p = 0;
  Eigen::VectorXd c;
  Eigen::VectorXd b;
  std::vector<EqualityTriplet> eq;
  std::vector<PsdData> psd;
  std::vector<SmallCone> small;
  int small_dim = 0;
  int degree = 0;

  // KKT partition: `sparse` variables never enter a PSD block and share no
  // cone with another sparse variable, so their normal-matrix block is
  // diagonal and is eliminated before the dense Cholesky factorisation.
  std::vector<int> dense_index;   // var -> dense slot, or -1
  std::vector<int> sparse_index;  // var -> sparse slot, or -1
  std::vector<int> dense_vars;
  std::vector<int> sparse_vars;
};

[[nodiscard]] Structure build_structure(const ConicProgram& program);

// Element of the cone product: one symmetric matrix per PSD block followed by
// the packed small cones.
struct ConeVec {
  std::vector<Eigen::MatrixXd> psd;
  Eigen::VectorXd small;
};

[[nodiscard]] ConeVec zeros_like(const Structure& st);
[[nodiscard]] ConeVec identity_element(const Structure& st);
[[nodiscard]] double dot(const ConeVec& a, const ConeVec& b);
[[nodiscard]] double norm(const ConeVec& a);
void axpy(double alpha, const ConeVec& x, ConeVec& y);  // y += alpha x
void scale(ConeVec& x, double alpha);

/// h: the constant part of every cone map.
[[nodiscard]] ConeVec constant_part(const Structure& st);
/// L(x) = sum_j x_j F_j (so that s(x) = h + L(x); the solver's G is -L).
[[nodiscard]] ConeVec linear_map(const Structure& st, const Eigen::VectorXd& x);
/// Adjoint of L.
[[nodiscard]] Eigen::VectorXd adjoint_map(const Structure& st, const ConeVec& z);
/// A x and A' y for the equality rows.
[[nodiscard]] Eigen::VectorXd eq_apply(const Structure& st, const Eigen::VectorXd& x);
[[nodiscard]] Eigen::VectorXd eq_adjoint(const Structure& st, const Eigen::VectorXd& y);

/// Smallest "eigenvalue" of each cone, minimised over the product:
/// lambda_min for PSD, s0 - ||s1|| for SOC, s for rays.
[[nodiscard]] double min_cone_value(const Structure& st, const ConeVec& v);

// Nesterov-Todd scaling.  For PSD blocks R satisfies R' Z R = diag(lambda) =
// R^{-1} S R^{-T}; for second-order cones W = beta (2 v v' - J).
struct PsdScaling {
  Eigen::MatrixXd R;
  Eigen::MatrixXd Rinv;
  Eigen::VectorXd lambda;
};

struct Scaling {
  bool identity = false;
  std::vector<PsdScaling> psd;
  std::vector<double> beta;   // per small cone
  Eigen::VectorXd wbar;       // packed like ConeVec::small; v for SOCs, sqrt(s/z) for rays
  ConeVec lambda;             // PSD parts are diagonal matrices
};

[[nodiscard]] Scaling identity_scaling(const Structure& st);
/// Returns false if s or z is not strictly inside the cone.
[[nodiscard]] bool compute_scaling(const Structure& st, const ConeVec& s, const ConeVec& z, Scaling& out);

[[nodiscard]] ConeVec apply_W(const Structure& st, const Scaling& sc, const ConeVec& v);
[[nodiscard]] ConeVec apply_Wt(const Structure& st, const Scaling& sc, const ConeVec& v);
[[nodiscard]] ConeVec apply_Winv(const Structure& st, const Scaling& sc, const ConeVec& v);
[[nodiscard]] ConeVec apply_Wit(const Structure& st, const Scaling& sc, const ConeVec& v);
/// (W'W)^{-1} v
[[nodiscard]] ConeVec apply_WtW_inv(const Structure& st, const Scaling& sc, const ConeVec& v);
/// W^{-1} of small cone k (symmetric) as a dense dim x dim matrix.
[[nodiscard]] Eigen::MatrixXd small_cone_winv(const Structure& st, const Scaling& sc, int k);
/// (W'W)^{-1} of small cone k as a dense dim x dim matrix.
[[nodiscard]] Eigen::MatrixXd small_cone_weight(const Structure& st, const Scaling& sc, int k);

/// Jordan product x o y.
[[nodiscard]] ConeVec jordan(const Structure& st, const ConeVec& x, const ConeVec& y);
/// Solves lambda o u = d for u, with lambda the scaled point.
[[nodiscard]] ConeVec lambda_divide(const Structure& st, const Scaling& sc, const ConeVec& d);
/// Largest alpha with lambda + alpha d in the cone (infinity if unbounded).
[[nodiscard]] double max_step(const Structure& st, const Scaling& sc, const ConeVec& d);

// ---------------------------------------------------------------------------
// Normal equations  [H A'; A 0] with H = G' (W'W)^{-1} G.

/// Adds the PSD-block contribution tr(F_i V F_j V) to the upper triangle of
/// `H` (indexed by dense slot).  `Vd` = D' V D in atom coordinates.
void accumulate_psd_normal(const PsdData& blk, const Eigen::MatrixXd& Vd, const std::vector<int>& dense_index,
                           Eigen::MatrixXd& H);
/// Serial reference of the same kernel.
void accumulate_psd_normal_serial(const PsdData& blk, const Eigen::MatrixXd& Vd,
                                  const std::vector<int>& dense_index, Eigen::MatrixXd& H);
/// D' V D for V = Rinv' Rinv (or V = I when Rinv is empty).
[[nodiscard]] Eigen::MatrixXd atom_gram(const PsdData& blk, const Eigen::MatrixXd* Rinv);

class KktSystem {
 public:
  KktSystem(const Structure& st, bool parallel);

  /// Assembles and factors the reduced normal matrix for the given scaling.
  /// Returns false if factorisation fails even with regularisation.
  bool factor(const Scaling& sc);

  /// Solves [H A'; A 0] [dx; dy] = [rx; ry].
  void solve(const Eigen::VectorXd& rx, const Eigen::VectorXd& ry, Eigen::VectorXd& dx, Eigen::VectorXd& dy) const;

  [[nodiscard]] double regularisation() const { return reg_; }

 private:
  const Structure& st_;
  bool parallel_;
  Eigen::MatrixXd chol_;          // upper Cholesky factor of the reduced dense block
  Eigen::VectorXd sparse_diag_;   // D_s
  std::vector<std::vector<std::pair<int, double>>> sparse_couple_;  // h_s over dense slots
  Eigen::MatrixXd eq_reduced_;    // A~ (p x m_d)
  Eigen::MatrixXd eq_solved_;     // H~^{-1} A~'
  Eigen::MatrixXd eq_sparse_;     // sum_s a_s a_s' / d_s
  bool eq_folded_ = false;
  Eigen::VectorXd eq_dinv_;
  Eigen::LDLT<Eigen::MatrixXd> eq_schur_;
  double reg_ = 0.0;

  std::vector<std::vector<std::pair<int, double>>> sparse_eq_;    // A_s columns
  std::vector<int> sparse_cone_;  // the only small cone holding a sparse variable, or -1
  Eigen::MatrixXd eq_dense_;      // A_d

  void assemble(const Scaling& sc, double reg);
  void reduce_equalities();
  void dense_solve(Eigen::VectorXd& v) const;
  void dense_solve(Eigen::MatrixXd& v) const;
};

}  // namespace regret::conic::detail
