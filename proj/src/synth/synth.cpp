#include "regret/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "regret/analysis.hpp"

namespace regret {

using conic::PsdBlock;
using conic::SparseVector;

std::string to_string(SynthesisMode mode) {
  switch (mode) {
    case SynthesisMode::EnergyRegret: return "energy_regret";
    case SynthesisMode::AdversarialX0: return "adversarial_x0";
    case SynthesisMode::PointwiseRegret: return "pointwise_regret";
    case SynthesisMode::H2: return "h2";
    case SynthesisMode::Hinf: return "hinf";
  }
  return "unknown";
}

SynthesisProblem SynthesisProblem::build(const LtvSystem& sys, const CostWeights& costs) {
  SynthesisProblem pb;
  pb.stk = build_stacked(sys, costs);
  pb.oracle = build_oracle(pb.stk);
  return pb;
}

namespace {

// Adds the Phi_u variables.  `x0_mode`: 0 none, 1 psi, 2 full Phi_u^0.
ResponseLayout add_response_vars(const StackedDynamics& stk, conic::ConicProgram& p, int x0_mode) {
  ResponseLayout L;
  L.n = stk.n;
  L.m = stk.m;
  L.r = stk.r;
  L.T = stk.T;
  const int Nu = stk.Nu(), n = stk.n, m = stk.m, r = stk.r, T = stk.T;
  if (x0_mode == 1) {
    L.psi_begin = p.num_vars;
    for (int l = 0; l < Nu; ++l) p.add_variable();
  } else if (x0_mode == 2) {
    L.full_x0 = true;
    L.x0_begin = p.num_vars;
    for (int k = 0; k < Nu * n; ++k) p.add_variable();
  }
  L.w_var.assign(static_cast<std::size_t>(Nu) * r * T, -1);
  // Column-major over (l, c) so that each disturbance column is contiguous.
  for (int c = 0; c < r * T; ++c) {
    const int j = c / r;
    for (int l = (j + 1) * m; l < Nu; ++l) L.w_var[static_cast<std::size_t>(l) * r * T + c] = p.add_variable();
  }
  return L;
}

// Atom [F(:, l); e_l] placed at `off` in the block.
void add_input_atoms(const StackedDynamics& stk, PsdBlock& b, int off, std::vector<int>& atom_of) {
  const int Nx = stk.Nx(), Nu = stk.Nu();
  atom_of.resize(Nu);
  for (int l = 0; l < Nu; ++l) {
    SparseVector a;
    for (int i = 0; i < Nx; ++i)
      if (stk.F(i, l) != 0.0) a.push(off + i, stk.F(i, l));
    a.push(off + Nx + l, 1.0);
    atom_of[l] = b.add_atom(std::move(a));
  }
}

// Terms for the Phi_u^w entries: column c of the w-block sits at unit atom
// `col_atom0 + c`.
void add_w_terms(const ResponseLayout& L, PsdBlock& b, int col_atom0, const std::vector<int>& atom_of) {
  const int Nu = L.m * (L.T + 1);
  for (int c = 0; c < L.r * L.T; ++c)
    for (int l = 0; l < Nu; ++l) {
      const int v = L.w_index(l, c);
      if (v >= 0) b.add_term(v, col_atom0 + c, atom_of[l], 2.0);
    }
}

// Shared structure of the two fixed-x0 regret LMIs:
//   [ a       x0'O2'    (Phi0 x0)' ]
//   [ O2 x0   O3 + .    Phiw'      ]
//   [ Phi0 x0 Phiw      C^{-1}     ]
PsdBlock regret_block_skeleton(const SynthesisProblem& pb, const Vec& x0, const ResponseLayout& L) {
  const auto& stk = pb.stk;
  const int rt = stk.r * stk.T, Nz = stk.Nz(), Nx = stk.Nx();
  const int off = 1 + rt;
  PsdBlock b;
  b.size = off + Nz;
  b.constant = Mat::Zero(b.size, b.size);
  for (int i = 0; i < off; ++i) b.add_unit_atom(i);
  std::vector<int> atom_of;
  add_input_atoms(stk, b, off, atom_of);

  b.constant(0, 0) = x0.dot(pb.oracle.O1 * x0);
  const Vec o2x0 = pb.oracle.O2 * x0;
  const Vec g0x0 = stk.G.leftCols(stk.n) * x0;
  for (int c = 0; c < rt; ++c) b.constant(0, 1 + c) = b.constant(1 + c, 0) = o2x0(c);
  b.constant.block(1, 1, rt, rt) = pb.oracle.O3;
  for (int i = 0; i < Nx; ++i) b.constant(0, off + i) = b.constant(off + i, 0) = g0x0(i);
  b.constant.block(off, 1, Nx, rt) = stk.G.rightCols(rt);
  b.constant.block(1, off, rt, Nx) = stk.G.rightCols(rt).transpose();
  b.constant.block(off, off, Nz, Nz) = stk.Cinv;

  if (L.psi_begin >= 0)
    for (int l = 0; l < stk.Nu(); ++l) b.add_term(L.psi_begin + l, 0, atom_of[l], 2.0);
  add_w_terms(L, b, 1, atom_of);
  return b;
}

bool nonzero(const Vec& x) { return x.size() > 0 && x.squaredNorm() > 0.0; }

Mat inverse_sqrt(const Mat& P) {
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  if (es.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("P is not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

BuiltProgram build_energy_program(const SynthesisProblem& pb, const Vec& x0, double omega) {
  const auto& stk = pb.stk;
  if (x0.size() != stk.n) throw std::invalid_argument("energy program: x0 has wrong length");
  if (!(omega >= 0.0)) throw std::invalid_argument("energy program: omega must be nonnegative");
  BuiltProgram bp;
  bp.x0 = x0;
  auto& p = bp.program;
  bp.gamma_var = p.add_variable(1.0);
  const int lam = p.add_variable(0.0);
  bp.multiplier_vars = {lam};
  p.nonneg_vars.push_back(lam);
  bp.layout = add_response_vars(stk, p, nonzero(x0) ? 1 : 0);
  PsdBlock b = regret_block_skeleton(pb, x0, bp.layout);
  b.add_term(bp.gamma_var, 0, 0, 1.0);
  b.add_term(lam, 0, 0, -omega);
  for (int c = 0; c < stk.r * stk.T; ++c) b.add_term(lam, 1 + c, 1 + c, 1.0);
  p.psd_blocks.push_back(std::move(b));
  return bp;
}

BuiltProgram build_pointwise_program(const SynthesisProblem& pb, const Vec& x0, const Mat& P) {
  const auto& stk = pb.stk;
  const int r = stk.r, T = stk.T;
  if (x0.size() != stk.n) throw std::invalid_argument("pointwise program: x0 has wrong length");
  if (P.rows() != r || P.cols() != r) throw std::invalid_argument("pointwise program: P must be r x r");
  BuiltProgram bp;
  bp.x0 = x0;
  auto& p = bp.program;
  for (int i = 0; i <= T; ++i) {
    const int v = p.add_variable(1.0);
    bp.multiplier_vars.push_back(v);
    p.nonneg_vars.push_back(v);
  }
  bp.layout = add_response_vars(stk, p, nonzero(x0) ? 1 : 0);
  PsdBlock b = regret_block_skeleton(pb, x0, bp.layout);
  for (int i = 0; i < T; ++i)
    for (int a = 0; a < r; ++a)
      for (int c = a; c < r; ++c) {
        const double coef = (a == c) ? P(a, a) : P(a, c) + P(c, a);
        if (coef != 0.0) b.add_term(bp.multiplier_vars[i], 1 + i * r + a, 1 + i * r + c, coef);
      }
  b.add_term(bp.multiplier_vars[T], 0, 0, 1.0);
  p.psd_blocks.push_back(std::move(b));
  return bp;
}

BuiltProgram build_norm_program(const SynthesisProblem& pb, bool subtract_oracle) {
  const auto& stk = pb.stk;
  const int Nd = stk.Nd(), Nx = stk.Nx(), Nz = stk.Nz(), n = stk.n;
  BuiltProgram bp;
  auto& p = bp.program;
  bp.gamma_var = p.add_variable(1.0);
  bp.layout = add_response_vars(stk, p, 2);
  PsdBlock b;
  b.size = Nd + Nz;
  b.constant = Mat::Zero(b.size, b.size);
  for (int i = 0; i < Nd; ++i) b.add_unit_atom(i);
  std::vector<int> atom_of;
  add_input_atoms(stk, b, Nd, atom_of);
  if (subtract_oracle) b.constant.topLeftCorner(Nd, Nd) = pb.oracle.O;
  b.constant.block(Nd, 0, Nx, Nd) = stk.G;
  b.constant.block(0, Nd, Nd, Nx) = stk.G.transpose();
  b.constant.block(Nd, Nd, Nz, Nz) = stk.Cinv;
  for (int i = 0; i < Nd; ++i) b.add_term(bp.gamma_var, i, i, 1.0);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < stk.Nu(); ++l) b.add_term(bp.layout.x0_begin + i * stk.Nu() + l, i, atom_of[l], 2.0);
  add_w_terms(bp.layout, b, n, atom_of);
  p.psd_blocks.push_back(std::move(b));
  return bp;
}

int add_safety_rows(BuiltProgram& bp, const SynthesisProblem& pb, const Mat& P, const ConstraintSet& cs) {
  const auto& stk = pb.stk;
  const auto& L = bp.layout;
  const int n = stk.n, m = stk.m, r = stk.r, T = stk.T, Nu = stk.Nu();
  if (L.full_x0) throw std::invalid_argument("safety rows need a fixed initial state");
  cs.validate(n, m);
  const Mat S = inverse_sqrt(P);
  const Vec x0 = bp.x0.size() == n ? bp.x0 : Vec::Zero(n);
  const Vec g0x0 = stk.G.leftCols(n) * x0;
  auto& prog = bp.program;
  const int nx = static_cast<int>(cs.Hx.rows()), nu = static_cast<int>(cs.Hu.rows());

  auto finish_row = [&](const SparseVector& nominal, double constant, std::vector<int> tvars) {
    // e + nominal + sum t = 1 - constant
    const int e = prog.add_variable();
    prog.nonneg_vars.push_back(e);
    SparseVector row = nominal;
    row.push(e, 1.0);
    for (int t : tvars) row.push(t, 1.0);
    prog.add_equality(row, 1.0 - constant);
  };

  // Adds the cone t >= ||const + sum coeffs||, or folds a constant norm.
  auto add_cone = [&](const Eigen::RowVectorXd& cst, const std::vector<std::pair<int, Eigen::RowVectorXd>>& lin,
                      double& folded, std::vector<int>& tvars) {
    if (lin.empty()) {
      folded += cst.norm();
      return;
    }
    const int t = prog.add_variable();
    tvars.push_back(t);
    conic::SocConstraint soc;
    conic::AffineRow head;
    head.coeffs.push(t, 1.0);
    soc.rows.push_back(head);
    for (int q = 0; q < r; ++q) {
      conic::AffineRow row;
      row.constant = cst(q);
      for (const auto& [v, coef] : lin)
        if (coef(q) != 0.0) row.coeffs.push(v, coef(q));
      soc.rows.push_back(std::move(row));
    }
    prog.soc_constraints.push_back(std::move(soc));
  };

  int bad_row = -1;
  for (int k = 0; k <= T; ++k)
    for (int i = 0; i < nx; ++i) {
      const int row_index = k * nx + i;
      const Eigen::RowVectorXd h = cs.Hx.row(i);
      const Eigen::RowVectorXd hF = h * stk.F.middleRows(k * n, n);
      double constant = h.dot(g0x0.segment(k * n, n));
      SparseVector nominal;
      if (L.psi_begin >= 0)
        for (int l = 0; l < k * m; ++l)
          if (hF(l) != 0.0) nominal.push(L.psi_begin + l, hF(l));
      std::vector<int> tvars;
      for (int j = 0; j < k; ++j) {
        const Eigen::RowVectorXd cst = h * stk.G.block(k * n, n + j * r, n, r) * S;
        std::vector<std::pair<int, Eigen::RowVectorXd>> lin;
        for (int c = 0; c < r; ++c)
          for (int l = (j + 1) * m; l < k * m; ++l) {
            const int v = L.w_index(l, j * r + c);
            if (v >= 0 && hF(l) != 0.0) lin.emplace_back(v, hF(l) * S.row(c));
          }
        add_cone(cst, lin, constant, tvars);
      }
      if (nominal.size() == 0 && tvars.empty()) {
        if (constant > 1.0 + 1e-12 && bad_row < 0) bad_row = row_index;
        continue;
      }
      finish_row(nominal, constant, tvars);
    }
  for (int k = 0; k <= T; ++k)
    for (int i = 0; i < nu; ++i) {
      const int row_index = nx * (T + 1) + k * nu + i;
      const Eigen::RowVectorXd h = cs.Hu.row(i);
      double constant = 0.0;
      SparseVector nominal;
      if (L.psi_begin >= 0)
        for (int a = 0; a < m; ++a)
          if (h(a) != 0.0) nominal.push(L.psi_begin + k * m + a, h(a));
      std::vector<int> tvars;
      for (int j = 0; j < k; ++j) {
        std::vector<std::pair<int, Eigen::RowVectorXd>> lin;
        for (int c = 0; c < r; ++c)
          for (int a = 0; a < m; ++a) {
            const int v = L.w_index(k * m + a, j * r + c);
            if (v >= 0 && h(a) != 0.0) lin.emplace_back(v, h(a) * S.row(c));
          }
        add_cone(Eigen::RowVectorXd::Zero(r), lin, constant, tvars);
      }
      if (nominal.size() == 0 && tvars.empty()) {
        if (constant > 1.0 + 1e-12 && bad_row < 0) bad_row = row_index;
        continue;
      }
      finish_row(nominal, constant, tvars);
    }
  (void)Nu;
  return bad_row;
}

Vec robust_constraint_values(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0, const Mat& P,
                             const ConstraintSet& cs) {
  const auto& stk = pb.stk;
  const int n = stk.n, r = stk.r, T = stk.T;
  cs.validate(n, stk.m);
  const Mat S = inverse_sqrt(P);
  const Mat HP = cs.stacked(T) * Phi;
  Vec v = HP.leftCols(n) * x0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    for (int j = 0; j < T; ++j) v(i) += (HP.block(i, n + j * r, 1, r) * S).norm();
  return v;
}

Mat h2_response(const StackedDynamics& stk) {
  const int Nu = stk.Nu(), Nd = stk.Nd(), n = stk.n, m = stk.m, r = stk.r;
  const Mat Q = stk.calQ();
  const Mat R = stk.calR();
  const Mat QF = Q * stk.F;
  const Mat H = R + stk.F.transpose() * QF;
  Mat Phi_u = Mat::Zero(Nu, Nd);
  for (int col = 0; col < Nd; ++col) {
    const int s = col < n ? 0 : ((col - n) / r + 1) * m;
    const int len = Nu - s;
    if (len <= 0) continue;
    const Vec rhs = -QF.middleCols(s, len).transpose() * stk.G.col(col);
    Eigen::LLT<Mat> llt(H.block(s, s, len, len));
    Phi_u.col(col).segment(s, len) = llt.solve(rhs);
  }
  return response_from_inputs(stk, Phi_u);
}

Mat extract_response(const SynthesisProblem& pb, const BuiltProgram& bp, const Vec& primal) {
  const auto& stk = pb.stk;
  const auto& L = bp.layout;
  const int Nu = stk.Nu(), n = stk.n, rt = stk.r * stk.T;
  Mat Phi_u = Mat::Zero(Nu, stk.Nd());
  for (int c = 0; c < rt; ++c)
    for (int l = 0; l < Nu; ++l) {
      const int v = L.w_index(l, c);
      if (v >= 0) Phi_u(l, n + c) = primal(v);
    }
  if (L.full_x0) {
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < Nu; ++l) Phi_u(l, i) = primal(L.x0_begin + i * Nu + l);
  } else {
    // Directions of x0 the program cannot see keep the H2 response.
    Mat base = h2_response(stk).bottomRows(Nu).leftCols(n);
    const Vec& x0 = bp.x0;
    if (L.psi_begin >= 0 && nonzero(x0)) {
      const double nn = x0.squaredNorm();
      const Vec psi = primal.segment(L.psi_begin, Nu);
      base = base * (Mat::Identity(n, n) - x0 * x0.transpose() / nn) + psi * x0.transpose() / nn;
    }
    Phi_u.leftCols(n) = base;
  }
  return response_from_inputs(stk, Phi_u);
}

SynthesisResult solve_built(const SynthesisProblem& pb, const BuiltProgram& bp, SynthesisMode mode,
                       const conic::SolverOptions& opts) {
  SynthesisResult res;
  res.mode = mode;
  res.report = conic::solve(bp.program, opts);
  res.Phi = extract_response(pb, bp, res.report.primal);
  for (int v : bp.multiplier_vars) res.multipliers.push_back(res.report.primal(v));
  res.gamma_star = res.report.objective_value;
  if (res.ok()) {
    try {
      res.controller = CausalController::recover(pb.stk, res.Phi);
    } catch (const std::exception& e) {
      res.message = e.what();
    }
  } else {
    res.message = "solver status: " + conic::to_string(res.report.status);
  }
  return res;
}

SynthesisResult synth_energy_regret(const SynthesisProblem& pb, const Vec& x0, double omega,
                                    const conic::SolverOptions& opts) {
  return solve_built(pb, build_energy_program(pb, x0, omega), SynthesisMode::EnergyRegret, opts);
}

SynthesisResult synth_adversarial_x0(const SynthesisProblem& pb, const conic::SolverOptions& opts) {
  return solve_built(pb, build_norm_program(pb, true), SynthesisMode::AdversarialX0, opts);
}

SynthesisResult synth_pointwise_regret(const SynthesisProblem& pb, const Vec& x0, const Mat& P,
                                       const ConstraintSet* constraints, const conic::SolverOptions& opts) {
  BuiltProgram bp = build_pointwise_program(pb, x0, P);
  if (constraints != nullptr) {
    const int bad = add_safety_rows(bp, pb, P, *constraints);
    if (bad >= 0) {
      SynthesisResult res;
      res.mode = SynthesisMode::PointwiseRegret;
      res.report.status = conic::SolveStatus::Infeasible;
      res.report.primal = Vec::Zero(bp.program.num_vars);
      res.Phi = Mat::Zero(pb.stk.Nz(), pb.stk.Nd());
      res.message = "constraint row " + std::to_string(bad) + " is violated by the initial state";
      return res;
    }
  }
  return solve_built(pb, bp, SynthesisMode::PointwiseRegret, opts);
}

SynthesisResult synthesize(const SynthesisSpec& spec) {
  const SynthesisProblem pb = SynthesisProblem::build(spec.system, spec.costs);
  const int T = spec.system.T;
  auto need_x0 = [&] {
    if (spec.x0.size() != spec.system.n) throw std::invalid_argument("x0: must have n entries");
  };
  switch (spec.mode) {
    case SynthesisMode::EnergyRegret:
      need_x0();
      return synth_energy_regret(pb, spec.x0, derived_omega(spec.disturbance, T), spec.solver);
    case SynthesisMode::AdversarialX0:
      return synth_adversarial_x0(pb, spec.solver);
    case SynthesisMode::PointwiseRegret:
      need_x0();
      if (spec.disturbance.kind != DisturbanceKind::PointwiseEllipsoid)
        throw std::invalid_argument("disturbance: pointwise_regret requires an ellipsoid P");
      return synth_pointwise_regret(pb, spec.x0, spec.disturbance.P,
                                    spec.constraints ? &*spec.constraints : nullptr, spec.solver);
    case SynthesisMode::H2:
      return synth_h2(pb.stk);
    case SynthesisMode::Hinf:
      return synth_hinf(pb, spec.solver);
  }
  throw std::invalid_argument("unknown synthesis mode");
}

Mat energy_lmi(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0, double omega, double gamma,
               double lambda) {
  const auto& o = pb.oracle;
  const int n = pb.stk.n, rt = pb.stk.r * pb.stk.T, Nz = pb.stk.Nz();
  const Vec p = Phi.leftCols(n) * x0;
  const Mat Pw = Phi.rightCols(rt);
  Mat M(1 + rt + Nz, 1 + rt + Nz);
  M(0, 0) = x0.dot(o.O1 * x0) - lambda * omega + gamma;
  M.block(0, 1, 1, rt) = (o.O2 * x0).transpose();
  M.block(1, 0, rt, 1) = o.O2 * x0;
  M.block(0, 1 + rt, 1, Nz) = p.transpose();
  M.block(1 + rt, 0, Nz, 1) = p;
  M.block(1, 1, rt, rt) = o.O3 + lambda * Mat::Identity(rt, rt);
  M.block(1, 1 + rt, rt, Nz) = Pw.transpose();
  M.block(1 + rt, 1, Nz, rt) = Pw;
  M.block(1 + rt, 1 + rt, Nz, Nz) = pb.stk.Cinv;
  return M;
}

Mat pointwise_lmi(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0, const Mat& P,
                  const std::vector<double>& lambdas) {
  const int r = pb.stk.r, T = pb.stk.T;
  if (static_cast<int>(lambdas.size()) != T + 1) throw std::invalid_argument("pointwise_lmi: need T+1 multipliers");
  Mat M = energy_lmi(pb, Phi, x0, 0.0, lambdas[T], 0.0);
  for (int i = 0; i < T; ++i) M.block(1 + i * r, 1 + i * r, r, r) += lambdas[i] * P;
  return M;
}

}  // namespace regret
