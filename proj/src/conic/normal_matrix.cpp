#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "conic/detail.hpp"

namespace regret::conic::detail {
namespace {

inline double pair_trace(const TermEntry* a, int na, const TermEntry* b, int nb, const Eigen::MatrixXd& Vd) {
  double s = 0.0;
  for (int u = 0; u < na; ++u) {
    const int p = a[u].p, q = a[u].q;
    double t = 0.0;
    for (int v = 0; v < nb; ++v) {
      const int r = b[v].p, w = b[v].q;
      t += b[v].coef * (Vd(q, r) * Vd(p, w) + Vd(q, w) * Vd(p, r));
    }
    s += a[u].coef * t;
  }
  return 0.5 * s;
}

inline void psd_row(const PsdData& blk, const Eigen::MatrixXd& Vd, const std::vector<int>& dense_index,
                    Eigen::MatrixXd& H, int i) {
  const int di = dense_index[blk.vars[i]];
  const TermEntry* a = blk.entries.data() + blk.offsets[i];
  const int na = blk.offsets[i + 1] - blk.offsets[i];
  double* col = H.col(di).data();
  for (int j = 0; j <= i; ++j) {
    const TermEntry* b = blk.entries.data() + blk.offsets[j];
    const int nb = blk.offsets[j + 1] - blk.offsets[j];
    col[dense_index[blk.vars[j]]] += pair_trace(a, na, b, nb, Vd);
  }
}

}  // namespace

void accumulate_psd_normal(const PsdData& blk, const Eigen::MatrixXd& Vd, const std::vector<int>& dense_index,
                           Eigen::MatrixXd& H) {
  const int nv = static_cast<int>(blk.vars.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < nv; ++i) psd_row(blk, Vd, dense_index, H, i);
}

void accumulate_psd_normal_serial(const PsdData& blk, const Eigen::MatrixXd& Vd,
                                  const std::vector<int>& dense_index, Eigen::MatrixXd& H) {
  const int nv = static_cast<int>(blk.vars.size());
  for (int i = 0; i < nv; ++i) psd_row(blk, Vd, dense_index, H, i);
}

Eigen::MatrixXd atom_gram(const PsdData& blk, const Eigen::MatrixXd* Rinv) {
  if (Rinv == nullptr) return blk.atoms.transpose() * blk.atoms;
  Eigen::MatrixXd rd(blk.size, blk.num_atoms);
  rd.noalias() = (*Rinv) * blk.atoms;
  Eigen::MatrixXd out(blk.num_atoms, blk.num_atoms);
  out.noalias() = rd.transpose() * rd;
  return out;
}

KktSystem::KktSystem(const Structure& st, bool parallel) : st_(st), parallel_(parallel) {
  const int md = static_cast<int>(st.dense_vars.size());
  const int ms = static_cast<int>(st.sparse_vars.size());
  eq_dense_ = Eigen::MatrixXd::Zero(st.p, md);
  sparse_eq_.assign(ms, {});
  for (const auto& e : st.eq) {
    if (st.dense_index[e.var] >= 0)
      eq_dense_(e.row, st.dense_index[e.var]) += e.coef;
    else
      sparse_eq_[st.sparse_index[e.var]].push_back({e.row, e.coef});
  }
  std::vector<int> count(ms, 0);
  sparse_cone_.assign(ms, -1);
  for (std::size_t k = 0; k < st.small.size(); ++k)
    for (int v : st.small[k].vars) {
      const int s = st.sparse_index[v];
      if (s >= 0) {
        ++count[s];
        sparse_cone_[s] = static_cast<int>(k);
      }
    }
  for (int s = 0; s < ms; ++s)
    if (count[s] != 1) sparse_cone_[s] = -1;
}

void KktSystem::assemble(const Scaling& sc, double reg) {
  const int md = static_cast<int>(st_.dense_vars.size());
  const int ms = static_cast<int>(st_.sparse_vars.size());
  chol_.setZero(md, md);
  sparse_diag_ = Eigen::VectorXd::Zero(ms);
  sparse_couple_.assign(ms, {});

  for (std::size_t k = 0; k < st_.psd.size(); ++k) {
    const Eigen::MatrixXd Vd = atom_gram(st_.psd[k], sc.identity ? nullptr : &sc.psd[k].Rinv);
    if (parallel_)
      accumulate_psd_normal(st_.psd[k], Vd, st_.dense_index, chol_);
    else
      accumulate_psd_normal_serial(st_.psd[k], Vd, st_.dense_index, chol_);
  }

  // Small cones contribute B'B with B = W^{-1} L.  When a cone holds the
  // only occurrence of a sparse variable, its column is projected out of B
  // before forming the dense part: the explicit update H - h h'/d cancels
  // badly once the cone approaches its boundary.
  std::vector<char> projected(ms, 0);
  for (std::size_t k = 0; k < st_.small.size(); ++k) {
    const auto& c = st_.small[k];
    Eigen::MatrixXd B = small_cone_winv(st_, sc, static_cast<int>(k)) * c.coeffs;
    const int nv = static_cast<int>(c.vars.size());
    int own = -1;
    for (int a = 0; a < nv; ++a) {
      const int sa = st_.sparse_index[c.vars[a]];
      if (sa >= 0 && sparse_cone_[sa] == static_cast<int>(k)) own = a;
    }
    if (own >= 0) {
      const int sa = st_.sparse_index[c.vars[own]];
      const Eigen::VectorXd t = B.col(own);
      const double tt = t.squaredNorm();
      sparse_diag_(sa) += tt;
      for (int b = 0; b < nv; ++b) {
        const int db = st_.dense_index[c.vars[b]];
        if (db >= 0) sparse_couple_[sa].push_back({db, t.dot(B.col(b))});
      }
      if (tt > 0.0) {
        const Eigen::RowVectorXd tb = (t.transpose() * B) / tt;
        B.noalias() -= t * tb;
      }
      B.col(own).setZero();
      projected[sa] = 1;
    }
    const Eigen::MatrixXd N = B.transpose() * B;
    for (int a = 0; a < nv; ++a) {
      const int da = st_.dense_index[c.vars[a]];
      const int sa = st_.sparse_index[c.vars[a]];
      if (a == own) continue;
      for (int b = 0; b < nv; ++b) {
        const int db = st_.dense_index[c.vars[b]];
        if (sa >= 0) {
          if (db >= 0)
            sparse_couple_[sa].push_back({db, N(a, b)});
          else if (a == b)
            sparse_diag_(sa) += N(a, a);
        } else if (db >= 0 && da <= db) {
          chol_(da, db) += N(a, b);
        }
      }
    }
  }

  double scale = 1.0;
  for (int i = 0; i < md; ++i) scale = std::max(scale, chol_(i, i));
  for (int s = 0; s < ms; ++s) scale = std::max(scale, sparse_diag_(s));
  const double shift = reg * scale;
  for (int s = 0; s < ms; ++s) sparse_diag_(s) += shift;
  for (int s = 0; s < ms; ++s) {
    if (projected[s]) continue;
    const auto& h = sparse_couple_[s];
    const double inv = 1.0 / sparse_diag_(s);
    for (const auto& [i, hi] : h)
      for (const auto& [j, hj] : h)
        if (i <= j) chol_(i, j) -= hi * hj * inv;
  }
  chol_.diagonal().array() += shift;
}

void KktSystem::reduce_equalities() {
  const int ms = static_cast<int>(st_.sparse_vars.size());
  eq_reduced_ = eq_dense_;
  eq_sparse_ = Eigen::MatrixXd::Zero(st_.p, st_.p);
  for (int s = 0; s < ms; ++s) {
    const double inv = 1.0 / sparse_diag_(s);
    for (const auto& [r, a] : sparse_eq_[s]) {
      for (const auto& [d, h] : sparse_couple_[s]) eq_reduced_(r, d) -= a * inv * h;
      for (const auto& [r2, a2] : sparse_eq_[s]) eq_sparse_(r, r2) += a * a2 * inv;
    }
  }
  // Rows whose sparse part is diagonal and positive (each row owns a slack)
  // are folded into the dense block as y = D^{-1}(A~ x - r).
  const Eigen::VectorXd d = eq_sparse_.diagonal();
  eq_folded_ = d.size() > 0 && d.minCoeff() > 0.0 &&
               (eq_sparse_ - Eigen::MatrixXd(d.asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (eq_folded_) eq_dinv_ = d.cwiseInverse();
}

bool KktSystem::factor(const Scaling& sc) {
  const int md = static_cast<int>(st_.dense_vars.size());
  bool ok = false;
  for (double reg : {1e-14, 1e-11, 1e-8, 1e-6}) {
    assemble(sc, reg);
    if (sparse_diag_.size() > 0 && sparse_diag_.minCoeff() <= 0.0) continue;
    if (st_.p > 0) {
      reduce_equalities();
      if (eq_folded_) {
        const Eigen::MatrixXd scaled = eq_dinv_.cwiseSqrt().asDiagonal() * eq_reduced_;
        chol_.triangularView<Eigen::Upper>() += scaled.transpose() * scaled;
      }
    }
    if (md == 0 || LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'U', md, chol_.data(), md) == 0) {
      reg_ = reg;
      ok = true;
      break;
    }
  }
  if (!ok) return false;

  if (st_.p > 0 && !eq_folded_) {
    eq_solved_ = eq_reduced_.transpose();
    dense_solve(eq_solved_);
    Eigen::MatrixXd schur = eq_sparse_;
    schur.noalias() += eq_reduced_ * eq_solved_;
    eq_schur_.compute(0.5 * (schur + schur.transpose()));
  }
  return true;
}

void KktSystem::dense_solve(Eigen::VectorXd& v) const {
  const int md = static_cast<int>(chol_.rows());
  if (md == 0) return;
  LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'U', md, 1, chol_.data(), md, v.data(), md);
}

void KktSystem::dense_solve(Eigen::MatrixXd& v) const {
  const int md = static_cast<int>(chol_.rows());
  if (md == 0 || v.cols() == 0) return;
  LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'U', md, static_cast<int>(v.cols()), chol_.data(), md, v.data(), md);
}

void KktSystem::solve(const Eigen::VectorXd& rx, const Eigen::VectorXd& ry, Eigen::VectorXd& dx,
                      Eigen::VectorXd& dy) const {
  const int md = static_cast<int>(st_.dense_vars.size());
  const int ms = static_cast<int>(st_.sparse_vars.size());
  Eigen::VectorXd rd(md), rs(ms);
  for (int i = 0; i < md; ++i) rd(i) = rx(st_.dense_vars[i]);
  for (int s = 0; s < ms; ++s) rs(s) = rx(st_.sparse_vars[s]);

  Eigen::VectorXd ryt = ry;
  for (int s = 0; s < ms; ++s) {
    const double f = rs(s) / sparse_diag_(s);
    for (const auto& [d, h] : sparse_couple_[s]) rd(d) -= h * f;
    for (const auto& [r, a] : sparse_eq_[s]) ryt(r) -= a * f;
  }

  Eigen::VectorXd xd = rd;
  dy = Eigen::VectorXd::Zero(st_.p);
  if (st_.p > 0 && eq_folded_) {
    xd.noalias() += eq_reduced_.transpose() * eq_dinv_.cwiseProduct(ryt);
    dense_solve(xd);
    dy = eq_dinv_.cwiseProduct(eq_reduced_ * xd - ryt);
  } else {
    dense_solve(xd);
    if (st_.p > 0) {
      dy = eq_schur_.solve(eq_reduced_ * xd - ryt);
      xd.noalias() -= eq_solved_ * dy;
    }
  }

  dx.resize(st_.m);
  for (int i = 0; i < md; ++i) dx(st_.dense_vars[i]) = xd(i);
  for (int s = 0; s < ms; ++s) {
    double v = rs(s);
    for (const auto& [d, h] : sparse_couple_[s]) v -= h * xd(d);
    for (const auto& [r, a] : sparse_eq_[s]) v -= a * dy(r);
    dx(st_.sparse_vars[s]) = v / sparse_diag_(s);
  }
}

}  // namespace regret::conic::detail
