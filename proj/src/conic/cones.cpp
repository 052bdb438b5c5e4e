#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "conic/detail.hpp"

namespace regret::conic::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// J-inner product <u, J v> for a second-order cone segment.
double jdot(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return u(0) * v(0) - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

Eigen::VectorXd jflip(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::VectorXd r = -v;
  r(0) = v(0);
  return r;
}

}  // namespace

Structure build_structure(const ConicProgram& program) {
  Structure st;
  st.m = program.num_vars;
  st.p = program.num_equalities;
  st.c = program.objective;
  st.b = program.equality_rhs;
  st.eq = program.equalities;

  std::vector<char> in_psd(st.m, 0);
  for (const auto& blk : program.psd_blocks) {
    PsdData d;
    d.size = blk.size;
    d.num_atoms = static_cast<int>(blk.atoms.size());
    d.atoms = Eigen::MatrixXd::Zero(blk.size, d.num_atoms);
    for (int a = 0; a < d.num_atoms; ++a)
      for (std::size_t k = 0; k < blk.atoms[a].size(); ++k) d.atoms(blk.atoms[a].index[k], a) += blk.atoms[a].value[k];
    d.constant = 0.5 * (blk.constant + blk.constant.transpose());
    std::vector<PsdTerm> terms = blk.terms;
    std::stable_sort(terms.begin(), terms.end(), [](const PsdTerm& x, const PsdTerm& y) { return x.var < y.var; });
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (k == 0 || terms[k].var != terms[k - 1].var) {
        d.vars.push_back(terms[k].var);
        d.offsets.push_back(static_cast<int>(d.entries.size()));
        in_psd[terms[k].var] = 1;
      }
      d.entries.push_back({terms[k].atom_p, terms[k].atom_q, terms[k].coef});
    }
    d.offsets.push_back(static_cast<int>(d.entries.size()));
    st.degree += d.size;
    st.psd.push_back(std::move(d));
  }

  auto add_small = [&](const std::vector<AffineRow>& rows) {
    SmallCone cone;
    cone.dim = static_cast<int>(rows.size());
    cone.soc = cone.dim >= 2;
    cone.offset = st.small_dim;
    std::map<int, int> slot;
    for (const auto& r : rows)
      for (int v : r.coeffs.index) slot.emplace(v, 0);
    int k = 0;
    for (auto& [v, s] : slot) {
      s = k++;
      cone.vars.push_back(v);
    }
    cone.coeffs = Eigen::MatrixXd::Zero(cone.dim, k);
    cone.constant.resize(cone.dim);
    for (int i = 0; i < cone.dim; ++i) {
      cone.constant(i) = rows[i].constant;
      for (std::size_t e = 0; e < rows[i].coeffs.size(); ++e)
        cone.coeffs(i, slot[rows[i].coeffs.index[e]]) += rows[i].coeffs.value[e];
    }
    st.small_dim += cone.dim;
    st.degree += 1;
    st.small.push_back(std::move(cone));
  };
  for (const auto& soc : program.soc_constraints) add_small(soc.rows);
  for (int v : program.nonneg_vars) {
    AffineRow r;
    r.coeffs.push(v, 1.0);
    add_small({r});
  }

  // Partition for the KKT solve.
  std::vector<std::vector<int>> cones_of(st.m);
  for (std::size_t c = 0; c < st.small.size(); ++c)
    for (int v : st.small[c].vars) cones_of[v].push_back(static_cast<int>(c));
  std::vector<char> cone_taken(st.small.size(), 0);
  st.dense_index.assign(st.m, -1);
  st.sparse_index.assign(st.m, -1);
  for (int v = 0; v < st.m; ++v) {
    bool eligible = !in_psd[v] && !cones_of[v].empty();
    for (int c : cones_of[v]) eligible = eligible && !cone_taken[c];
    if (eligible) {
      for (int c : cones_of[v]) cone_taken[c] = 1;
      st.sparse_index[v] = static_cast<int>(st.sparse_vars.size());
      st.sparse_vars.push_back(v);
    } else {
      st.dense_index[v] = static_cast<int>(st.dense_vars.size());
      st.dense_vars.push_back(v);
    }
  }
  return st;
}

ConeVec zeros_like(const Structure& st) {
  ConeVec v;
  for (const auto& b : st.psd) v.psd.push_back(Eigen::MatrixXd::Zero(b.size, b.size));
  v.small = Eigen::VectorXd::Zero(st.small_dim);
  return v;
}

ConeVec identity_element(const Structure& st) {
  ConeVec v;
  for (const auto& b : st.psd) v.psd.push_back(Eigen::MatrixXd::Identity(b.size, b.size));
  v.small = Eigen::VectorXd::Zero(st.small_dim);
  for (const auto& c : st.small) v.small(c.offset) = 1.0;
  return v;
}

double dot(const ConeVec& a, const ConeVec& b) {
  double s = a.small.dot(b.small);
  for (std::size_t k = 0; k < a.psd.size(); ++k) s += a.psd[k].cwiseProduct(b.psd[k]).sum();
  return s;
}

double norm(const ConeVec& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const ConeVec& x, ConeVec& y) {
  for (std::size_t k = 0; k < x.psd.size(); ++k) y.psd[k] += alpha * x.psd[k];
  y.small += alpha * x.small;
}

void scale(ConeVec& x, double alpha) {
  for (auto& m : x.psd) m *= alpha;
  x.small *= alpha;
}

ConeVec constant_part(const Structure& st) {
  ConeVec v;
  for (const auto& b : st.psd) v.psd.push_back(b.constant);
  v.small.resize(st.small_dim);
  for (const auto& c : st.small) v.small.segment(c.offset, c.dim) = c.constant;
  return v;
}

ConeVec linear_map(const Structure& st, const Eigen::VectorXd& x) {
  ConeVec v;
  for (const auto& b : st.psd) {
    Eigen::MatrixXd small = Eigen::MatrixXd::Zero(b.num_atoms, b.num_atoms);
    for (std::size_t k = 0; k < b.vars.size(); ++k) {
      const double xv = x(b.vars[k]);
      if (xv == 0.0) continue;
      for (int e = b.offsets[k]; e < b.offsets[k + 1]; ++e) {
        const auto& t = b.entries[e];
        const double h = 0.5 * t.coef * xv;
        small(t.p, t.q) += h;
        small(t.q, t.p) += h;
      }
    }
    Eigen::MatrixXd tmp = b.atoms * small;
    Eigen::MatrixXd out(b.size, b.size);
    out.noalias() = tmp * b.atoms.transpose();
    v.psd.push_back(std::move(out));
  }
  v.small = Eigen::VectorXd::Zero(st.small_dim);
  for (const auto& c : st.small) {
    Eigen::VectorXd xl(c.vars.size());
    for (std::size_t k = 0; k < c.vars.size(); ++k) xl(k) = x(c.vars[k]);
    v.small.segment(c.offset, c.dim) = c.coeffs * xl;
  }
  return v;
}

Eigen::VectorXd adjoint_map(const Structure& st, const ConeVec& z) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(st.m);
  for (std::size_t bi = 0; bi < st.psd.size(); ++bi) {
    const auto& b = st.psd[bi];
    Eigen::MatrixXd za = z.psd[bi] * b.atoms;
    Eigen::MatrixXd zd(b.num_atoms, b.num_atoms);
    zd.noalias() = b.atoms.transpose() * za;
    for (std::size_t k = 0; k < b.vars.size(); ++k) {
      double s = 0.0;
      for (int e = b.offsets[k]; e < b.offsets[k + 1]; ++e) {
        const auto& t = b.entries[e];
        s += t.coef * 0.5 * (zd(t.p, t.q) + zd(t.q, t.p));
      }
      g(b.vars[k]) += s;
    }
  }
  for (const auto& c : st.small) {
    const Eigen::VectorXd loc = c.coeffs.transpose() * z.small.segment(c.offset, c.dim);
    for (std::size_t k = 0; k < c.vars.size(); ++k) g(c.vars[k]) += loc(k);
  }
  return g;
}

Eigen::VectorXd eq_apply(const Structure& st, const Eigen::VectorXd& x) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(st.p);
  for (const auto& e : st.eq) r(e.row) += e.coef * x(e.var);
  return r;
}

Eigen::VectorXd eq_adjoint(const Structure& st, const Eigen::VectorXd& y) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(st.m);
  for (const auto& e : st.eq) r(e.var) += e.coef * y(e.row);
  return r;
}

double min_cone_value(const Structure& st, const ConeVec& v) {
  double mn = kInf;
  for (const auto& m : v.psd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    mn = std::min(mn, es.eigenvalues()(0));
  }
  for (const auto& c : st.small) {
    const auto seg = v.small.segment(c.offset, c.dim);
    mn = std::min(mn, c.soc ? seg(0) - seg.tail(c.dim - 1).norm() : seg(0));
  }
  return mn;
}

// ---------------------------------------------------------------------------
// Scaling

Scaling identity_scaling(const Structure& st) {
  Scaling sc;
  sc.identity = true;
  sc.beta.assign(st.small.size(), 1.0);
  sc.wbar = Eigen::VectorXd::Zero(st.small_dim);
  for (const auto& c : st.small) sc.wbar(c.offset) = 1.0;
  sc.lambda = identity_element(st);
  for (const auto& b : st.psd) {
    PsdScaling ps;
    ps.R = Eigen::MatrixXd::Identity(b.size, b.size);
    ps.Rinv = ps.R;
    ps.lambda = Eigen::VectorXd::Ones(b.size);
    sc.psd.push_back(std::move(ps));
  }
  return sc;
}

bool compute_scaling(const Structure& st, const ConeVec& s, const ConeVec& z, Scaling& out) {
  out.identity = false;
  out.psd.clear();
  out.lambda = zeros_like(st);
  for (std::size_t k = 0; k < st.psd.size(); ++k) {
    Eigen::LLT<Eigen::MatrixXd> ls(s.psd[k]);
    Eigen::LLT<Eigen::MatrixXd> lz(z.psd[k]);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    const Eigen::MatrixXd Ls = ls.matrixL();
    const Eigen::MatrixXd Lz = lz.matrixL();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sig = svd.singularValues();
    if (sig.minCoeff() <= 0.0 || !sig.allFinite()) return false;
    const Eigen::VectorXd isq = sig.cwiseSqrt().cwiseInverse();
    PsdScaling ps;
    ps.R = Ls * svd.matrixV() * isq.asDiagonal();
    ps.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
    ps.lambda = sig;
    out.lambda.psd[k] = sig.asDiagonal();
    out.psd.push_back(std::move(ps));
  }
  out.beta.assign(st.small.size(), 1.0);
  out.wbar = Eigen::VectorXd::Zero(st.small_dim);
  for (std::size_t k = 0; k < st.small.size(); ++k) {
    const auto& c = st.small[k];
    const auto sv = s.small.segment(c.offset, c.dim);
    const auto zv = z.small.segment(c.offset, c.dim);
    if (!c.soc) {
      if (!(sv(0) > 0.0 && zv(0) > 0.0)) return false;
      out.wbar(c.offset) = std::sqrt(sv(0) / zv(0));
      out.lambda.small(c.offset) = std::sqrt(sv(0) * zv(0));
      continue;
    }
    const double sn = sv.tail(c.dim - 1).norm(), zn = zv.tail(c.dim - 1).norm();
    const double sj = (sv(0) - sn) * (sv(0) + sn);
    const double zj = (zv(0) - zn) * (zv(0) + zn);
    if (!(sv(0) > 0.0 && zv(0) > 0.0 && sj > 0.0 && zj > 0.0)) return false;
    const Eigen::VectorXd sb = sv / std::sqrt(sj);
    const Eigen::VectorXd zb = zv / std::sqrt(zj);
    const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
    Eigen::VectorXd w = (sb + jflip(zb)) / (2.0 * gamma);
    // Hyperbolic Householder vector: W = beta (2 v v' - J).
    w(0) += 1.0;
    w /= std::sqrt(2.0 * w(0));
    const double beta = std::pow(sj / zj, 0.25);
    out.beta[k] = beta;
    out.wbar.segment(c.offset, c.dim) = w;
    auto lam = out.lambda.small.segment(c.offset, c.dim);
    const double root = std::pow(sj * zj, 0.25);
    lam(0) = root * gamma;
    lam.tail(c.dim - 1) = root * ((gamma + zb(0)) * sb.tail(c.dim - 1) + (gamma + sb(0)) * zb.tail(c.dim - 1)) /
                          (sb(0) + zb(0) + 2.0 * gamma);
  }
  return true;
}

namespace {

enum class Op { W, Wt, Winv, Wit };

ConeVec apply_op(const Structure& st, const Scaling& sc, const ConeVec& v, Op op) {
  if (sc.identity) return v;
  ConeVec r;
  r.psd.reserve(v.psd.size());
  for (std::size_t k = 0; k < v.psd.size(); ++k) {
    const auto& ps = sc.psd[k];
    Eigen::MatrixXd t, o;
    switch (op) {
      case Op::W:  // R' V R
        t.noalias() = v.psd[k] * ps.R;
        o.noalias() = ps.R.transpose() * t;
        break;
      case Op::Wt:  // R V R'
        t.noalias() = v.psd[k] * ps.R.transpose();
        o.noalias() = ps.R * t;
        break;
      case Op::Winv:  // R^{-T} V R^{-1}
        t.noalias() = v.psd[k] * ps.Rinv;
        o.noalias() = ps.Rinv.transpose() * t;
        break;
      case Op::Wit:  // R^{-1} V R^{-T}
        t.noalias() = v.psd[k] * ps.Rinv.transpose();
        o.noalias() = ps.Rinv * t;
        break;
    }
    r.psd.push_back(0.5 * (o + o.transpose()));
  }
  r.small.resize(v.small.size());
  const bool inverse = (op == Op::Winv || op == Op::Wit);
  for (std::size_t k = 0; k < st.small.size(); ++k) {
    const auto& c = st.small[k];
    const auto x = v.small.segment(c.offset, c.dim);
    if (!c.soc) {
      const double w = sc.wbar(c.offset);
      r.small(c.offset) = inverse ? x(0) / w : x(0) * w;
      continue;
    }
    const Eigen::VectorXd w = sc.wbar.segment(c.offset, c.dim);
    const double beta = sc.beta[k];
    if (!inverse) {
      r.small.segment(c.offset, c.dim) = beta * (2.0 * w * w.dot(x) - jflip(x));
    } else {
      const Eigen::VectorXd jw = jflip(w);
      r.small.segment(c.offset, c.dim) = (2.0 * jw * jw.dot(x) - jflip(x)) / beta;
    }
  }
  return r;
}

}  // namespace

ConeVec apply_W(const Structure& st, const Scaling& sc, const ConeVec& v) { return apply_op(st, sc, v, Op::W); }
ConeVec apply_Wt(const Structure& st, const Scaling& sc, const ConeVec& v) { return apply_op(st, sc, v, Op::Wt); }
ConeVec apply_Winv(const Structure& st, const Scaling& sc, const ConeVec& v) { return apply_op(st, sc, v, Op::Winv); }
ConeVec apply_Wit(const Structure& st, const Scaling& sc, const ConeVec& v) { return apply_op(st, sc, v, Op::Wit); }

ConeVec apply_WtW_inv(const Structure& st, const Scaling& sc, const ConeVec& v) {
  return apply_Winv(st, sc, apply_Wit(st, sc, v));
}

Eigen::MatrixXd small_cone_winv(const Structure& st, const Scaling& sc, int k) {
  const auto& c = st.small[k];
  if (sc.identity) return Eigen::MatrixXd::Identity(c.dim, c.dim);
  if (!c.soc) return Eigen::MatrixXd::Constant(1, 1, 1.0 / sc.wbar(c.offset));
  const Eigen::VectorXd jw = jflip(sc.wbar.segment(c.offset, c.dim));
  Eigen::MatrixXd winv = 2.0 * jw * jw.transpose();
  winv.diagonal()(0) -= 1.0;
  winv.diagonal().tail(c.dim - 1).array() += 1.0;
  return winv / sc.beta[k];
}

Eigen::MatrixXd small_cone_weight(const Structure& st, const Scaling& sc, int k) {
  const Eigen::MatrixXd winv = small_cone_winv(st, sc, k);
  return winv * winv;
}

ConeVec jordan(const Structure& st, const ConeVec& x, const ConeVec& y) {
  ConeVec r;
  for (std::size_t k = 0; k < x.psd.size(); ++k) {
    Eigen::MatrixXd p = x.psd[k] * y.psd[k];
    r.psd.push_back(0.5 * (p + p.transpose()));
  }
  r.small.resize(x.small.size());
  for (const auto& c : st.small) {
    const auto a = x.small.segment(c.offset, c.dim);
    const auto b = y.small.segment(c.offset, c.dim);
    if (!c.soc) {
      r.small(c.offset) = a(0) * b(0);
      continue;
    }
    r.small(c.offset) = a.dot(b);
    r.small.segment(c.offset + 1, c.dim - 1) = a(0) * b.tail(c.dim - 1) + b(0) * a.tail(c.dim - 1);
  }
  return r;
}

ConeVec lambda_divide(const Structure& st, const Scaling& sc, const ConeVec& d) {
  ConeVec r;
  for (std::size_t k = 0; k < d.psd.size(); ++k) {
    const Eigen::VectorXd& l = sc.psd[k].lambda;
    const int n = static_cast<int>(l.size());
    Eigen::MatrixXd u(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) u(i, j) = 2.0 * d.psd[k](i, j) / (l(i) + l(j));
    r.psd.push_back(std::move(u));
  }
  r.small.resize(d.small.size());
  for (const auto& c : st.small) {
    const auto l = sc.lambda.small.segment(c.offset, c.dim);
    const auto v = d.small.segment(c.offset, c.dim);
    if (!c.soc) {
      r.small(c.offset) = v(0) / l(0);
      continue;
    }
    const double det = jdot(l, l);
    const double u0 = (l(0) * v(0) - l.tail(c.dim - 1).dot(v.tail(c.dim - 1))) / det;
    r.small(c.offset) = u0;
    r.small.segment(c.offset + 1, c.dim - 1) = (v.tail(c.dim - 1) - u0 * l.tail(c.dim - 1)) / l(0);
  }
  return r;
}

double max_step(const Structure& st, const Scaling& sc, const ConeVec& d) {
  double alpha = kInf;
  for (std::size_t k = 0; k < d.psd.size(); ++k) {
    const Eigen::VectorXd isq = sc.psd[k].lambda.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd m = isq.asDiagonal() * d.psd[k] * isq.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const double mn = es.eigenvalues()(0);
    if (mn < 0.0) alpha = std::min(alpha, -1.0 / mn);
  }
  for (const auto& c : st.small) {
    const auto l = sc.lambda.small.segment(c.offset, c.dim);
    const auto v = d.small.segment(c.offset, c.dim);
    if (!c.soc) {
      if (v(0) < 0.0) alpha = std::min(alpha, -l(0) / v(0));
      continue;
    }
    const double a = jdot(v, v);
    const double b = jdot(l, v);
    const double cc = jdot(l, l);
    const double disc = b * b - a * cc;
    if (a > 0.0 && (b >= 0.0 || disc < 0.0)) continue;
    const double denom = -b + std::sqrt(std::max(disc, 0.0));
    if (denom > 0.0) alpha = std::min(alpha, cc / denom);
  }
  return alpha;
}

}  // namespace regret::conic::detail
