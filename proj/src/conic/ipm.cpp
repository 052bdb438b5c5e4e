#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "conic/detail.hpp"

namespace regret::conic {
namespace {

using detail::ConeVec;
using detail::KktSystem;
using detail::Scaling;
using detail::Structure;

struct KktSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  ConeVec z;
};

ConeVec WtW(const Structure& st, const Scaling& sc, const ConeVec& v) {
  return detail::apply_Wt(st, sc, detail::apply_W(st, sc, v));
}

// Solves [0 A' G'; A 0 0; G 0 -W'W] [x; y; z] = [bx; by; bz] with G = -L.
KktSolution kkt_once(const Structure& st, const Scaling& sc, const KktSystem& kkt, const Eigen::VectorXd& bx,
                     const Eigen::VectorXd& by, const ConeVec& bz) {
  KktSolution out;
  const ConeVec wz = detail::apply_WtW_inv(st, sc, bz);
  const Eigen::VectorXd rx = bx - detail::adjoint_map(st, wz);
  kkt.solve(rx, by, out.x, out.y);
  ConeVec t = detail::linear_map(st, out.x);
  detail::scale(t, -1.0);
  detail::axpy(-1.0, bz, t);
  out.z = detail::apply_WtW_inv(st, sc, t);
  return out;
}

KktSolution kkt_solve(const Structure& st, const Scaling& sc, const KktSystem& kkt, const Eigen::VectorXd& bx,
                      const Eigen::VectorXd& by, const ConeVec& bz, int refinement) {
  KktSolution sol = kkt_once(st, sc, kkt, bx, by, bz);
  for (int it = 0; it < refinement; ++it) {
    const Eigen::VectorXd ex = bx - detail::eq_adjoint(st, sol.y) + detail::adjoint_map(st, sol.z);
    const Eigen::VectorXd ey = by - detail::eq_apply(st, sol.x);
    ConeVec ez = bz;
    detail::axpy(1.0, detail::linear_map(st, sol.x), ez);
    detail::axpy(1.0, WtW(st, sc, sol.z), ez);
    const KktSolution corr = kkt_once(st, sc, kkt, ex, ey, ez);
    sol.x += corr.x;
    sol.y += corr.y;
    detail::axpy(1.0, corr.z, sol.z);
  }
  return sol;
}

// Shifts v into the interior of the cone if it is not already well inside.
void shift_interior(const Structure& st, ConeVec& v) {
  const double nrm = detail::norm(v);
  const double t = -detail::min_cone_value(st, v);
  if (t >= -1e-8 * std::max(nrm, 1.0)) detail::axpy(1.0 + t, detail::identity_element(st), v);
}

}  // namespace

SolveReport solve(const ConicProgram& program, const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  program.validate();

  const Structure st = detail::build_structure(program);
  const ConeVec h = detail::constant_part(st);
  const double resx0 = std::max(1.0, st.c.norm());
  const double resy0 = std::max(1.0, st.b.norm());
  const double resz0 = std::max(1.0, detail::norm(h));
  const double tol = options.tolerance;
  const int refine = options.refinement_steps;

  SolveReport report;
  KktSystem kkt(st, options.parallel_assembly);

  // Initial point.
  Scaling sc = detail::identity_scaling(st);
  if (!kkt.factor(sc)) {
    report.status = SolveStatus::NumericalTrouble;
    report.primal = Eigen::VectorXd::Zero(st.m);
    report.solve_seconds = elapsed();
    return report;
  }
  KktSolution p0 = kkt_solve(st, sc, kkt, Eigen::VectorXd::Zero(st.m), st.b, h, refine);
  Eigen::VectorXd x = p0.x;
  ConeVec s = p0.z;
  detail::scale(s, -1.0);
  KktSolution d0 = kkt_solve(st, sc, kkt, -st.c, Eigen::VectorXd::Zero(st.p), detail::zeros_like(st), refine);
  Eigen::VectorXd y = d0.y;
  ConeVec z = d0.z;
  shift_interior(st, s);
  shift_interior(st, z);
  double tau = 1.0, kappa = 1.0;

  struct Snapshot {
    double pres = INFINITY, dres = INFINITY, relgap = INFINITY;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    ConeVec z;
    double tau = 1.0;
  } best, primal_best;

  const double deg = static_cast<double>(st.degree);
  const double loose = std::sqrt(tol) * 1e-1;
  const double dual_floor = options.dual_residual_floor;
  int since_best = 0;
  SolveStatus status = SolveStatus::NumericalTrouble;
  bool finished = false;
  int iter = 0;
  for (; iter <= options.max_iterations; ++iter) {
    // Residuals.
    const Eigen::VectorXd hrx = detail::eq_adjoint(st, y) - detail::adjoint_map(st, z);
    const Eigen::VectorXd r1 = hrx + tau * st.c;
    const Eigen::VectorXd hry = detail::eq_apply(st, x);
    const Eigen::VectorXd r2 = tau * st.b - hry;
    ConeVec hrz = s;
    detail::axpy(-1.0, detail::linear_map(st, x), hrz);
    ConeVec r3 = hrz;
    detail::axpy(-tau, h, r3);
    const double cx = st.c.dot(x), by = st.b.dot(y), hz = detail::dot(h, z);
    const double r4 = kappa + cx + by + hz;

    const double gap = detail::dot(s, z);
    const double mu = (gap + tau * kappa) / (deg + 1.0);
    const double pcost = cx / tau, dcost = -(by + hz) / tau;
    const double pres = std::max(r2.norm() / resy0, detail::norm(r3) / resz0) / tau;
    const double dres = r1.norm() / resx0 / tau;
    const double relgap = (gap / (tau * tau)) / std::max(1.0, std::min(std::abs(pcost), std::abs(dcost)));
    const double pinfres = (hz + by < 0.0) ? hrx.norm() / resx0 / (-hz - by) : INFINITY;
    const double dinfres =
        (cx < 0.0) ? std::max(hry.norm() / resy0, detail::norm(hrz) / resz0) / (-cx) : INFINITY;

    if (options.verbose)
      std::fprintf(stderr, "%3d  pcost % .9e  dcost % .9e  gap %.2e  pres %.2e  dres %.2e  k/t %.2e  reg %.0e\n",
                   iter, pcost, dcost, gap / (tau * tau), pres, dres, kappa / tau, kkt.regularisation());

    const double worst = std::max({pres, dres, relgap});
    const double best_worst = std::max({best.pres, best.dres, best.relgap});
    if (pres <= loose && dres <= dual_floor &&
        std::max(pres, relgap) < std::max(primal_best.pres, primal_best.relgap))
      primal_best = {pres, dres, relgap, x, y, z, tau};
    const bool primal_ready = std::max(primal_best.pres, primal_best.relgap) <= loose;
    if (worst < best_worst) {
      best = {pres, dres, relgap, x, y, z, tau};
      since_best = 0;
    } else if (++since_best >= 4 || (best_worst <= loose && worst > 100.0 * best_worst)) {
      // Accuracy floor reached: the iterates only drift from here.
      if (best_worst <= loose || (since_best >= 4 && primal_ready)) break;
    }
    report.primal_residual = pres;
    report.dual_residual = dres;
    report.relative_gap = relgap;
    if (pres <= tol && dres <= tol && relgap <= tol) {
      status = SolveStatus::Optimal;
      finished = true;
      break;
    }
    if (pinfres <= tol) {
      status = SolveStatus::Infeasible;
      finished = true;
      break;
    }
    if (dinfres <= tol) {
      status = SolveStatus::Unbounded;
      finished = true;
      break;
    }
    if (iter == options.max_iterations) break;
    if (options.time_limit_seconds > 0.0 && elapsed() > options.time_limit_seconds) break;

    // Scaling and factorisation.
    if (!detail::compute_scaling(st, s, z, sc)) break;
    if (!kkt.factor(sc)) break;
    const ConeVec& lambda = sc.lambda;
    const ConeVec lambda_sq = detail::jordan(st, lambda, lambda);

    const KktSolution u1 = kkt_solve(st, sc, kkt, -st.c, st.b, h, refine);
    const double wz1 = detail::norm(detail::apply_W(st, sc, u1.z));
    const double denom = -kappa / tau - wz1 * wz1;

    ConeVec dsa_dza;
    double dta_dka = 0.0;
    double sigma = 0.0;
    double alpha = 0.0;
    Eigen::VectorXd dx, dy;
    ConeVec dz, dst;
    double dtau = 0.0, dkappa = 0.0;
    bool failed = false;
    for (int pass = 0; pass < 2; ++pass) {
      ConeVec ds = lambda_sq;
      detail::scale(ds, -1.0);
      double dk = -tau * kappa;
      if (pass == 1) {
        detail::axpy(sigma * mu, detail::identity_element(st), ds);
        detail::axpy(-1.0, dsa_dza, ds);
        dk += sigma * mu - dta_dka;
      }
      const ConeVec q = detail::lambda_divide(st, sc, ds);
      const double f = 1.0 - sigma;
      ConeVec bz = r3;
      detail::scale(bz, -f);
      detail::axpy(-1.0, detail::apply_Wt(st, sc, q), bz);
      const KktSolution u0 = kkt_solve(st, sc, kkt, -f * r1, f * r2, bz, refine);

      const double num = -f * r4 - dk / tau - (st.c.dot(u0.x) + st.b.dot(u0.y) + detail::dot(h, u0.z));
      dtau = num / denom;
      dx = u0.x + dtau * u1.x;
      dy = u0.y + dtau * u1.y;
      dz = u0.z;
      detail::axpy(dtau, u1.z, dz);
      dkappa = (dk - kappa * dtau) / tau;

      const ConeVec dzt = detail::apply_W(st, sc, dz);
      dst = q;
      detail::axpy(-1.0, dzt, dst);

      double amax = std::min(detail::max_step(st, sc, dst), detail::max_step(st, sc, dzt));
      if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
      if (!std::isfinite(dtau) || std::isnan(amax)) {
        failed = true;
        break;
      }
      if (pass == 0) {
        const double aa = std::min(1.0, amax);
        sigma = std::pow(1.0 - aa, 3);
        dsa_dza = detail::jordan(st, dst, dzt);
        dta_dka = dtau * dkappa;
      } else {
        alpha = std::min(1.0, 0.99 * amax);
      }
    }
    if (failed || !(alpha > 1e-12)) break;

    x += alpha * dx;
    y += alpha * dy;
    detail::axpy(alpha, detail::apply_Wt(st, sc, dst), s);
    detail::axpy(alpha, dz, z);
    tau += alpha * dtau;
    kappa += alpha * dkappa;
  }

  report.iterations = iter;
  if (!finished) {
    // Stalled: accept the best iterate if it is close enough.
    if (best.x.size() > 0 && best.pres <= loose && best.dres <= loose && best.relgap <= loose) {
      status = SolveStatus::Optimal;
      report.reduced_accuracy = true;
    } else if (primal_best.x.size() > 0 && primal_best.relgap <= loose) {
      // Dual residual floor: keep the feasible primal point with the smallest gap.
      best = primal_best;
      status = SolveStatus::Optimal;
      report.reduced_accuracy = true;
    }
    if (best.x.size() > 0) {
      x = best.x;
      y = best.y;
      z = best.z;
      tau = best.tau;
      report.primal_residual = best.pres;
      report.dual_residual = best.dres;
      report.relative_gap = best.relgap;
    }
  }
  report.status = status;
  if (status == SolveStatus::Infeasible || status == SolveStatus::Unbounded) {
    report.primal = x;
  } else {
    report.primal = x / tau;
  }
  report.objective_value = st.c.dot(report.primal);
  report.dual_objective = -(st.b.dot(y) + detail::dot(h, z)) / tau;
  report.violations = check_solution(program, report.primal);
  report.max_psd_violation = report.violations.max_psd_violation;
  report.max_eq_violation = report.violations.max_eq_violation;
  report.solve_seconds = elapsed();
  return report;
}

}  // namespace regret::conic
