#include "regret/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace regret {

Mat regret_operator(const SynthesisProblem& pb, const Mat& Phi) {
  Mat R = Phi.transpose() * pb.stk.C * Phi - pb.oracle.O;
  return 0.5 * (R + R.transpose());
}

RegretQuadratic regret_quadratic(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0) {
  const int n = pb.stk.n, rt = pb.stk.r * pb.stk.T;
  if (x0.size() != n) throw std::invalid_argument("regret_quadratic: x0 has wrong length");
  const Mat CPw = pb.stk.C * Phi.rightCols(rt);
  const Vec p0 = Phi.leftCols(n) * x0;
  RegretQuadratic q;
  q.M = Phi.rightCols(rt).transpose() * CPw - pb.oracle.O3;
  q.M = 0.5 * (q.M + q.M.transpose());
  q.b = CPw.transpose() * p0 - pb.oracle.O2 * x0;
  q.c = p0.dot(pb.stk.C * p0) - x0.dot(pb.oracle.O1 * x0);
  return q;
}

BallMaximum maximize_on_ball(const Mat& M, const Vec& b, double c, double omega) {
  if (!(omega >= 0.0)) throw std::invalid_argument("maximize_on_ball: omega must be nonnegative");
  const int d = static_cast<int>(M.rows());
  BallMaximum out;
  out.w = Vec::Zero(d);
  out.value = c;
  if (d == 0 || omega == 0.0) {
    out.interior = true;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
  const Vec& lam = es.eigenvalues();
  const Mat& V = es.eigenvectors();
  const Vec beta = V.transpose() * b;
  const double lmax = lam(d - 1);
  const double bnorm = b.norm();
  const double scale = std::max({1.0, std::abs(lmax), bnorm / std::sqrt(omega)});
  const double eig_tol = 1e-10 * scale;

  auto w_of = [&](double nu, const std::vector<bool>& skip) {
    Vec y = Vec::Zero(d);
    for (int i = 0; i < d; ++i)
      if (!skip[i]) y(i) = beta(i) / (nu - lam(i));
    return y;
  };
  auto finish = [&](const Vec& y, double nu) {
    out.w = V * y;
    out.multiplier = nu;
    out.value = out.w.dot(M * out.w) + 2.0 * b.dot(out.w) + c;
    return out;
  };

  const double nu_lo = std::max(0.0, lmax);
  std::vector<bool> top(d, false);
  double beta_top = 0.0;
  for (int i = 0; i < d; ++i)
    if (lam(i) >= nu_lo - eig_tol) {
      top[i] = true;
      beta_top = std::max(beta_top, std::abs(beta(i)));
    }

  // Solution at nu_lo when b has no weight on the eigenvalues at nu_lo.
  if (beta_top <= 1e-12 * (1.0 + bnorm)) {
    const Vec y = w_of(nu_lo, top);
    const double g = y.squaredNorm();
    if (g <= omega) {
      Vec yy = y;
      if (lmax > eig_tol) {
        // Hard case: fill the ball along the top eigenvector.
        yy(d - 1) = std::sqrt(omega - g);
        out.hard_case = true;
      } else {
        out.interior = true;
      }
      return finish(yy, nu_lo);
    }
  }

  // ||w(nu)|| decreases on (nu_lo, inf); bisect ||w(nu)||^2 = omega.
  const std::vector<bool> none(d, false);
  double lo = nu_lo, hi = lmax + bnorm / std::sqrt(omega) + 1.0;
  if (hi <= lo) hi = lo + 1.0;
  for (int it = 0; it < 400 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (w_of(mid, none).squaredNorm() > omega)
      lo = mid;
    else
      hi = mid;
  }
  Vec y = w_of(hi, none);
  const double g = y.squaredNorm();
  if (hi - nu_lo <= 1e-9 * scale && g < omega * (1.0 - 1e-8) && lmax > eig_tol) {
    // Bracket collapsed onto lambda_max: near-hard case.
    y = w_of(nu_lo, top);
    const double rest = y.squaredNorm();
    y(d - 1) = (beta(d - 1) >= 0.0 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, omega - rest));
    out.hard_case = true;
    return finish(y, nu_lo);
  }
  if (g > omega) y *= std::sqrt(omega / g);
  return finish(y, hi);
}

BallMaximum worst_case_disturbance(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0, double omega) {
  const RegretQuadratic q = regret_quadratic(pb, Phi, x0);
  return maximize_on_ball(q.M, q.b, q.c, omega);
}

RegretCertificate regret_certificate(const SynthesisProblem& pb, const Mat& Phi) {
  Eigen::SelfAdjointEigenSolver<Mat> es(regret_operator(pb, Phi));
  const int d = static_cast<int>(es.eigenvalues().size());
  RegretCertificate cert;
  cert.sigma_max = es.eigenvalues()(d - 1);
  cert.sigma_min = es.eigenvalues()(0);
  cert.top_direction = es.eigenvectors().col(d - 1);
  return cert;
}

SynthesisResult synth_h2(const StackedDynamics& stk) {
  SynthesisResult res;
  res.mode = SynthesisMode::H2;
  res.Phi = h2_response(stk);
  res.gamma_star = (res.Phi.transpose() * stk.C * res.Phi).trace();
  res.report.status = conic::SolveStatus::Optimal;
  res.report.objective_value = res.gamma_star;
  res.report.dual_objective = res.gamma_star;
  try {
    res.controller = CausalController::recover(stk, res.Phi);
  } catch (const std::exception& e) {
    res.message = e.what();
  }
  return res;
}

SynthesisResult synth_hinf(const SynthesisProblem& pb, const conic::SolverOptions& opts) {
  return solve_built(pb, build_norm_program(pb, false), SynthesisMode::Hinf, opts);
}

}  // namespace regret
