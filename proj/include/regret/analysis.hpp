#pragma once

#include "regret/synth.hpp"

namespace regret {

/// Regret of a response as a quadratic form in w for fixed x0:
/// w'Mw + 2b'w + c.
struct RegretQuadratic {
  Mat M;
  Vec b;
  double c = 0.0;

  [[nodiscard]] double value(const Vec& w) const { return w.dot(M * w) + 2.0 * b.dot(w) + c; }
};

[[nodiscard]] RegretQuadratic regret_quadratic(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0);

struct BallMaximum {
  Vec w;
  double value = 0.0;
  double multiplier = 0.0;  // nu with (nu I - M) w = b
  bool hard_case = false;
  bool interior = false;
};

/// Exact max of w'Mw + 2b'w + c over ||w||^2 <= omega (trust-region
/// subproblem) from the eigendecomposition of M and bisection on the
/// secular equation.
[[nodiscard]] BallMaximum maximize_on_ball(const Mat& M, const Vec& b, double c, double omega);

/// Worst disturbance in the energy ball for the response Phi started at x0.
[[nodiscard]] BallMaximum worst_case_disturbance(const SynthesisProblem& pb, const Mat& Phi, const Vec& x0,
                                                 double omega);

/// Spectral bound on the regret of Phi: regret(delta) <= sigma_max ||delta||^2.
struct RegretCertificate {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  Vec top_direction;  // unit delta attaining sigma_max

  [[nodiscard]] double bound(const Vec& x0, const Vec& w) const {
    return sigma_max * (x0.squaredNorm() + w.squaredNorm());
  }
};

[[nodiscard]] RegretCertificate regret_certificate(const SynthesisProblem& pb, const Mat& Phi);

/// Phi' C Phi - O.
[[nodiscard]] Mat regret_operator(const SynthesisProblem& pb, const Mat& Phi);

/// Minimiser of trace(Phi' C Phi) (LQR response).
[[nodiscard]] SynthesisResult synth_h2(const StackedDynamics& stk);
/// Minimiser of the induced 2-norm of Phi' C Phi.
[[nodiscard]] SynthesisResult synth_hinf(const SynthesisProblem& pb, const conic::SolverOptions& opts = {});

}  // namespace regret
