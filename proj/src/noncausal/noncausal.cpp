#include "regret/noncausal.hpp"

#include <stdexcept>

namespace regret {

NonCausalOracle build_oracle(const StackedDynamics& stk) {
  const int Nx = stk.Nx(), Nu = stk.Nu(), n = stk.n;
  const Mat Qinv = stk.Cinv.topLeftCorner(Nx, Nx);
  const Mat Rinv = stk.Cinv.bottomRightCorner(Nu, Nu);
  NonCausalOracle o;
  o.n = n;
  Mat mid = Qinv + stk.F * Rinv * stk.F.transpose();
  o.middle.compute(0.5 * (mid + mid.transpose()));
  if (o.middle.info() != Eigen::Success) throw std::runtime_error("noncausal: middle factor is not positive definite");
  const Mat X = o.middle.solve(stk.G);
  Mat O = stk.G.transpose() * X;
  o.O = 0.5 * (O + O.transpose());
  const int rt = stk.Nd() - n;
  o.O1 = o.O.topLeftCorner(n, n);
  o.O2 = o.O.bottomLeftCorner(rt, n);
  o.O3 = o.O.bottomRightCorner(rt, rt);
  return o;
}

Vec optimal_sequence(const StackedDynamics& stk, const Vec& delta) {
  if (delta.size() != stk.Nd()) throw std::invalid_argument("noncausal: delta has wrong length");
  const Mat Q = stk.calQ();
  const Mat H = stk.calR() + stk.F.transpose() * Q * stk.F;
  Eigen::LLT<Mat> llt(0.5 * (H + H.transpose()));
  return -llt.solve(stk.F.transpose() * (Q * (stk.G * delta)));
}

double benchmark_cost(const NonCausalOracle& oracle, const Vec& delta) {
  if (delta.size() != oracle.O.rows()) throw std::invalid_argument("noncausal: delta has wrong length");
  return oracle.cost(delta);
}

}  // namespace regret
