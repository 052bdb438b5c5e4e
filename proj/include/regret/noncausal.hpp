#pragma once

#include "regret/model.hpp"

namespace regret {

/// Cost of the best input sequence chosen with knowledge of the whole
/// perturbation: J*(delta) = delta' O delta with
/// O = G' (Q^{-1} + F R^{-1} F')^{-1} G.
struct NonCausalOracle {
  int n = 0;
  Mat O;
  Mat O1;  // n x n
  Mat O2;  // rT x n
  Mat O3;  // rT x rT
  Eigen::LLT<Mat> middle;  // factor of Q^{-1} + F R^{-1} F'

  [[nodiscard]] double cost(const Vec& delta) const { return delta.dot(O * delta); }
};

[[nodiscard]] NonCausalOracle build_oracle(const StackedDynamics& stk);

/// u* = -(R + F'QF)^{-1} F'Q G delta.
[[nodiscard]] Vec optimal_sequence(const StackedDynamics& stk, const Vec& delta);

[[nodiscard]] double benchmark_cost(const NonCausalOracle& oracle, const Vec& delta);

}  // namespace regret
