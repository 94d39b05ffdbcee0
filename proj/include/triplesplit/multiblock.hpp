#pragma once

// m-operator splitting for min d_1 + d_2 + ... + d_m where d_2 .. d_{m-1}
// have Lipschitz gradients:
//
//   w   = prox_{d_m}(z)
//   p   = prox_{d_1}(2w - z - g sum_i grad d_i(w))
//   v_i = prox_{d_i}(v_{i-1} + g grad d_i(w)),  v_1 = p,  i = 2 .. m-1
//   z+  = z + v_{m-1} - w
//
// With one smooth block this is the three-operator proposed step; with an
// empty chain it is Douglas-Rachford.

#include "triplesplit/splitting.hpp"

#include <vector>

namespace triplesplit {

/// Which step-size bound strict mode enforces.
enum class StepBoundRule {
  /// gamma < 2 / sum_i L_i
  ReciprocalLipschitzSum,
  /// gamma < min_i L_i, as printed in the four-operator algorithm header.
  LiteralMinLipschitz,
};

struct MultiblockScheme {
  MonotoneOperator nonsmooth_first = MonotoneOperator::zero();
  /// Resolvent is used as prox, forward as gradient, 1/beta as Lipschitz.
  std::vector<CocoerciveOperator> smooth_chain;
  MonotoneOperator last = MonotoneOperator::zero();
  double gamma = 1.0;
  bool strict = false;
  StepBoundRule bound_rule = StepBoundRule::ReciprocalLipschitzSum;

  /// Upper bound on gamma under the selected rule (+inf for an empty or
  /// all-zero chain).
  double step_bound() const;
  void validate() const;

  /// m = chain length + 2
  std::size_t operator_count() const noexcept {
    return smooth_chain.size() + 2;
  }
};

struct MultiblockStep {
  Vector z;
  Vector w;
  Vector p;
  /// v_2 .. v_{m-1}
  std::vector<Vector> chain_points;
  /// sum_i grad d_i(w)
  Vector gradient_sum;
  Vector z_next;
};

MultiblockStep multiblock_step(const MultiblockScheme &scheme,
                               const Vector &z);

/// Adapter for km_iterate. x_B = w, x_A = p, x_C = last chain point.
/// The driver's gamma must equal scheme.gamma.
Stepper bind_multiblock(MultiblockScheme scheme);

struct MultiblockZeroReport {
  /// || u_last + u_first + sum_i u_i || built from the prox optimality
  /// conditions; equals ||z+ - z|| / gamma.
  double inclusion_residual = 0.0;
  /// max distance of p and the chain points from w.
  double spread = 0.0;
};

MultiblockZeroReport multiblock_zero_report(const MultiblockScheme &scheme,
                                            const MultiblockStep &step);

} // namespace triplesplit
