#include "triplesplit/multiblock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace triplesplit {

double MultiblockScheme::step_bound() const {
  double sum = 0.0;
  double min_lip = kInfinity;
  for (const auto &op : smooth_chain) {
    const double lip = op.lipschitz();
    sum += lip;
    if (lip > 0.0) {
      min_lip = std::min(min_lip, lip);
    }
  }
  switch (bound_rule) {
  case StepBoundRule::ReciprocalLipschitzSum:
    return sum > 0.0 ? 2.0 / sum : kInfinity;
  case StepBoundRule::LiteralMinLipschitz:
    return min_lip;
  }
  return kInfinity;
}

void MultiblockScheme::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidConfigError("multiblock gamma must be positive and finite");
  }
  if (strict && !(gamma < step_bound())) {
    throw InvalidConfigError("multiblock gamma " + std::to_string(gamma) +
                             " is not below the step bound " +
                             std::to_string(step_bound()));
  }
}

MultiblockStep multiblock_step(const MultiblockScheme &scheme,
                               const Vector &z) {
  scheme.validate();
  const double g = scheme.gamma;

  MultiblockStep s;
  s.z = z;
  s.w = scheme.last.resolvent(g, z);

  std::vector<Vector> grads;
  grads.reserve(scheme.smooth_chain.size());
  s.gradient_sum = Vector::Zero(z.size());
  for (const auto &op : scheme.smooth_chain) {
    grads.push_back(op.forward(s.w));
    s.gradient_sum += grads.back();
  }

  s.p = scheme.nonsmooth_first.resolvent(g, 2.0 * s.w - z - g * s.gradient_sum);

  const Vector *prev = &s.p;
  s.chain_points.reserve(grads.size());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    s.chain_points.push_back(
        scheme.smooth_chain[i].resolvent(g, *prev + g * grads[i]));
    prev = &s.chain_points.back();
  }
  s.z_next = z + *prev - s.w;

  if (!s.z_next.allFinite()) {
    throw NumericalBlowupError("non-finite multiblock iterate", z);
  }
  return s;
}

Stepper bind_multiblock(MultiblockScheme scheme) {
  return [scheme = std::move(scheme)](double gamma, const Vector &z) {
    if (gamma != scheme.gamma) {
      throw InvalidConfigError("driver gamma differs from the multiblock "
                               "scheme's gamma");
    }
    MultiblockStep m = multiblock_step(scheme, z);
    StepOutput s;
    s.z = z;
    s.x_b = m.w;
    s.x_a = m.p;
    s.x_c = m.chain_points.empty() ? m.p : m.chain_points.back();
    s.tz = m.z_next;
    s.c_at_xb = m.gradient_sum;
    return s;
  };
}

MultiblockZeroReport multiblock_zero_report(const MultiblockScheme &scheme,
                                            const MultiblockStep &step) {
  const double g = scheme.gamma;
  Vector total = (step.z - step.w) / g;
  total += (2.0 * step.w - step.z - g * step.gradient_sum - step.p) / g;

  MultiblockZeroReport r;
  r.spread = (step.p - step.w).norm();
  const Vector *prev = &step.p;
  for (std::size_t i = 0; i < step.chain_points.size(); ++i) {
    const Vector grad = scheme.smooth_chain[i].forward(step.w);
    total += (*prev + g * grad - step.chain_points[i]) / g;
    r.spread = std::max(r.spread, (step.chain_points[i] - step.w).norm());
    prev = &step.chain_points[i];
  }
  r.inclusion_residual = total.norm();
  return r;
}

} // namespace triplesplit
