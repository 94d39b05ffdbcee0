#include "triplesplit/admm.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace triplesplit {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

double spectral_norm(const Matrix &a) {
  if (a.size() == 0) {
    return 0.0;
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

bool is_identity(const Matrix &a) {
  return a.rows() == a.cols() &&
         (a - Matrix::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff() ==
             0.0;
}

/// prox_{gamma h} for h(w) = <A^T w, u> + ||A^T w||^2 / (2 alpha)
Vector quadratic_dual_prox(const Matrix &a, double alpha, const Vector &u,
                           double gamma, const Vector &v) {
  const Eigen::Index m = a.rows();
  Matrix lhs = Matrix::Identity(m, m) + (gamma / alpha) * (a * a.transpose());
  Eigen::LLT<Matrix> llt(lhs);
  if (llt.info() != Eigen::Success) {
    throw SingularOperatorError("dual quadratic prox system is singular");
  }
  return llt.solve(v - gamma * (a * u));
}

double quadratic_dual_value(const Matrix &a, double alpha, const Vector &u,
                            const Vector &w) {
  const Vector aw = a.transpose() * w;
  return aw.dot(u) + aw.squaredNorm() / (2.0 * alpha);
}

/// Support function of [lo, hi]^m.
double box_support(double lo, double hi, const Vector &w) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    s += std::max(lo * w(i), hi * w(i));
  }
  return s;
}

/// prox_{gamma sigma}(v) = v - gamma * clamp(v / gamma) (Moreau decomposition)
Vector box_support_prox(double lo, double hi, double gamma, const Vector &v) {
  return v - gamma * (v / gamma).cwiseMax(lo).cwiseMin(hi);
}

} // namespace

double SeparableProblem::mu() const {
  const auto &blk = blocks.at(strongly_convex_block);
  if (const auto *q = std::get_if<QuadraticBlock>(&blk.f)) {
    return q->alpha;
  }
  throw UnsupportedBlockError("strongly convex block must be quadratic");
}

void SeparableProblem::validate() const {
  const Eigen::Index m = b.size();
  if (m == 0) {
    throw DimensionMismatchError("constraint right-hand side is empty");
  }
  if (strongly_convex_block >= 3) {
    throw UnsupportedBlockError("strongly convex block index out of range");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const Block &blk = blocks[i];
    if (blk.a.rows() != m) {
      throw DimensionMismatchError("block " + std::to_string(i + 1) +
                                   ": A has " + std::to_string(blk.a.rows()) +
                                   " rows, expected " + std::to_string(m));
    }
    std::visit(overloaded{
                   [&](const QuadraticBlock &q) {
                     if (!(q.alpha > 0.0)) {
                       throw UnsupportedBlockError(
                           "quadratic block weight must be positive");
                     }
                     if (q.center.size() != blk.a.cols()) {
                       throw DimensionMismatchError(
                           "block " + std::to_string(i + 1) +
                           ": center size differs from A columns");
                     }
                   },
                   [&](const BoxBlock &bx) {
                     if (!(bx.lo < bx.hi)) {
                       throw InvalidBoundsError("box block needs lo < hi");
                     }
                     if (!is_identity(blk.a)) {
                       throw UnsupportedBlockError(
                           "box block " + std::to_string(i + 1) +
                           " requires an identity coupling matrix");
                     }
                   }},
               blk.f);
  }
  mu();
}

Vector SeparableProblem::constraint_residual(
    const std::array<Vector, 3> &x) const {
  Vector r = -b;
  for (std::size_t i = 0; i < 3; ++i) {
    r += blocks[i].a * x[i];
  }
  return r;
}

double SeparableProblem::objective(const std::array<Vector, 3> &x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    total += std::visit(
        overloaded{[&](const QuadraticBlock &q) {
                     return 0.5 * q.alpha * (x[i] - q.center).squaredNorm();
                   },
                   [&](const BoxBlock &bx) {
                     const bool inside = (x[i].array() >= bx.lo).all() &&
                                         (x[i].array() <= bx.hi).all();
                     return inside ? 0.0 : kInfinity;
                   }},
        blocks[i].f);
  }
  return total;
}

AdmmState zero_state(const SeparableProblem &problem, double gamma) {
  AdmmState s;
  for (std::size_t i = 0; i < 3; ++i) {
    s.x[i] = Vector::Zero(problem.block_dim(i));
  }
  s.w = Vector::Zero(problem.constraint_dim());
  s.gamma = gamma;
  return s;
}

AdmmState admm3_step(const SeparableProblem &problem, const AdmmState &state) {
  const double g = state.gamma;
  if (!(g > 0.0)) {
    throw InvalidConfigError("ADMM penalty must be positive");
  }
  AdmmState next = state;
  for (std::size_t i = 0; i < 3; ++i) {
    const Block &blk = problem.blocks[i];
    // target r: minimize f_i(x) + g/2 ||A_i x - r||^2
    Vector r = problem.b + state.w / g;
    for (std::size_t j = 0; j < 3; ++j) {
      if (j != i) {
        r -= problem.blocks[j].a * next.x[j];
      }
    }
    next.x[i] = std::visit(
        overloaded{
            [&](const QuadraticBlock &q) -> Vector {
              const Eigen::Index n = blk.a.cols();
              Matrix lhs = q.alpha * Matrix::Identity(n, n) +
                           g * (blk.a.transpose() * blk.a);
              Eigen::LLT<Matrix> llt(lhs);
              if (llt.info() != Eigen::Success) {
                throw SubproblemError(i, "normal equations are not positive "
                                         "definite");
              }
              return llt.solve(q.alpha * q.center + g * (blk.a.transpose() * r));
            },
            [&](const BoxBlock &bx) -> Vector {
              return r.cwiseMax(bx.lo).cwiseMin(bx.hi);
            }},
        blk.f);
    if (!next.x[i].allFinite()) {
      throw SubproblemError(i, "non-finite block solution");
    }
  }
  std::array<Vector, 3> xs = next.x;
  next.w = state.w - g * problem.constraint_residual(xs);
  return next;
}

MonotoneOperator dual_of_block(const Block &block, const Vector &tilt) {
  return std::visit(
      overloaded{
          [&](const QuadraticBlock &q) {
            auto a = std::make_shared<const Matrix>(block.a);
            auto u = std::make_shared<const Vector>(q.center);
            auto t = std::make_shared<const Vector>(tilt);
            const double alpha = q.alpha;
            return MonotoneOperator::custom(
                [a, u, t, alpha](double gamma, const Vector &v) {
                  return quadratic_dual_prox(*a, alpha, *u, gamma,
                                             v + gamma * *t);
                },
                false,
                [a, u, t, alpha](const Vector &w) {
                  return quadratic_dual_value(*a, alpha, *u, w) - w.dot(*t);
                });
          },
          [&](const BoxBlock &bx) {
            if (!is_identity(block.a)) {
              throw UnsupportedBlockError(
                  "box block requires an identity coupling matrix");
            }
            auto t = std::make_shared<const Vector>(tilt);
            const double lo = bx.lo;
            const double hi = bx.hi;
            return MonotoneOperator::custom(
                [t, lo, hi](double gamma, const Vector &v) {
                  return box_support_prox(lo, hi, gamma, v + gamma * *t);
                },
                false,
                [t, lo, hi](const Vector &w) {
                  return box_support(lo, hi, w) - w.dot(*t);
                });
          }},
      block.f);
}

CocoerciveOperator smooth_dual_of_block(const Block &block) {
  const auto *q = std::get_if<QuadraticBlock>(&block.f);
  if (q == nullptr) {
    throw UnsupportedBlockError("smooth dual requires a quadratic block");
  }
  auto a = std::make_shared<const Matrix>(block.a);
  auto u = std::make_shared<const Vector>(q->center);
  const double alpha = q->alpha;
  const double norm = spectral_norm(block.a);
  const double lip = norm * norm / alpha;
  return CocoerciveOperator::custom(
      [a, u, alpha](const Vector &w) {
        return Vector(*a * (*u) + (*a) * (a->transpose() * w) / alpha);
      },
      lip > 0.0 ? 1.0 / lip : kInfinity,
      [a, u, alpha](double gamma, const Vector &v) {
        return quadratic_dual_prox(*a, alpha, *u, gamma, v);
      },
      [a, u, alpha](const Vector &w) {
        return quadratic_dual_value(*a, alpha, *u, w);
      });
}

double DualSplitting::objective(const Vector &w) const {
  return d1.value(w) + d2.value(w) + d3.value(w);
}

DualSplitting build_dual(const SeparableProblem &problem) {
  problem.validate();
  if (problem.strongly_convex_block != 1) {
    throw UnsupportedBlockError(
        "the smooth dual term must come from block 2");
  }
  const Vector no_tilt = Vector::Zero(problem.constraint_dim());
  DualSplitting dual{
      dual_of_block(problem.blocks[0], no_tilt),
      smooth_dual_of_block(problem.blocks[1]),
      dual_of_block(problem.blocks[2], problem.b),
      0.0,
  };
  dual.d2_lipschitz = dual.d2.lipschitz();
  return dual;
}

DualWitness dual_step(const DualSplitting &dual, double gamma,
                      const Vector &z) {
  const StepOutput s = proposed_step(dual.d1, dual.d3, dual.d2, gamma, z);
  return {s.z, s.x_b, s.x_a, s.x_c, s.tz};
}

DualWitness dual_step_with_forward(const DualSplitting &dual, double gamma,
                                   const Vector &z, const Vector &forward) {
  if (forward.size() != z.size()) {
    throw DimensionMismatchError("forward term dimension differs from z");
  }
  DualWitness w;
  w.z = z;
  w.w_d3 = dual.d3.resolvent(gamma, z);
  w.w_d1 = dual.d1.resolvent(gamma, 2.0 * w.w_d3 - z - gamma * forward);
  w.w_d2 = dual.d2.resolvent(gamma, w.w_d1 + gamma * forward);
  w.z_next = z + w.w_d2 - w.w_d3;
  if (!w.z_next.allFinite()) {
    throw NumericalBlowupError("non-finite dual iterate", z);
  }
  return w;
}

EquivalenceReport equivalence_harness(const SeparableProblem &problem,
                                      double gamma, std::size_t iters) {
  const DualSplitting dual = build_dual(problem);
  const Matrix &a1 = problem.blocks[0].a;
  const Matrix &a2 = problem.blocks[1].a;
  const Matrix &a3 = problem.blocks[2].a;
  const Vector &b = problem.b;

  const AdmmState s0 = zero_state(problem, gamma);
  AdmmState cur = admm3_step(problem, s0); // state k + 1
  Vector z = s0.w - gamma * (a1 * cur.x[0] + a2 * cur.x[1]);
  Vector z_lag = z;
  Vector forward_lag = a2 * cur.x[1];

  EquivalenceReport rep;
  for (std::size_t k = 0; k < iters; ++k) {
    const AdmmState nxt = admm3_step(problem, cur); // state k + 2
    const Vector x1n = a1 * nxt.x[0];
    const Vector x2n = a2 * nxt.x[1];
    const Vector x2c = a2 * cur.x[1];
    const Vector x3c = a3 * cur.x[2];

    const Vector p_admm = cur.w - gamma * (x1n + x2c + x3c - b);
    const Vector v_admm = cur.w - gamma * (x1n + x2n + x3c - b);
    const Vector z_admm = cur.w - gamma * (x1n + x2n);

    const DualWitness wit = dual_step(dual, gamma, z);
    rep.w_deviation = std::max(rep.w_deviation, (wit.w_d3 - cur.w).norm());
    rep.p_deviation = std::max(rep.p_deviation, (wit.w_d1 - p_admm).norm());
    rep.v_deviation = std::max(rep.v_deviation, (wit.w_d2 - v_admm).norm());
    rep.z_deviation = std::max(rep.z_deviation, (wit.z_next - z_admm).norm());

    const DualWitness lag = dual_step_with_forward(dual, gamma, z_lag,
                                                   forward_lag);
    rep.lagged_w_deviation =
        std::max(rep.lagged_w_deviation, (lag.w_d3 - cur.w).norm());
    rep.lagged_p_deviation =
        std::max(rep.lagged_p_deviation, (lag.w_d1 - p_admm).norm());
    rep.lagged_v_deviation =
        std::max(rep.lagged_v_deviation, (lag.w_d2 - v_admm).norm());
    rep.lagged_z_deviation =
        std::max(rep.lagged_z_deviation, (lag.z_next - z_admm).norm());

    z = wit.z_next;
    z_lag = lag.z_next;
    forward_lag = dual.d2.forward(lag.w_d2);
    cur = nxt;
    rep.iterations = k + 1;
  }
  rep.max_deviation = std::max({rep.w_deviation, rep.p_deviation,
                                rep.v_deviation, rep.z_deviation});
  rep.lagged_max_deviation =
      std::max({rep.lagged_w_deviation, rep.lagged_p_deviation,
                rep.lagged_v_deviation, rep.lagged_z_deviation});
  rep.final_constraint_violation = problem.constraint_residual(cur.x).norm();
  return rep;
}

Prop3Report prop3_diagnostics(const DualSplitting &dual, const Vector &z,
                              double gamma) {
  const DualWitness s = dual_step(dual, gamma, z);
  const Vector g2_w3 = dual.d2.forward(s.w_d3);
  const Vector grad_d3 = (z - s.w_d3) / gamma;
  const Vector grad_d1 = (2.0 * s.w_d3 - z - gamma * g2_w3 - s.w_d1) / gamma;
  const Vector grad_d2 = (s.w_d1 + gamma * g2_w3 - s.w_d2) / gamma;
  const Vector total = grad_d1 + grad_d2 + grad_d3;

  Prop3Report r;
  r.residuals[0] = (s.w_d3 - (z - gamma * grad_d3)).norm();
  r.residuals[1] =
      ((s.w_d1 - s.w_d3) + gamma * (grad_d1 + g2_w3 + grad_d3)).norm();
  r.residuals[2] = ((s.w_d2 - s.w_d3) + gamma * total).norm();
  r.residuals[3] = ((s.w_d1 - s.w_d3) -
                    (s.w_d2 - s.w_d3 + gamma * (grad_d2 - g2_w3)))
                       .norm();
  r.residuals[4] = std::max(((s.z_next - z) - (s.w_d2 - s.w_d3)).norm(),
                            ((s.z_next - z) + gamma * total).norm());
  r.max_residual = *std::max_element(r.residuals.begin(), r.residuals.end());
  r.gradient_consistency = (grad_d2 - dual.d2.forward(s.w_d2)).norm();
  return r;
}

std::vector<DualWitness> collect_dual_witnesses(const DualSplitting &dual,
                                                double gamma, Vector z0,
                                                std::size_t iters) {
  std::vector<DualWitness> out;
  out.reserve(iters);
  Vector z = std::move(z0);
  for (std::size_t k = 0; k < iters; ++k) {
    out.push_back(dual_step(dual, gamma, z));
    z = out.back().z_next;
  }
  return out;
}

GapTrace objective_gap_trace(const DualSplitting &dual,
                             const std::vector<DualWitness> &witnesses,
                             const Vector &w_star) {
  const double f_star = dual.objective(w_star);
  GapTrace t;
  t.gap.reserve(witnesses.size());
  t.scaled.reserve(witnesses.size());
  for (std::size_t k = 0; k < witnesses.size(); ++k) {
    const double gap = dual.objective(witnesses[k].w_d3) - f_star;
    t.gap.push_back(gap);
    t.scaled.push_back(gap * std::sqrt(double(k + 1)));
  }
  return t;
}

SandwichReport sandwich_check(const DualSplitting &dual, double gamma,
                              const DualWitness &step, const Vector &z_star) {
  const DualWitness fixed = dual_step(dual, gamma, z_star);
  const Vector &w_star = fixed.w_d3;
  const Vector g2_star = dual.d2.forward(w_star);
  const Vector grad_d1_star =
      (2.0 * w_star - z_star - gamma * g2_star - fixed.w_d1) / gamma;
  const Vector grad_d3_star = (z_star - w_star) / gamma;
  const double f_star = dual.objective(w_star);

  const Vector g2_w3 = dual.d2.forward(step.w_d3);
  const Vector g2_w2 = (step.w_d1 + gamma * g2_w3 - step.w_d2) / gamma;
  const Vector delta = g2_w3 - g2_w2;
  const Vector a = step.z - step.z_next;
  const Vector b = step.z - w_star;

  SandwichReport r;
  r.mixed_gap = dual.d1.value(step.w_d1) + dual.d2.value(step.w_d3) +
                dual.d3.value(step.w_d3) - f_star;
  r.upper_bound = b.squaredNorm() - a.squaredNorm() -
                  (step.z_next - w_star).squaredNorm() +
                  2.0 * gamma * delta.dot(b) - 2.0 * gamma * delta.dot(a) +
                  2.0 * gamma * a.dot(g2_w2) +
                  2.0 * gamma * gamma * delta.dot(g2_w2);
  r.lower_bound =
      (step.w_d2 - step.w_d3 - gamma * delta).dot(grad_d1_star) +
      (step.w_d3 - w_star).dot(grad_d1_star + g2_star + grad_d3_star);
  return r;
}

} // namespace triplesplit
