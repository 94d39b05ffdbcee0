#include "triplesplit/cli/verify.hpp"

#include "triplesplit/admm.hpp"
#include "triplesplit/cli/run_spec.hpp"
#include "triplesplit/multiblock.hpp"
#include "triplesplit/problems.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>

namespace triplesplit::cli {

namespace {

class Sampler {
public:
  explicit Sampler(std::uint64_t seed) : engine_(seed), normal_(seed + 1) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  Vector vector(Eigen::Index n, double scale = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i) = scale * normal_.next();
    }
    return v;
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        m(i, j) = normal_.next() / std::sqrt(double(cols));
      }
    }
    return m;
  }

  MonotoneOperator monotone(Eigen::Index n) {
    switch (pick(5)) {
    case 0:
      return MonotoneOperator::zero();
    case 1: {
      const double lo = -uniform(0.1, 2.0);
      return MonotoneOperator::box(lo, lo + uniform(0.1, 3.0));
    }
    case 2: {
      const Eigen::Index m = 1 + Eigen::Index(pick(std::size_t(n)));
      return MonotoneOperator::affine(matrix(std::min(m, n), n),
                                      vector(std::min(m, n)));
    }
    case 3:
      return MonotoneOperator::quadratic(uniform(0.2, 3.0), vector(n));
    default:
      return MonotoneOperator::linear_composite(matrix(n, n), uniform(0.2, 3.0),
                                                vector(n));
    }
  }

  CocoerciveOperator cocoercive(Eigen::Index n, bool allow_zero = true) {
    switch (allow_zero ? pick(3) : 1 + pick(2)) {
    case 0:
      return CocoerciveOperator::zero();
    case 1:
      return CocoerciveOperator::quadratic(uniform(0.2, 3.0), vector(n));
    default:
      return CocoerciveOperator::linear_composite(matrix(n, n),
                                                  uniform(0.2, 3.0), vector(n));
    }
  }

  Block quadratic_block(Eigen::Index m, Eigen::Index n) {
    return {QuadraticBlock{uniform(0.3, 3.0), vector(n)}, matrix(m, n)};
  }
  Block box_block(Eigen::Index m) {
    const double lo = -uniform(0.2, 2.0);
    return {BoxBlock{lo, lo + uniform(0.2, 3.0)}, Matrix::Identity(m, m)};
  }

  /// variant 0: box/quad/quad, 1: quad/quad/box, 2: all quadratic
  SeparableProblem separable(Eigen::Index m, int variant) {
    SeparableProblem p;
    auto dim = [&] { return m + Eigen::Index(pick(3)); };
    p.blocks[0] = variant == 0 ? box_block(m) : quadratic_block(m, dim());
    p.blocks[1] = quadratic_block(m, dim());
    p.blocks[2] = variant == 1 ? box_block(m) : quadratic_block(m, dim());
    p.b = vector(m);
    return p;
  }

private:
  std::mt19937_64 engine_;
  NormalStream normal_;
};

CheckResult check(std::string name, double value, double limit) {
  return {std::move(name), value, limit, std::isfinite(value) && value <= limit};
}

void identities(std::vector<CheckResult> &out) {
  Sampler s(20240611);
  double identity = 0.0;
  double membership = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(s.pick(8));
    const MonotoneOperator a = s.monotone(n);
    const MonotoneOperator b = s.monotone(n);
    const CocoerciveOperator c = s.cocoercive(n);
    const double gamma = s.uniform(0.05, 3.0);
    const Vector z = s.vector(n, s.uniform(0.1, 10.0));
    const StepOutput step = proposed_step(a, b, c, gamma, z);
    const Lemma1Report r = lemma1_diagnostics(step, a, b, c, gamma);
    const double scale = 1.0 + z.norm();
    identity = std::max(identity, r.max_violation / scale);
    membership = std::max(membership, r.membership_violation / scale);
  }
  out.push_back(check("identities.step", identity, 1e-10));
  out.push_back(check("identities.graph_membership", membership, 1e-10));

  double prop3 = 0.0;
  double grad = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index m = 1 + Eigen::Index(s.pick(6));
    const SeparableProblem p = s.separable(m, int(s.pick(3)));
    const DualSplitting dual = build_dual(p);
    const double gamma = s.uniform(0.1, 3.0);
    const Vector z = s.vector(m, s.uniform(0.1, 10.0));
    const Prop3Report r = prop3_diagnostics(dual, z, gamma);
    const double scale = 1.0 + z.norm();
    prop3 = std::max(prop3, r.max_residual / scale);
    grad = std::max(grad, r.gradient_consistency / scale);
  }
  out.push_back(check("identities.dual_step", prop3, 1e-10));
  out.push_back(check("identities.dual_gradient", grad, 1e-10));
}

void reductions(std::vector<CheckResult> &out) {
  Sampler s(99173);
  double a_zero = 0.0;
  double c_zero_drs = 0.0;
  double c_zero_dys = 0.0;
  double collapse = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(s.pick(8));
    const double gamma = s.uniform(0.05, 3.0);
    const Vector z = s.vector(n, s.uniform(0.1, 5.0));

    const MonotoneOperator b = s.monotone(n);
    const CocoerciveOperator c = s.cocoercive(n, false);
    const StepOutput prop =
        proposed_step(MonotoneOperator::zero(), b, c, gamma, z);
    const StepOutput drs = drs_step(c.as_monotone(), b, gamma, z);
    a_zero = std::max(a_zero, (prop.tz - drs.tz).norm());

    const MonotoneOperator a = s.monotone(n);
    const StepOutput prop_c =
        proposed_step(a, b, CocoerciveOperator::zero(), gamma, z);
    c_zero_drs =
        std::max(c_zero_drs, (prop_c.tz - drs_step(a, b, gamma, z).tz).norm());
    c_zero_dys = std::max(
        c_zero_dys,
        (prop_c.tz - dys_step(a, b, CocoerciveOperator::zero(), gamma, z).tz)
            .norm());

    MultiblockScheme scheme;
    scheme.nonsmooth_first = a;
    scheme.smooth_chain = {c};
    scheme.last = b;
    scheme.gamma = gamma;
    collapse = std::max(collapse, (multiblock_step(scheme, z).z_next -
                                   proposed_step(a, b, c, gamma, z).tz)
                                      .norm());
  }
  out.push_back(check("reductions.a_zero_vs_drs", a_zero, 1e-12));
  out.push_back(check("reductions.c_zero_vs_drs", c_zero_drs, 1e-12));
  out.push_back(check("reductions.c_zero_vs_dys", c_zero_dys, 1e-12));
  out.push_back(check("reductions.multiblock_m3", collapse, 1e-14));
}

void admm_equivalence(std::vector<CheckResult> &out) {
  Sampler s(5151);
  for (Eigen::Index m : {1, 5, 20}) {
    double worst = 0.0;
    double worst_lagged = 0.0;
    for (int variant = 0; variant < 3; ++variant) {
      for (int rep = 0; rep < 3; ++rep) {
        const SeparableProblem p = s.separable(m, variant);
        const EquivalenceReport r =
            equivalence_harness(p, s.uniform(0.3, 2.0), 50);
        worst = std::max(worst, r.max_deviation);
        worst_lagged = std::max(worst_lagged, r.lagged_max_deviation);
      }
    }
    out.push_back(check(fmt::format("admm-equivalence.m{}", m), worst, 1e-8));
    out.push_back(check(fmt::format("admm-equivalence.lagged_forward.m{}", m),
                        worst_lagged, 1e-8));
  }
}

struct RateStats {
  double residual_increase = 0.0;
  double rate_ratio = 0.0;
  double fejer_increase = 0.0;
  double containment_a = 0.0;
  double containment_c = 0.0;
};

void rates(std::vector<CheckResult> &out) {
  RateStats st;
  for (std::uint64_t seed : {7u, 11u}) {
    const BoundProjectionInstance inst = build_figure2_instance(100, seed);
    const SplittingOperators ops = assemble_splitting_operators(inst);
    const Stepper stepper = bind_proposed(ops.a, ops.b, ops.c);
    const double beta = 1.0 / inst.lipschitz();
    for (double gamma : {0.3 * beta, 1.0 * beta, 1.8 * beta}) {
      SplitConfig fine;
      fine.gamma = gamma;
      fine.residual_tol = 1e-14;
      fine.max_iters = 200000;
      const Vector z0 = Vector::Zero(Eigen::Index(inst.n));
      const Vector z_star = km_iterate(stepper, fine, z0).final_z;
      const Vector x_star = stepper(gamma, z_star).x_b;
      const double r0 = (z0 - z_star).norm();

      SplitConfig cfg;
      cfg.gamma = gamma;
      cfg.residual_tol = 0.0;
      cfg.max_iters = 2000;
      std::vector<double> dist;
      const Trace t = km_iterate(
          stepper, cfg, z0, std::nullopt,
          [&](std::size_t, const StepOutput &step) {
            dist.push_back((step.z - z_star).norm());
            st.containment_a =
                std::max(st.containment_a, (step.x_a - x_star).norm() /
                                          ((1.0 + gamma / beta) * r0));
            st.containment_c =
                std::max(st.containment_c, (step.x_c - x_star).norm() /
                                          ((1.0 + 2.0 * gamma / beta) * r0));
          });
      const double tau = relaxation_tau(beta, gamma, 1.0);
      for (std::size_t k = 0; k < t.records.size(); ++k) {
        const double res = t.records[k].residual;
        st.rate_ratio =
            std::max(st.rate_ratio, res * res * double(k + 1) * tau / (r0 * r0));
        if (k > 0) {
          st.residual_increase =
              std::max(st.residual_increase, res - t.records[k - 1].residual);
          st.fejer_increase =
              std::max(st.fejer_increase, dist[k] - dist[k - 1]);
        }
      }
    }
  }
  out.push_back(check("rates.residual_nonincreasing", st.residual_increase,
                      kMonotoneSlack));
  out.push_back(check("rates.residual_rate_bound", st.rate_ratio, 1.0));
  out.push_back(check("rates.fejer", st.fejer_increase, kMonotoneSlack));
  out.push_back(check("rates.containment_x_a", st.containment_a, 1.0));
  out.push_back(check("rates.containment_x_c", st.containment_c, 1.0));

  // objective gap of the dual-form run, scaled by sqrt(k + 1)
  const BoundProjectionInstance inst = build_figure2_instance(100, 7);
  const SplittingOperators ops = assemble_splitting_operators(inst);
  const DualSplitting dual{ops.a, ops.c, ops.b, inst.lipschitz()};
  const std::size_t iters = 10000;
  const auto witnesses = collect_dual_witnesses(
      dual, 1.0 / inst.lipschitz(), Vector::Zero(Eigen::Index(inst.n)), iters);
  const GapTrace gap =
      objective_gap_trace(dual, witnesses, kkt_oracle(inst).x_star);
  // bounded: the final half never exceeds the peak of the first half
  double early_peak = 0.0;
  for (std::size_t k = 0; k < iters / 2; ++k) {
    if (std::isfinite(gap.scaled[k])) {
      early_peak = std::max(early_peak, std::abs(gap.scaled[k]));
    }
  }
  double increase = 0.0;
  double sup = 0.0;
  for (std::size_t k = iters / 2; k < iters; ++k) {
    sup = std::max(sup, std::abs(gap.scaled[k]));
    if (k > iters / 2) {
      increase = std::max(increase, gap.scaled[k] - gap.scaled[k - 1]);
    }
  }
  out.push_back(check("rates.scaled_gap_bounded", sup, early_peak));
  out.push_back(check("rates.scaled_gap_nonincreasing", increase,
                      kMonotoneSlack));
}

} // namespace

std::vector<CheckResult> run_verify_suite(const std::string &suite) {
  std::vector<CheckResult> out;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "identities") {
    identities(out);
    known = true;
  }
  if (all || suite == "reductions") {
    reductions(out);
    known = true;
  }
  if (all || suite == "admm-equivalence") {
    admm_equivalence(out);
    known = true;
  }
  if (all || suite == "rates") {
    rates(out);
    known = true;
  }
  if (!known) {
    throw UsageError(fmt::format("verify: unknown suite '{}' (expected "
                                 "identities, reductions, admm-equivalence, "
                                 "rates or all)",
                                 suite));
  }
  return out;
}

int cmd_verify(const std::string &suite, std::ostream &out) {
  const auto results = run_verify_suite(suite);
  std::vector<std::string> failed;
  for (const auto &r : results) {
    out << fmt::format("{:<36} max={:.3e} limit={:.1e} {}\n", r.name, r.value,
                       r.limit, r.pass ? "ok" : "FAILED");
    if (!r.pass) {
      failed.push_back(r.name);
    }
  }
  if (failed.empty()) {
    out << fmt::format("verify {}: all {} checks passed\n", suite,
                       results.size());
    return 0;
  }
  std::string names;
  for (const auto &f : failed) {
    names += (names.empty() ? "" : ", ") + f;
  }
  out << fmt::format("verify {}: FAILED {}\n", suite, names);
  return 1;
}

} // namespace triplesplit::cli
