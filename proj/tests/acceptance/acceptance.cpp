// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "oracles.hpp"

#include "triplesplit/admm.hpp"
#include "triplesplit/multiblock.hpp"
#include "triplesplit/problems.hpp"
#include "triplesplit/splitting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

using namespace triplesplit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

SplitConfig config(double gamma, std::size_t iters, double tol) {
  SplitConfig c;
  c.gamma = gamma;
  c.max_iters = iters;
  c.residual_tol = tol;
  return c;
}

struct Example {
  BoundProjectionInstance inst;
  SplittingOperators ops;
  Vector x_star;
};

Example example(std::size_t n, std::uint64_t seed) {
  auto inst = build_figure2_instance(n, seed);
  auto ops = assemble_splitting_operators(inst);
  Vector x_star = oracle::bisection_bound_projection(inst.u, inst.lo, inst.hi,
                                                     inst.alpha, inst.b);
  return {std::move(inst), std::move(ops), std::move(x_star)};
}

double min_error(const Trace &t) {
  double best = kInf;
  for (const auto &r : t.records) {
    best = std::min(best, r.error_to_ref.value_or(kInf));
  }
  return best;
}

// -- 1 ---------------------------------------------------------------------------------

Outcome step_size_regimes() {
  const auto start = std::chrono::steady_clock::now();
  const Example e = example(100, 7);
  const double lip = e.inst.lipschitz();
  const Vector z0 = Vector::Zero(100);
  bool ok = true;
  std::string detail;
  for (double c : {0.3, 1.0, 1.8, 20.0, 40.0}) {
    const auto cfg = config(c / lip, 200000, 1e-13);
    const Trace p = km_iterate(bind_proposed(e.ops.a, e.ops.b, e.ops.c), cfg, z0,
                               e.x_star);
    const Trace d = km_iterate(bind_dys(e.ops.a, e.ops.b, e.ops.c), cfg, z0,
                               e.x_star);
    const double ep = min_error(p);
    const double ed = min_error(d);
    const bool large = c > 2.0;
    ok = ok && ep <= 1e-6 && (large ? ed >= 1e-2 : ed <= 1e-6);
    detail += fmt(" %g/L: proposed %.1e (%zu it), dys %.1e (%zu it);", c, ep,
                  p.records.size(), ed, d.records.size());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && secs <= 30.0;
  return {ok, fmt("%.1f s;", secs) + detail};
}

// -- 2 ---------------------------------------------------------------------------------

// Independent membership tests u in Op(x) for the catalog members.
struct Member {
  MonotoneOperator op;
  std::function<double(const Vector &x, const Vector &u)> violation;
};

Member box_member(double lo, double hi) {
  return {MonotoneOperator::box(lo, hi), [lo, hi](const Vector &x, const Vector &u) {
            double v = 0;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              v = std::max({v, lo - x(i), x(i) - hi});
              const bool at_lo = std::abs(x(i) - lo) <= 1e-12;
              const bool at_hi = std::abs(x(i) - hi) <= 1e-12;
              if (!at_lo && !at_hi) {
                v = std::max(v, std::abs(u(i)));
              } else if (at_lo) {
                v = std::max(v, u(i));
              } else {
                v = std::max(v, -u(i));
              }
            }
            return v;
          }};
}

Member affine_member(const Matrix &a, const Vector &b) {
  return {MonotoneOperator::affine(a, b), [a, b](const Vector &x, const Vector &u) {
            // u must lie in range(A^T)
            const Vector y = (a * a.transpose()).fullPivLu().solve(a * u);
            return std::max((a * x - b).norm(), (u - a.transpose() * y).norm());
          }};
}

Member quadratic_member(double alpha, const Vector &c) {
  return {MonotoneOperator::quadratic(alpha, c),
          [alpha, c](const Vector &x, const Vector &u) {
            return (u - alpha * (x - c)).norm();
          }};
}

Member zero_member() {
  return {MonotoneOperator::zero(),
          [](const Vector &, const Vector &u) { return u.norm(); }};
}

struct Smooth {
  CocoerciveOperator op;
  std::function<Vector(const Vector &)> grad;
};

Outcome step_identity_suite() {
  oracle::Rng rng(101);
  double worst = 0;
  double worst_membership = 0;
  const int pairs = 1200;
  for (int trial = 0; trial < pairs; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(rng.index(8));
    const Eigen::Index rows = 1 + Eigen::Index(rng.index(std::size_t(n)));
    const Vector ca = rng.vector(n);
    const Vector cb = rng.vector(n);
    const Matrix l = rng.matrix(n, n);
    const double alpha = rng.uniform(0.2, 3);

    const std::vector<Member> as = {box_member(-1, rng.uniform(0, 2)),
                                    quadratic_member(rng.uniform(0.2, 2), ca),
                                    zero_member()};
    const std::vector<Member> bs = {affine_member(rng.matrix(rows, n), rng.vector(rows)),
                                    quadratic_member(rng.uniform(0.2, 2), cb),
                                    zero_member()};
    const std::vector<Smooth> cs = {
        {CocoerciveOperator::quadratic(alpha, ca),
         [alpha, ca](const Vector &x) -> Vector { return alpha * (x - ca); }},
        {CocoerciveOperator::linear_composite(l, alpha, cb),
         [l, alpha, cb](const Vector &x) -> Vector {
           return alpha * l.transpose() * (l * x - cb);
         }},
        {CocoerciveOperator::zero(),
         [n](const Vector &) -> Vector { return Vector::Zero(n); }}};

    const Member &a = as[rng.index(as.size())];
    const Member &b = bs[rng.index(bs.size())];
    const Smooth &c = cs[rng.index(cs.size())];
    const double gamma = rng.uniform(0.05, 4);
    const Vector z = rng.vector(n, rng.uniform(0.1, 10));

    const StepOutput s = proposed_step(a.op, b.op, c.op, gamma, z);
    const Vector cx = c.grad(s.x_b);
    const Vector u_b = (z - s.x_b) / gamma;
    const Vector u_a = (2 * s.x_b - z - gamma * cx - s.x_a) / gamma;
    const Vector u_c = (s.x_a + gamma * cx - s.x_c) / gamma;
    const double scale = 1 + z.norm();

    const double id1 = std::max(((s.tz - z) - (s.x_c - s.x_b)).norm(),
                                ((s.x_c - s.x_b) + gamma * (u_a + u_b + u_c)).norm());
    const double id2 = (s.tz - (s.x_c + gamma * u_b)).norm();
    worst = std::max(worst, std::max(id1, id2) / scale);

    // the reconstructed pairs must be genuine graph points
    const double mem = std::max({a.violation(s.x_a, u_a), b.violation(s.x_b, u_b),
                                 (u_c - c.grad(s.x_c)).norm()});
    worst_membership = std::max(worst_membership, mem / scale);
  }
  const bool ok = worst <= 1e-10 && worst_membership <= 1e-10;
  return {ok, fmt("%d pairs, identity max %.2e, graph membership max %.2e (limit "
                  "1e-10 (1+||z||))",
                  pairs, worst, worst_membership)};
}

// -- 3 ---------------------------------------------------------------------------------

Vector drs_oracle(const MonotoneOperator &p, const MonotoneOperator &q, double gamma,
                  const Vector &z) {
  const Vector x_q = q.resolvent(gamma, z);
  const Vector x_p = p.resolvent(gamma, 2 * x_q - z);
  return z + x_p - x_q;
}

Outcome reduction_suite() {
  oracle::Rng rng(202);
  double a_zero = 0;
  double c_zero_drs = 0;
  double c_zero_dys = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(rng.index(10));
    const auto b = MonotoneOperator::affine(rng.matrix(1, n), rng.vector(1));
    const auto c = CocoerciveOperator::quadratic(rng.uniform(0.2, 3), rng.vector(n));
    const double gamma = rng.uniform(0.05, 3);
    const Vector z = rng.vector(n, 3);
    a_zero = std::max(a_zero, (proposed_step(MonotoneOperator::zero(), b, c, gamma, z).tz -
                               drs_oracle(c.as_monotone(), b, gamma, z))
                                  .lpNorm<Eigen::Infinity>());
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(rng.index(10));
    const auto a = MonotoneOperator::box(-rng.uniform(0.1, 2), rng.uniform(0.1, 2));
    const auto b = MonotoneOperator::quadratic(rng.uniform(0.2, 3), rng.vector(n));
    const auto zero = CocoerciveOperator::zero();
    const double gamma = rng.uniform(0.05, 3);
    const Vector z = rng.vector(n, 3);
    const Vector tz = proposed_step(a, b, zero, gamma, z).tz;
    c_zero_drs = std::max(c_zero_drs,
                          (tz - drs_oracle(a, b, gamma, z)).lpNorm<Eigen::Infinity>());
    c_zero_dys = std::max(c_zero_dys,
                          (tz - dys_step(a, b, zero, gamma, z).tz).lpNorm<Eigen::Infinity>());
  }
  const bool ok = a_zero <= 1e-12 && c_zero_drs <= 1e-12 && c_zero_dys <= 1e-12;
  return {ok, fmt("A=0 vs DRS %.2e, C=0 vs DRS %.2e, C=0 vs DYS %.2e (limit 1e-12)",
                  a_zero, c_zero_drs, c_zero_dys)};
}

// -- 4, 5 --------------------------------------------------------------------------------

SeparableProblem catalog_problem(oracle::Rng &rng, Eigen::Index m, int variant) {
  SeparableProblem p;
  p.blocks[0] = variant == 1
                    ? Block{BoxBlock{-1.0, 1.0}, Matrix::Identity(m, m)}
                    : Block{QuadraticBlock{rng.uniform(0.5, 2), rng.vector(m + 1)},
                            rng.matrix(m, m + 1)};
  p.blocks[1] = {QuadraticBlock{rng.uniform(0.5, 2), rng.vector(m)}, rng.matrix(m, m)};
  p.blocks[2] = variant == 2
                    ? Block{BoxBlock{-0.5, 0.8}, Matrix::Identity(m, m)}
                    : Block{QuadraticBlock{rng.uniform(0.5, 2), rng.vector(m + 2)},
                            rng.matrix(m, m + 2)};
  p.b = rng.vector(m);
  return p;
}

Outcome admm_equivalence() {
  oracle::Rng rng(303);
  double literal = 0;
  double lagged = 0;
  for (Eigen::Index m : {1, 5, 20}) {
    for (int variant = 0; variant < 3; ++variant) {
      const auto p = catalog_problem(rng, m, variant);
      const auto r = equivalence_harness(p, rng.uniform(0.3, 2), 50);
      literal = std::max(literal, r.max_deviation);
      lagged = std::max(lagged, r.lagged_max_deviation);
    }
  }
  return {literal <= 1e-8,
          fmt("identities with grad d2 at w_d3: max %.2e (limit 1e-8); with grad d2 "
              "at the previous w_d2: max %.2e",
              literal, lagged)};
}

Outcome dual_identities() {
  oracle::Rng rng(404);
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = catalog_problem(rng, 1 + Eigen::Index(rng.index(8)), trial % 3);
    const auto dual = build_dual(p);
    const double gamma = rng.uniform(0.05, 1.95) / dual.d2_lipschitz;
    const Vector z = rng.vector(p.constraint_dim(), rng.uniform(0.1, 10));
    const DualWitness s = dual_step(dual, gamma, z);

    // subgradients reconstructed from the resolvent steps
    const Vector g2 = dual.d2.forward(s.w_d3);
    const Vector v3 = (z - s.w_d3) / gamma;
    const Vector v1 = (2 * s.w_d3 - z - gamma * g2 - s.w_d1) / gamma;
    const Vector v2 = (s.w_d1 + gamma * g2 - s.w_d2) / gamma;
    const double r = std::max(
        {(s.w_d3 - (z - gamma * v3)).norm(),
         ((s.w_d1 - s.w_d3) + gamma * (v1 + g2 + v3)).norm(),
         ((s.w_d2 - s.w_d3) + gamma * (v1 + v2 + v3)).norm(),
         ((s.w_d1 - s.w_d3) - (s.w_d2 - s.w_d3 + gamma * (v2 - g2))).norm(),
         ((s.z_next - z) + gamma * (v1 + v2 + v3)).norm(),
         // v2 must be the gradient of d2 at w_d2, by finite differences
         (v2 - oracle::fd_gradient([&](const Vector &w) { return dual.d2.value(w); },
                                   s.w_d2, 1e-5))
                 .norm() /
             (1e4 * (1 + s.w_d2.norm()))});
    worst = std::max(worst, r / (1 + z.norm()));
  }
  return {worst <= 1e-10,
          fmt("500 dual states, max %.2e (limit 1e-10 (1+||z||))", worst)};
}

// -- 6, 8 -------------------------------------------------------------------------------

struct ReferencePoint {
  Vector z_star;
  Vector x_star;
};

ReferencePoint reference(const Example &e, double gamma) {
  const Trace t = km_iterate(bind_proposed(e.ops.a, e.ops.b, e.ops.c),
                             config(gamma, 1000000, 1e-14), Vector::Zero(Eigen::Index(e.inst.n)));
  return {t.final_z, e.ops.b.resolvent(gamma, t.final_z)};
}

Outcome km_diagnostics() {
  bool ok = true;
  double worst_res = 0;
  double worst_ratio = 0;
  double worst_fejer = 0;
  for (std::uint64_t seed : {7u, 11u, 19u}) {
    const Example e = example(100, seed);
    const double beta = 1.0 / e.inst.lipschitz();
    for (double c : {0.3, 1.0, 1.8}) {
      const double gamma = c * beta;
      const auto ref = reference(e, gamma);
      ok = ok && (ref.x_star - e.x_star).norm() <= 1e-8;
      const Vector z0 = e.inst.u;
      const double r0 = (z0 - ref.z_star).norm();
      const double tau = oracle::tau_factor(beta, gamma, 1.0);
      double prev_res = kInf;
      double prev_dist = kInf;
      km_iterate(bind_proposed(e.ops.a, e.ops.b, e.ops.c), config(gamma, 3000, 0), z0,
                 {}, [&](std::size_t k, const StepOutput &s) {
                   const double res = (s.tz - s.z).norm();
                   const double dist = (s.z - ref.z_star).norm();
                   if (k > 0) {
                     worst_res = std::max(worst_res, res - prev_res);
                     worst_fejer = std::max(worst_fejer, dist - prev_dist);
                   }
                   worst_ratio =
                       std::max(worst_ratio, res * res * double(k + 1) * tau / (r0 * r0));
                   prev_res = res;
                   prev_dist = dist;
                 });
    }
  }
  ok = ok && worst_res <= 1e-12 && worst_ratio <= 1.0 && worst_fejer <= 1e-12;
  return {ok, fmt("max residual increase %.2e, max res^2 (k+1) tau/||z0-z*||^2 = %.3f, "
                  "max distance increase %.2e",
                  worst_res, worst_ratio, worst_fejer)};
}

Outcome containment() {
  bool ok = true;
  double worst_a = 0;
  double worst_c = 0;
  for (std::uint64_t seed : {7u, 11u, 19u}) {
    const Example e = example(100, seed);
    const double beta = 1.0 / e.inst.lipschitz();
    for (double c : {0.3, 1.0, 1.8}) {
      const double gamma = c * beta;
      const auto ref = reference(e, gamma);
      const Vector z0 = Vector::Constant(100, 2.0);
      const double r0 = (z0 - ref.z_star).norm();
      km_iterate(bind_proposed(e.ops.a, e.ops.b, e.ops.c), config(gamma, 3000, 0), z0,
                 {}, [&](std::size_t, const StepOutput &s) {
                   worst_a = std::max(worst_a, (s.x_a - e.x_star).norm() /
                                                   ((1 + gamma / beta) * r0));
                   worst_c = std::max(worst_c, (s.x_c - e.x_star).norm() /
                                                   ((1 + 2 * gamma / beta) * r0));
                 });
    }
  }
  ok = worst_a <= 1.0 && worst_c <= 1.0;
  return {ok, fmt("max ||x_A - x*|| / bound = %.3f, max ||x_C - x*|| / bound = %.3f",
                  worst_a, worst_c)};
}

// -- 7 ---------------------------------------------------------------------------------

Outcome gap_trend() {
  const Example e = example(100, 7);
  const DualSplitting dual{e.ops.a, e.ops.c, e.ops.b, e.inst.lipschitz()};
  const std::size_t iters = 10000;
  const auto ws = collect_dual_witnesses(dual, 1.0 / e.inst.lipschitz(),
                                         Vector::Zero(100), iters);
  const double f_star = 0.5 * e.inst.alpha * (e.x_star - e.inst.u).squaredNorm();
  std::vector<double> scaled(iters);
  for (std::size_t k = 0; k < iters; ++k) {
    const Vector &w = ws[k].w_d3;
    const bool feasible = w.maxCoeff() <= e.inst.hi + 1e-9 &&
                          w.minCoeff() >= e.inst.lo - 1e-9 &&
                          std::abs(w.sum() - e.inst.b) <= 1e-9;
    const double gap =
        feasible ? 0.5 * e.inst.alpha * (w - e.inst.u).squaredNorm() - f_star : kInf;
    scaled[k] = gap * std::sqrt(double(k + 1));
  }
  double early_peak = 0;
  for (std::size_t k = 0; k < iters / 2; ++k) {
    if (std::isfinite(scaled[k])) {
      early_peak = std::max(early_peak, std::abs(scaled[k]));
    }
  }
  double sup = 0;
  double increase = 0;
  for (std::size_t k = iters / 2; k < iters; ++k) {
    sup = std::max(sup, std::abs(scaled[k]));
    if (k > iters / 2) {
      increase = std::max(increase, scaled[k] - scaled[k - 1]);
    }
  }
  const bool ok = std::isfinite(sup) && sup <= early_peak && increase <= 1e-12;
  return {ok, fmt("final-half sup %.2e (first-half peak %.2e), max increase %.2e",
                  sup, early_peak, increase)};
}

// -- 9 ---------------------------------------------------------------------------------

Outcome multiblock_collapse() {
  oracle::Rng rng(505);
  double collapse = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(rng.index(10));
    MultiblockScheme s;
    s.nonsmooth_first = MonotoneOperator::box(-1, 1);
    s.smooth_chain = {CocoerciveOperator::quadratic(rng.uniform(0.2, 3), rng.vector(n))};
    s.last = MonotoneOperator::affine(rng.matrix(1, n), rng.vector(1));
    s.gamma = rng.uniform(0.05, 5);
    const Vector z = rng.vector(n, 3);
    collapse = std::max(
        collapse, (multiblock_step(s, z).z_next -
                   proposed_step(s.nonsmooth_first, s.last, s.smooth_chain[0], s.gamma, z).tz)
                      .lpNorm<Eigen::Infinity>());
  }

  std::vector<double> alpha;
  std::vector<Vector> centers;
  for (int i = 0; i < 4; ++i) {
    alpha.push_back(rng.uniform(0.3, 2));
    centers.push_back(rng.vector(6, 2));
  }
  MultiblockScheme s;
  s.nonsmooth_first = MonotoneOperator::quadratic(alpha[0], centers[0]);
  s.smooth_chain = {CocoerciveOperator::quadratic(alpha[1], centers[1]),
                    CocoerciveOperator::quadratic(alpha[2], centers[2])};
  s.last = MonotoneOperator::quadratic(alpha[3], centers[3]);
  s.gamma = 1.0 / (alpha[1] + alpha[2]);
  const Trace t =
      km_iterate(bind_multiblock(s), config(s.gamma, 200000, 1e-13), Vector::Zero(6));
  const double err = (t.solution - oracle::weighted_mean(alpha, centers))
                         .lpNorm<Eigen::Infinity>();
  return {collapse <= 1e-14 && err <= 1e-8,
          fmt("m=3 vs proposed %.2e (limit 1e-14); m=4 distance to weighted mean "
              "%.2e (limit 1e-8, %s)",
              collapse, err, to_string(t.status))};
}

// -- 10 --------------------------------------------------------------------------------

Outcome kkt_self_consistency() {
  oracle::Rng rng(606);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(rng.index(80));
    BoundProjectionInstance inst;
    inst.n = std::size_t(n);
    inst.lo = -rng.uniform(0.1, 2);
    inst.hi = rng.uniform(0.1, 2);
    inst.alpha = rng.uniform(0.2, 4);
    inst.u = rng.vector(n, 2);
    inst.b = rng.uniform(0.98 * n * inst.lo, 0.98 * n * inst.hi);
    const KktCertificate c = kkt_oracle(inst);
    const Vector &x = c.x_star;
    double v = std::abs(x.sum() - inst.b);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ml = c.lower_multipliers(i);
      const double mh = c.upper_multipliers(i);
      v = std::max({v, inst.lo - x(i), x(i) - inst.hi, -ml, -mh,
                    std::abs(inst.alpha * (x(i) - inst.u(i)) - c.multiplier - ml + mh),
                    std::abs(ml * (x(i) - inst.lo)), std::abs(mh * (inst.hi - x(i)))});
    }
    worst = std::max(worst, v);
  }

  double brute = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + trial % 3;
    const double lo = -rng.uniform(0.2, 2);
    const double hi = rng.uniform(0.2, 2);
    BoundProjectionInstance inst;
    inst.n = std::size_t(n);
    inst.lo = lo;
    inst.hi = hi;
    inst.alpha = rng.uniform(0.2, 4);
    inst.u = rng.vector(n, 2);
    inst.b = rng.uniform(0.95 * n * lo, 0.95 * n * hi);
    brute = std::max(brute, (kkt_oracle(inst).x_star -
                             oracle::brute_force_bound_projection(inst.u, lo, hi,
                                                                  inst.alpha, inst.b))
                                .lpNorm<Eigen::Infinity>());
  }
  return {worst <= 1e-10 && brute <= 1e-6,
          fmt("certificate max violation %.2e over 200 instances (limit 1e-10); "
              "brute force n<=3 max difference %.2e (limit 1e-6)",
              worst, brute)};
}

} // namespace

int main() {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"step-size regimes on the bound-projection example", step_size_regimes},
      {"step identities over the operator catalog", step_identity_suite},
      {"reductions to Douglas-Rachford and Davis-Yin", reduction_suite},
      {"ADMM and dual splitting in lockstep", admm_equivalence},
      {"dual step identities", dual_identities},
      {"residual, rate and distance diagnostics", km_diagnostics},
      {"scaled objective gap trend", gap_trend},
      {"ball containment of x_A and x_C", containment},
      {"multiblock collapse and four-block limit", multiblock_collapse},
      {"KKT oracle self-consistency", kkt_self_consistency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
