#include "triplesplit/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace triplesplit {

namespace {

void check_finite(const Vector &v, const char *name, const Vector &z) {
  if (!v.allFinite()) {
    throw NumericalBlowupError(std::string("non-finite ") + name, z);
  }
}

void check_step(const StepOutput &s) {
  check_finite(s.x_b, "x_B", s.z);
  check_finite(s.c_at_xb, "C(x_B)", s.z);
  check_finite(s.x_a, "x_A", s.z);
  check_finite(s.x_c, "x_C", s.z);
  check_finite(s.tz, "Tz", s.z);
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidConfigError("step size must be positive and finite");
  }
}

} // namespace

StepOutput proposed_step(const MonotoneOperator &a, const MonotoneOperator &b,
                         const CocoerciveOperator &c, double gamma,
                         const Vector &z) {
  check_gamma(gamma);
  StepOutput s;
  s.z = z;
  s.x_b = b.resolvent(gamma, z);
  s.c_at_xb = c.forward(s.x_b);
  s.x_a = a.resolvent(gamma, 2.0 * s.x_b - z - gamma * s.c_at_xb);
  s.x_c = c.resolvent(gamma, s.x_a + gamma * s.c_at_xb);
  s.tz = z + s.x_c - s.x_b;
  check_step(s);
  return s;
}

StepOutput dys_step(const MonotoneOperator &a, const MonotoneOperator &b,
                    const CocoerciveOperator &c, double gamma,
                    const Vector &z) {
  check_gamma(gamma);
  StepOutput s;
  s.z = z;
  s.x_b = b.resolvent(gamma, z);
  s.c_at_xb = c.forward(s.x_b);
  s.x_a = a.resolvent(gamma, 2.0 * s.x_b - z - gamma * s.c_at_xb);
  s.x_c = s.x_a;
  s.tz = z + s.x_a - s.x_b;
  check_step(s);
  return s;
}

StepOutput drs_step(const MonotoneOperator &p, const MonotoneOperator &q,
                    double gamma, const Vector &z) {
  check_gamma(gamma);
  StepOutput s;
  s.z = z;
  s.x_b = q.resolvent(gamma, z);
  s.c_at_xb = Vector::Zero(z.size());
  s.x_a = p.resolvent(gamma, 2.0 * s.x_b - z);
  s.x_c = s.x_a;
  s.tz = z + s.x_a - s.x_b;
  check_step(s);
  return s;
}

StepOutput fbs_variant_step(const MonotoneOperator &a,
                            const CocoerciveOperator &c, double gamma,
                            const Vector &z) {
  check_gamma(gamma);
  StepOutput s;
  s.z = z;
  s.x_b = z;
  s.c_at_xb = c.forward(z);
  s.x_a = a.resolvent(gamma, z - gamma * s.c_at_xb);
  s.x_c = c.resolvent(gamma, s.x_a + gamma * s.c_at_xb);
  s.tz = s.x_c;
  check_step(s);
  return s;
}

Stepper bind_proposed(MonotoneOperator a, MonotoneOperator b,
                      CocoerciveOperator c) {
  return [a = std::move(a), b = std::move(b),
          c = std::move(c)](double gamma, const Vector &z) {
    return proposed_step(a, b, c, gamma, z);
  };
}

Stepper bind_dys(MonotoneOperator a, MonotoneOperator b, CocoerciveOperator c) {
  return [a = std::move(a), b = std::move(b),
          c = std::move(c)](double gamma, const Vector &z) {
    return dys_step(a, b, c, gamma, z);
  };
}

Stepper bind_drs(MonotoneOperator p, MonotoneOperator q) {
  return [p = std::move(p), q = std::move(q)](double gamma, const Vector &z) {
    return drs_step(p, q, gamma, z);
  };
}

Stepper bind_fbs_variant(MonotoneOperator a, CocoerciveOperator c) {
  return [a = std::move(a), c = std::move(c)](double gamma, const Vector &z) {
    return fbs_variant_step(a, c, gamma, z);
  };
}

LambdaSchedule constant_lambda(double lambda) {
  return [lambda](std::size_t) { return lambda; };
}

double averagedness_constant(double beta, double gamma) {
  return 2.0 * beta / (4.0 * beta - gamma);
}

double max_relaxation(double beta, double gamma) {
  return (4.0 * beta - gamma) / (2.0 * beta);
}

double relaxation_tau(double beta, double gamma, double lambda) {
  const double a = averagedness_constant(beta, gamma);
  return lambda * (1.0 - a * lambda) / a;
}

void SplitConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidConfigError("gamma must be positive and finite");
  }
  if (!lambda) {
    throw InvalidConfigError("relaxation schedule is empty");
  }
  if (max_iters == 0) {
    throw InvalidConfigError("max_iters must be positive");
  }
  if (!(residual_tol >= 0.0)) {
    throw InvalidConfigError("residual tolerance must be nonnegative");
  }
  if (!(divergence_threshold > 0.0)) {
    throw InvalidConfigError("divergence threshold must be positive");
  }
  double upper = 2.0;
  if (strict) {
    if (!beta || !(*beta > 0.0)) {
      throw InvalidConfigError("strict mode needs the cocoercivity beta");
    }
    if (std::isfinite(*beta)) {
      if (gamma > 2.0 * *beta) {
        throw InvalidConfigError("strict mode: gamma exceeds 2 beta");
      }
      upper = max_relaxation(*beta, gamma);
    }
  }
  const std::size_t checked = std::min<std::size_t>(max_iters, 1000);
  for (std::size_t k = 0; k < checked; ++k) {
    const double l = lambda(k);
    if (!(l > 0.0) || !(l < upper)) {
      throw InvalidConfigError("relaxation lambda_" + std::to_string(k) +
                               " = " + std::to_string(l) + " outside (0, " +
                               std::to_string(upper) + ")");
    }
  }
}

const char *to_string(TraceStatus status) {
  switch (status) {
  case TraceStatus::Converged:
    return "Converged";
  case TraceStatus::MaxIters:
    return "MaxIters";
  case TraceStatus::Diverged:
    return "Diverged";
  }
  return "Unknown";
}

Trace km_iterate(const Stepper &stepper, const SplitConfig &config,
                 const Vector &z0, const std::optional<Vector> &reference,
                 const StepObserver &observer) {
  config.validate();
  if (!z0.allFinite()) {
    throw InvalidConfigError("initial point has non-finite entries");
  }
  if (reference && reference->size() != z0.size()) {
    throw DimensionMismatchError("reference point dimension differs from z0");
  }

  Trace trace;
  trace.records.reserve(std::min<std::size_t>(config.max_iters, 1u << 20));
  Vector z = z0;
  for (std::size_t k = 0; k < config.max_iters; ++k) {
    StepOutput step;
    try {
      step = stepper(config.gamma, z);
    } catch (const NumericalBlowupError &e) {
      trace.status = TraceStatus::Diverged;
      trace.final_z = e.iterate();
      trace.message = e.what();
      return trace;
    }
    if (observer) {
      observer(k, step);
    }

    TraceRecord rec;
    rec.k = k;
    rec.residual = (step.tz - z).norm();
    rec.z_norm = z.norm();
    if (reference) {
      rec.error_to_ref = (step.x_b - *reference).norm();
    }
    trace.records.push_back(rec);
    trace.final_z = z;
    trace.solution = step.x_b;

    if (rec.residual <= config.residual_tol) {
      trace.status = TraceStatus::Converged;
      return trace;
    }

    z += config.lambda(k) * (step.tz - z);
    if (!z.allFinite() || z.norm() > config.divergence_threshold) {
      trace.status = TraceStatus::Diverged;
      trace.message = "iterate left the divergence threshold";
      return trace;
    }
  }
  trace.status = TraceStatus::MaxIters;
  return trace;
}

Lemma1Report lemma1_diagnostics(const StepOutput &step,
                                 const MonotoneOperator &a,
                                 const MonotoneOperator &b,
                                 const CocoerciveOperator &c, double gamma) {
  const Vector cx = c.forward(step.x_b);
  const Vector a_input = 2.0 * step.x_b - step.z - gamma * cx;
  const Vector u_b = (step.z - step.x_b) / gamma;
  const Vector u_a = (a_input - step.x_a) / gamma;
  const Vector u_c = (step.x_a + gamma * cx - step.x_c) / gamma;

  Lemma1Report r;
  const Vector diff = step.tz - step.z;
  const Vector gap = step.x_c - step.x_b;
  r.sum_identity = std::max((diff - gap).norm(),
                            (gap + gamma * (u_a + u_b + u_c)).norm());
  r.tz_identity = (step.tz - (step.x_c + gamma * u_b)).norm();
  r.max_violation = std::max(r.sum_identity, r.tz_identity);
  r.membership_violation =
      std::max((b.resolvent(gamma, step.x_b + gamma * u_b) - step.x_b).norm(),
               (a.resolvent(gamma, step.x_a + gamma * u_a) - step.x_a).norm());
  return r;
}

Vector solution_from_fixed_point(const Vector &z_star,
                                 const MonotoneOperator &b, double gamma) {
  return b.resolvent(gamma, z_star);
}

SolutionCertificate certify_fixed_point(const Vector &z_star,
                                        const MonotoneOperator &a,
                                        const MonotoneOperator &b,
                                        const CocoerciveOperator &c,
                                        double gamma) {
  SolutionCertificate cert;
  cert.x = solution_from_fixed_point(z_star, b, gamma);
  const Vector cx = c.forward(cert.x);
  const Vector a_input = 2.0 * cert.x - z_star - gamma * cx;
  const Vector x_a = a.resolvent(gamma, a_input);
  const Vector u_b = (z_star - cert.x) / gamma;
  const Vector u_a = (a_input - x_a) / gamma;
  cert.inclusion_residual = (u_a + u_b + cx).norm();
  cert.consistency = (x_a - cert.x).norm();
  return cert;
}

RateReport rate_report(const Trace &trace) {
  RateReport r;
  const auto &rec = trace.records;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double res = rec[i].residual;
    r.sup_scaled_residual =
        std::max(r.sup_scaled_residual, res * res * double(rec[i].k + 1));
    if (i > 0 && res > rec[i - 1].residual + kMonotoneSlack) {
      r.residual_monotone = false;
    }
  }

  // Least-squares fit of log(residual) against log(k + 1).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t i = rec.size() / 2; i < rec.size(); ++i) {
    if (!(rec[i].residual > 0.0)) {
      continue;
    }
    const double x = std::log(double(rec[i].k + 1));
    const double y = std::log(rec[i].residual);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double denom = double(count) * sxx - sx * sx;
  if (count >= 2 && denom > 0.0) {
    r.tail_slope = (double(count) * sxy - sx * sy) / denom;
  }
  return r;
}

} // namespace triplesplit
