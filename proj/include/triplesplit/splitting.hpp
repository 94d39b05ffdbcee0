#pragma once

// Splitting maps for 0 in (A + B + C)x and the relaxed fixed-point driver.
//
// Every stepper evaluates one application of its map T at z and keeps all
// intermediate points:
//
//   x_B = J_{gB}(z)
//   x_A = J_{gA}(2 x_B - z - g C x_B)
//   x_C = J_{gC}(x_A + g C x_B)        (proposed only; x_C = x_A for DYS)
//   Tz  = z + x_C - x_B
//
// Solutions are recovered as x* = J_{gB}(z*) for a fixed point z*.

#include "triplesplit/operators.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace triplesplit {

struct StepOutput {
  Vector z;
  Vector x_b;
  Vector x_a;
  Vector x_c;
  Vector tz;
  Vector c_at_xb;
};

StepOutput proposed_step(const MonotoneOperator &a, const MonotoneOperator &b,
                         const CocoerciveOperator &c, double gamma,
                         const Vector &z);

/// Davis-Yin: no third resolvent, x_C = x_A.
StepOutput dys_step(const MonotoneOperator &a, const MonotoneOperator &b,
                    const CocoerciveOperator &c, double gamma, const Vector &z);

/// Douglas-Rachford: x_B = J_{gQ}(z), x_A = J_{gP}(2 x_B - z).
StepOutput drs_step(const MonotoneOperator &p, const MonotoneOperator &q,
                    double gamma, const Vector &z);

/// The B = 0 member of the proposed family:
/// T = J_{gC} o (J_{gA} o (I - gC) + gC).
StepOutput fbs_variant_step(const MonotoneOperator &a,
                            const CocoerciveOperator &c, double gamma,
                            const Vector &z);

/// A stepper bound to its operators; gamma is supplied by the driver.
using Stepper = std::function<StepOutput(double gamma, const Vector &z)>;

Stepper bind_proposed(MonotoneOperator a, MonotoneOperator b,
                      CocoerciveOperator c);
Stepper bind_dys(MonotoneOperator a, MonotoneOperator b, CocoerciveOperator c);
Stepper bind_drs(MonotoneOperator p, MonotoneOperator q);
Stepper bind_fbs_variant(MonotoneOperator a, CocoerciveOperator c);

// -- relaxed fixed-point iteration ------------------------------------------

using LambdaSchedule = std::function<double(std::size_t k)>;

LambdaSchedule constant_lambda(double lambda);

/// a = 2 beta / (4 beta - gamma), the averagedness constant assumed for T.
double averagedness_constant(double beta, double gamma);

/// Upper end of the admissible relaxation range, (4 beta - gamma) / (2 beta).
double max_relaxation(double beta, double gamma);

/// tau = lambda (1 - a lambda) / a for constant relaxation lambda.
double relaxation_tau(double beta, double gamma, double lambda);

struct SplitConfig {
  double gamma = 1.0;
  LambdaSchedule lambda = constant_lambda(1.0);
  std::size_t max_iters = 10000;
  double residual_tol = 1e-10;
  double divergence_threshold = 1e12;

  /// In strict mode gamma must lie in (0, 2 beta] and every lambda_k in
  /// (0, (4 beta - gamma) / (2 beta)); `beta` is then required.
  bool strict = false;
  std::optional<double> beta;

  /// Throws InvalidConfigError. Relaxation values are checked for
  /// k < min(max_iters, 1000).
  void validate() const;
};

enum class TraceStatus { Converged, MaxIters, Diverged };

const char *to_string(TraceStatus status);

struct TraceRecord {
  std::size_t k = 0;
  double residual = 0.0;
  std::optional<double> error_to_ref;
  double z_norm = 0.0;
};

struct Trace {
  std::vector<TraceRecord> records;
  TraceStatus status = TraceStatus::MaxIters;
  /// Governing point of the last evaluated step.
  Vector final_z;
  /// x_B of the last evaluated step (empty if none was evaluated).
  Vector solution;
  std::string message;
};

/// Called once per evaluated step, before the relaxation update.
using StepObserver = std::function<void(std::size_t k, const StepOutput &)>;

/// z^{k+1} = z^k + lambda_k (T z^k - z^k) until the residual ||Tz - z|| drops
/// to the tolerance, the iteration cap is hit, or ||z|| leaves the
/// divergence threshold. A NumericalBlowupError from the stepper ends the
/// run with status Diverged and the trace intact.
Trace km_iterate(const Stepper &stepper, const SplitConfig &config,
                 const Vector &z0, const std::optional<Vector> &reference = {},
                 const StepObserver &observer = {});

// -- diagnostics --------------------------------------------------------------

struct Lemma1Report {
  /// max(||(Tz - z) - (x_C - x_B)||, ||(x_C - x_B) + g (u_A + u_B + u_C)||)
  double sum_identity = 0.0;
  /// ||Tz - (x_C + g u_B)||
  double tz_identity = 0.0;
  double max_violation = 0.0;
  /// How far the reconstructed (x, u) pairs are from the graphs of A and B,
  /// measured as ||J(x + g u) - x||.
  double membership_violation = 0.0;
};

Lemma1Report lemma1_diagnostics(const StepOutput &step,
                                 const MonotoneOperator &a,
                                 const MonotoneOperator &b,
                                 const CocoerciveOperator &c, double gamma);

Vector solution_from_fixed_point(const Vector &z_star,
                                 const MonotoneOperator &b, double gamma);

struct SolutionCertificate {
  Vector x;
  /// ||u_A + u_B + C x|| with u_B = (z - x)/g and u_A reconstructed from the
  /// A-resolvent at 2x - z - g C x.
  double inclusion_residual = 0.0;
  /// ||x_A - x||: the A-resolvent must return x at an exact fixed point.
  double consistency = 0.0;
};

SolutionCertificate certify_fixed_point(const Vector &z_star,
                                        const MonotoneOperator &a,
                                        const MonotoneOperator &b,
                                        const CocoerciveOperator &c,
                                        double gamma);

struct RateReport {
  /// Residuals nonincreasing up to an absolute slack of 1e-12.
  bool residual_monotone = true;
  /// max_k residual_k^2 (k + 1)
  double sup_scaled_residual = 0.0;
  /// log-log slope of residual vs (k + 1) over the final half of the trace.
  /// Empty when fewer than two positive residuals are available.
  std::optional<double> tail_slope;
};

inline constexpr double kMonotoneSlack = 1e-12;

RateReport rate_report(const Trace &trace);

} // namespace triplesplit
