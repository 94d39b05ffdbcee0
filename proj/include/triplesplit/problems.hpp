#pragma once

// Benchmark instances:
//
//   * bound projection   min alpha/2 ||x - u||^2  s.t.  lo <= x_i <= hi,
//                                                      sum_i x_i = b
//     with an exact KKT oracle (root-finding on the scalar multiplier);
//   * composite          min f(x) + g(L x) + h(x) with quadratic f, g, h
//     and a square L, solved by a dense stationarity system.

#include "triplesplit/splitting.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace triplesplit {

/// Seeded N(0, 1) stream: std::mt19937_64 (whose output sequence is fixed by
/// the standard) feeding a Box-Muller transform with 53-bit uniforms, so the
/// same seed yields the same draws on every platform.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next();

private:
  double uniform();

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

struct BoundProjectionInstance {
  std::size_t n = 0;
  double lo = -1.0;
  double hi = 1.0;
  double alpha = 1.0;
  Vector u;
  double b = 0.0;
  std::uint64_t seed = 0;

  /// Throws InvalidBoundsError / InvalidConfigError / DimensionMismatchError.
  void validate() const;
  /// 1 x n row of ones
  Matrix constraint_matrix() const;
  /// Lipschitz constant of the quadratic's gradient (= alpha).
  double lipschitz() const noexcept { return alpha; }
  double objective(const Vector &x) const;
};

struct Figure2Options {
  double lo = -1.0;
  double hi = 1.0;
  double alpha = 1.0;
  double noise = 0.8;
};

/// u_i = sin(2 pi i / n) + noise * N(0, 1), i = 1 .. n; b = sum_i u_i.
BoundProjectionInstance build_figure2_instance(std::size_t n,
                                               std::uint64_t seed,
                                               const Figure2Options &opts = {});

struct KktCertificate {
  Vector x_star;
  /// Multiplier t of the equality constraint: x_i = clamp(u_i + t / alpha).
  double multiplier = 0.0;
  std::vector<std::size_t> active_lower;
  std::vector<std::size_t> active_upper;
  /// Bound multipliers (zero off the active sets).
  Vector lower_multipliers;
  Vector upper_multipliers;
};

/// sum_i clamp(u_i + t / alpha, lo, hi)
double clamped_sum(const BoundProjectionInstance &inst, double t);

/// Exact minimizer. Throws InfeasibleInstanceError when b lies outside
/// [n lo, n hi].
KktCertificate kkt_oracle(const BoundProjectionInstance &inst);

struct CertificateCheck {
  double box_violation = 0.0;
  double equality_violation = 0.0;
  double stationarity = 0.0;
  /// most negative bound multiplier, reported as a positive violation
  double dual_violation = 0.0;
  double complementarity = 0.0;

  double max() const;
};

CertificateCheck check_certificate(const BoundProjectionInstance &inst,
                                   const KktCertificate &cert);

struct SplittingOperators {
  MonotoneOperator a;   // box indicator
  MonotoneOperator b;   // affine normal cone
  CocoerciveOperator c; // quadratic gradient, beta = 1 / alpha
};

SplittingOperators assemble_splitting_operators(
    const BoundProjectionInstance &inst);

/// Sign convention of the explicit bound-projection iteration.
enum class ForwardSign {
  /// p = clamp(2x - z - g alpha (x - u)); x+ = prox_f(p + g alpha (x - u))
  Splitting,
  /// p = clamp(2x - z + g alpha (x - u)); x+ = prox_f(p), the printed
  /// closed-form variant. Does not converge to the minimizer; kept for
  /// comparison.
  Printed,
};

enum class ExplicitScheme { Proposed, DavisYin };

/// Closed-form update for the bound-projection instance written out
/// coordinate by coordinate, independent of the operator handles.
StepOutput explicit_bound_projection_step(const BoundProjectionInstance &inst,
                                          ExplicitScheme scheme,
                                          ForwardSign sign, double gamma,
                                          const Vector &z);

/// Plain-text instance format: a header line "n lo hi alpha b seed"
/// followed by the n entries of u, one per line, all printed with 17
/// significant digits so the file round-trips exactly.
void write_instance(std::ostream &os, const BoundProjectionInstance &inst);
BoundProjectionInstance read_instance(std::istream &is);

// -- composite instance ------------------------------------------------------

/// min f(x) + g(L x) + h(x) with
///   f = alpha_f/2 ||x - u_f||^2,  g = alpha_g/2 ||y - u_g||^2,
///   h = alpha_h/2 ||x - u_h||^2,  L square.
struct CompositeInstance {
  Matrix l;
  double alpha_f = 1.0;
  double alpha_g = 1.0;
  double alpha_h = 1.0;
  Vector u_f;
  Vector u_g;
  Vector u_h;

  Eigen::Index dim() const noexcept { return l.cols(); }

  MonotoneOperator f_operator() const;
  MonotoneOperator h_operator() const;
  /// L^T grad g(L .), resolvent through the cached eigendecomposition.
  CocoerciveOperator composite_operator() const;

  Vector grad_g(const Vector &y) const;
  Vector prox_g(double gamma, const Vector &v) const;

  /// alpha_g ||L||^2
  double lipschitz() const;
  /// Admissible steps are (0, 2 beta) with beta = 1 / lipschitz().
  double step_bound() const;
  double objective(const Vector &x) const;
  /// Solution of the stationarity system
  /// (alpha_f + alpha_h) x + alpha_g L^T L x = alpha_f u_f + alpha_h u_h
  ///                                           + alpha_g L^T u_g.
  Vector minimizer() const;
};

/// Random centers from NormalStream(seed); weights all one. Throws
/// DimensionMismatchError if L is not n x n.
CompositeInstance build_algo5_instance(std::size_t n, const Matrix &l,
                                       std::uint64_t seed);

/// One step in the composite order: x = prox_h(z), y = L x,
/// p = prox_f(2x - z - g L^T grad g(y)),
/// v = J_{g L^T grad g L}(p + g L^T grad g(y)), Tz = z + v - x.
/// For L = I the last resolvent is prox_g.
StepOutput composite_step(const CompositeInstance &inst, double gamma,
                          const Vector &z);

Stepper bind_composite(CompositeInstance inst);

} // namespace triplesplit
