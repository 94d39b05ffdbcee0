#pragma once

// Resolvent / proximal toolbox.
//
// Set-valued operators are never materialized: a MonotoneOperator is its
// resolvent J_{gamma A} = (I + gamma A)^{-1}, plus an optional function value
// when the operator is the subdifferential of a known convex function.
// Single-valued cocoercive operators additionally expose a forward oracle and
// their cocoercivity parameter beta.

#include "triplesplit/errors.hpp"

#include <functional>
#include <limits>
#include <memory>

namespace triplesplit {

/// Relative feasibility slack used when an indicator function is evaluated.
/// Points within this distance of the set count as feasible (value 0).
inline constexpr double kIndicatorFeasibilityTol = 1e-9;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// -- closed-form oracles ----------------------------------------------------

/// Componentwise clamp onto [lo, hi]. Independent of gamma.
/// Throws InvalidBoundsError unless lo < hi.
Vector prox_box(double lo, double hi, double gamma, const Vector &v);

/// Euclidean projection onto {x : A x = b}.
///
/// The Cholesky factor of A A^T is computed once at construction, so
/// repeated projections cost two triangular solves. A must have full row
/// rank; otherwise construction throws SingularOperatorError.
class AffineProjector {
public:
  AffineProjector(Matrix a, Vector b);

  Vector project(const Vector &v) const;

  const Matrix &matrix() const noexcept { return a_; }
  const Vector &rhs() const noexcept { return b_; }
  Eigen::Index dim() const noexcept { return a_.cols(); }

  /// ||A x - b||
  double violation(const Vector &x) const;

private:
  Matrix a_;
  Vector b_;
  Eigen::LLT<Matrix> gram_;
};

Vector prox_affine(const Matrix &a, const Vector &b, const Vector &v);

/// prox of f(x) = alpha/2 ||x - u||^2 with step gamma.
Vector prox_quadratic(double alpha, const Vector &u, double gamma,
                      const Vector &v);

/// alpha (x - u)
Vector grad_quadratic(double alpha, const Vector &u, const Vector &x);

/// Resolvent of gamma * L^T grad g(L .) for g(y) = alpha/2 ||y - u||^2, i.e.
/// the solution of (I + gamma alpha L^T L) x = v + gamma alpha L^T u.
///
/// The symmetric eigendecomposition of L^T L is computed once, so the
/// resolvent is available for any gamma without refactorizing.
class LinearCompositeResolvent {
public:
  LinearCompositeResolvent(Matrix l, double alpha, Vector u);

  Vector apply(double gamma, const Vector &v) const;
  Vector gradient(const Vector &x) const;
  double value(const Vector &x) const;

  /// alpha * ||L||_2^2
  double lipschitz() const noexcept { return lipschitz_; }
  const Matrix &matrix() const noexcept { return l_; }

private:
  Matrix l_;
  double alpha_;
  Vector u_;
  Matrix basis_;
  Vector spectrum_;
  double lipschitz_;
};

Vector resolvent_linear_composite(const Matrix &l, double alpha,
                                  const Vector &u, double gamma,
                                  const Vector &v);

// -- operator handles -------------------------------------------------------

enum class OperatorKind {
  Zero,
  BoxIndicatorSubdifferential,
  AffineSubspaceNormalCone,
  QuadraticGradient,
  LinearCompositeGradient,
  Custom,
};

const char *to_string(OperatorKind kind);

/// Maximal monotone operator accessed only through its resolvent.
///
/// Handles are cheap to copy and immutable; the oracles they wrap are pure
/// and safe to call from several threads.
class MonotoneOperator {
public:
  using ResolventFn = std::function<Vector(double gamma, const Vector &v)>;
  using ValueFn = std::function<double(const Vector &x)>;

  static MonotoneOperator zero();
  static MonotoneOperator box(double lo, double hi);
  static MonotoneOperator affine(Matrix a, Vector b);
  static MonotoneOperator quadratic(double alpha, Vector u);
  static MonotoneOperator linear_composite(Matrix l, double alpha, Vector u);

  /// `indicator_type` declares that the resolvent does not depend on gamma.
  /// `value` is optional; without it has_value() is false.
  static MonotoneOperator custom(ResolventFn resolvent, bool indicator_type,
                                 ValueFn value = {});

  Vector resolvent(double gamma, const Vector &v) const;

  /// Value of the underlying convex function; +inf outside an indicator's set.
  double value(const Vector &x) const;
  bool has_value() const noexcept { return static_cast<bool>(value_); }

  OperatorKind kind() const noexcept { return kind_; }
  bool gamma_independent() const noexcept { return gamma_independent_; }

private:
  MonotoneOperator(OperatorKind kind, ResolventFn resolvent, ValueFn value,
                   bool gamma_independent);

  OperatorKind kind_;
  ResolventFn resolvent_;
  ValueFn value_;
  bool gamma_independent_;
};

/// 2 J_{gamma A}(v) - v
Vector reflect(const MonotoneOperator &op, double gamma, const Vector &v);

/// Single-valued beta-cocoercive operator. Besides the forward oracle it
/// carries its own resolvent, which the proposed splitting needs.
class CocoerciveOperator {
public:
  using ForwardFn = std::function<Vector(const Vector &x)>;
  using ResolventFn = MonotoneOperator::ResolventFn;
  using ValueFn = MonotoneOperator::ValueFn;

  /// beta = +inf
  static CocoerciveOperator zero();
  /// alpha (x - u), beta = 1 / alpha
  static CocoerciveOperator quadratic(double alpha, Vector u);
  /// L^T grad g(L x) with quadratic g, beta = 1 / (alpha ||L||^2)
  static CocoerciveOperator linear_composite(Matrix l, double alpha, Vector u);
  static CocoerciveOperator custom(ForwardFn forward, double beta,
                                   ResolventFn resolvent, ValueFn value = {});

  Vector forward(const Vector &x) const;
  Vector resolvent(double gamma, const Vector &v) const;
  double value(const Vector &x) const;
  bool has_value() const noexcept { return static_cast<bool>(value_); }

  double beta() const noexcept { return beta_; }
  /// 1 / beta (0 for the zero operator)
  double lipschitz() const noexcept;
  OperatorKind kind() const noexcept { return kind_; }

  /// The same operator seen only through its resolvent.
  MonotoneOperator as_monotone() const;

private:
  CocoerciveOperator(OperatorKind kind, ForwardFn forward, double beta,
                     ResolventFn resolvent, ValueFn value);

  OperatorKind kind_;
  ForwardFn forward_;
  double beta_;
  ResolventFn resolvent_;
  ValueFn value_;
};

} // namespace triplesplit
