#include "triplesplit/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>

namespace triplesplit {

namespace {

void require_positive_step(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidConfigError("step size must be positive and finite, got " +
                             std::to_string(gamma));
  }
}

void require_same_size(const Vector &a, const Vector &b, const char *what) {
  if (a.size() != b.size()) {
    throw DimensionMismatchError(std::string(what) + ": size " +
                                 std::to_string(a.size()) + " vs " +
                                 std::to_string(b.size()));
  }
}

} // namespace

Vector prox_box(double lo, double hi, double /*gamma*/, const Vector &v) {
  if (!(lo < hi)) {
    throw InvalidBoundsError("box bounds require lo < hi, got [" +
                             std::to_string(lo) + ", " + std::to_string(hi) +
                             "]");
  }
  return v.cwiseMax(lo).cwiseMin(hi);
}

AffineProjector::AffineProjector(Matrix a, Vector b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != b_.size()) {
    throw DimensionMismatchError("affine constraint: A has " +
                                 std::to_string(a_.rows()) + " rows, b has " +
                                 std::to_string(b_.size()) + " entries");
  }
  if (a_.rows() == 0 || a_.rows() > a_.cols()) {
    throw SingularOperatorError("affine constraint matrix must have 1 <= rows "
                                "<= cols");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(a_.transpose());
  if (qr.rank() < a_.rows()) {
    throw SingularOperatorError("affine constraint matrix is rank deficient "
                                "(rank " +
                                std::to_string(qr.rank()) + " < " +
                                std::to_string(a_.rows()) + ")");
  }
  gram_.compute(a_ * a_.transpose());
  if (gram_.info() != Eigen::Success) {
    throw SingularOperatorError("Cholesky factorization of A A^T failed");
  }
}

Vector AffineProjector::project(const Vector &v) const {
  require_same_size(v, Vector(a_.cols()), "affine projection");
  const Vector residual = b_ - a_ * v;
  return v + a_.transpose() * gram_.solve(residual);
}

double AffineProjector::violation(const Vector &x) const {
  return (a_ * x - b_).norm();
}

Vector prox_affine(const Matrix &a, const Vector &b, const Vector &v) {
  return AffineProjector(a, b).project(v);
}

Vector prox_quadratic(double alpha, const Vector &u, double gamma,
                      const Vector &v) {
  require_positive_step(gamma);
  require_same_size(u, v, "quadratic prox");
  const double ag = alpha * gamma;
  return (v + ag * u) / (1.0 + ag);
}

Vector grad_quadratic(double alpha, const Vector &u, const Vector &x) {
  require_same_size(u, x, "quadratic gradient");
  return alpha * (x - u);
}

LinearCompositeResolvent::LinearCompositeResolvent(Matrix l, double alpha,
                                                   Vector u)
    : l_(std::move(l)), alpha_(alpha), u_(std::move(u)) {
  if (!(alpha_ > 0.0)) {
    throw InvalidConfigError("composite quadratic weight must be positive");
  }
  if (l_.rows() != u_.size()) {
    throw DimensionMismatchError("composite operator: L has " +
                                 std::to_string(l_.rows()) +
                                 " rows, center has " +
                                 std::to_string(u_.size()) + " entries");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(l_.transpose() * l_);
  if (eig.info() != Eigen::Success) {
    throw SingularOperatorError("eigendecomposition of L^T L failed");
  }
  basis_ = eig.eigenvectors();
  spectrum_ = eig.eigenvalues().cwiseMax(0.0);
  lipschitz_ = alpha_ * (spectrum_.size() > 0 ? spectrum_.maxCoeff() : 0.0);
}

Vector LinearCompositeResolvent::apply(double gamma, const Vector &v) const {
  require_positive_step(gamma);
  require_same_size(v, Vector(l_.cols()), "composite resolvent");
  const double ga = gamma * alpha_;
  const Vector rhs = v + ga * (l_.transpose() * u_);
  const Vector diag = (1.0 + ga * spectrum_.array()).matrix();
  if ((diag.array() <= 0.0).any()) {
    throw SingularOperatorError("I + gamma alpha L^T L is singular");
  }
  const Vector coords = (basis_.transpose() * rhs).cwiseQuotient(diag);
  return basis_ * coords;
}

Vector LinearCompositeResolvent::gradient(const Vector &x) const {
  return alpha_ * (l_.transpose() * (l_ * x - u_));
}

double LinearCompositeResolvent::value(const Vector &x) const {
  return 0.5 * alpha_ * (l_ * x - u_).squaredNorm();
}

Vector resolvent_linear_composite(const Matrix &l, double alpha,
                                  const Vector &u, double gamma,
                                  const Vector &v) {
  return LinearCompositeResolvent(l, alpha, u).apply(gamma, v);
}

const char *to_string(OperatorKind kind) {
  switch (kind) {
  case OperatorKind::Zero:
    return "zero";
  case OperatorKind::BoxIndicatorSubdifferential:
    return "box-indicator";
  case OperatorKind::AffineSubspaceNormalCone:
    return "affine-normal-cone";
  case OperatorKind::QuadraticGradient:
    return "quadratic-gradient";
  case OperatorKind::LinearCompositeGradient:
    return "linear-composite-gradient";
  case OperatorKind::Custom:
    return "custom";
  }
  return "unknown";
}

// -- MonotoneOperator -------------------------------------------------------

MonotoneOperator::MonotoneOperator(OperatorKind kind, ResolventFn resolvent,
                                   ValueFn value, bool gamma_independent)
    : kind_(kind), resolvent_(std::move(resolvent)), value_(std::move(value)),
      gamma_independent_(gamma_independent) {}

MonotoneOperator MonotoneOperator::zero() {
  return {OperatorKind::Zero, [](double, const Vector &v) { return v; },
          [](const Vector &) { return 0.0; }, true};
}

MonotoneOperator MonotoneOperator::box(double lo, double hi) {
  prox_box(lo, hi, 1.0, Vector()); // validates bounds
  const double slack =
      kIndicatorFeasibilityTol * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  return {OperatorKind::BoxIndicatorSubdifferential,
          [lo, hi](double gamma, const Vector &v) {
            return prox_box(lo, hi, gamma, v);
          },
          [lo, hi, slack](const Vector &x) {
            const bool inside = (x.array() >= lo - slack).all() &&
                                (x.array() <= hi + slack).all();
            return inside ? 0.0 : kInfinity;
          },
          true};
}

MonotoneOperator MonotoneOperator::affine(Matrix a, Vector b) {
  auto projector =
      std::make_shared<const AffineProjector>(std::move(a), std::move(b));
  const double slack = kIndicatorFeasibilityTol * (1.0 + projector->rhs().norm());
  return {OperatorKind::AffineSubspaceNormalCone,
          [projector](double, const Vector &v) {
            return projector->project(v);
          },
          [projector, slack](const Vector &x) {
            return projector->violation(x) <= slack ? 0.0 : kInfinity;
          },
          true};
}

MonotoneOperator MonotoneOperator::quadratic(double alpha, Vector u) {
  if (!(alpha > 0.0)) {
    throw InvalidConfigError("quadratic weight must be positive");
  }
  auto center = std::make_shared<const Vector>(std::move(u));
  return {OperatorKind::QuadraticGradient,
          [alpha, center](double gamma, const Vector &v) {
            return prox_quadratic(alpha, *center, gamma, v);
          },
          [alpha, center](const Vector &x) {
            return 0.5 * alpha * (x - *center).squaredNorm();
          },
          false};
}

MonotoneOperator MonotoneOperator::linear_composite(Matrix l, double alpha,
                                                    Vector u) {
  auto res = std::make_shared<const LinearCompositeResolvent>(
      std::move(l), alpha, std::move(u));
  return {OperatorKind::LinearCompositeGradient,
          [res](double gamma, const Vector &v) { return res->apply(gamma, v); },
          [res](const Vector &x) { return res->value(x); }, false};
}

MonotoneOperator MonotoneOperator::custom(ResolventFn resolvent,
                                          bool indicator_type, ValueFn value) {
  if (!resolvent) {
    throw InvalidConfigError("custom operator needs a resolvent oracle");
  }
  return {OperatorKind::Custom, std::move(resolvent), std::move(value),
          indicator_type};
}

Vector MonotoneOperator::resolvent(double gamma, const Vector &v) const {
  require_positive_step(gamma);
  return resolvent_(gamma, v);
}

double MonotoneOperator::value(const Vector &x) const {
  if (!value_) {
    throw InvalidConfigError(std::string("operator '") + to_string(kind_) +
                             "' has no function value");
  }
  return value_(x);
}

Vector reflect(const MonotoneOperator &op, double gamma, const Vector &v) {
  return 2.0 * op.resolvent(gamma, v) - v;
}

// -- CocoerciveOperator -----------------------------------------------------

CocoerciveOperator::CocoerciveOperator(OperatorKind kind, ForwardFn forward,
                                       double beta, ResolventFn resolvent,
                                       ValueFn value)
    : kind_(kind), forward_(std::move(forward)), beta_(beta),
      resolvent_(std::move(resolvent)), value_(std::move(value)) {}

CocoerciveOperator CocoerciveOperator::zero() {
  return {OperatorKind::Zero,
          [](const Vector &x) { return Vector(Vector::Zero(x.size())); },
          kInfinity, [](double, const Vector &v) { return v; },
          [](const Vector &) { return 0.0; }};
}

CocoerciveOperator CocoerciveOperator::quadratic(double alpha, Vector u) {
  if (!(alpha > 0.0)) {
    throw InvalidConfigError("quadratic weight must be positive");
  }
  auto center = std::make_shared<const Vector>(std::move(u));
  return {OperatorKind::QuadraticGradient,
          [alpha, center](const Vector &x) {
            return grad_quadratic(alpha, *center, x);
          },
          1.0 / alpha,
          [alpha, center](double gamma, const Vector &v) {
            return prox_quadratic(alpha, *center, gamma, v);
          },
          [alpha, center](const Vector &x) {
            return 0.5 * alpha * (x - *center).squaredNorm();
          }};
}

CocoerciveOperator CocoerciveOperator::linear_composite(Matrix l, double alpha,
                                                        Vector u) {
  auto res = std::make_shared<const LinearCompositeResolvent>(
      std::move(l), alpha, std::move(u));
  const double lip = res->lipschitz();
  return {OperatorKind::LinearCompositeGradient,
          [res](const Vector &x) { return res->gradient(x); },
          lip > 0.0 ? 1.0 / lip : kInfinity,
          [res](double gamma, const Vector &v) { return res->apply(gamma, v); },
          [res](const Vector &x) { return res->value(x); }};
}

CocoerciveOperator CocoerciveOperator::custom(ForwardFn forward, double beta,
                                              ResolventFn resolvent,
                                              ValueFn value) {
  if (!forward || !resolvent) {
    throw InvalidConfigError(
        "custom cocoercive operator needs forward and resolvent oracles");
  }
  if (!(beta > 0.0)) {
    throw InvalidConfigError("cocoercivity parameter must be positive");
  }
  return {OperatorKind::Custom, std::move(forward), beta, std::move(resolvent),
          std::move(value)};
}

Vector CocoerciveOperator::forward(const Vector &x) const {
  return forward_(x);
}

Vector CocoerciveOperator::resolvent(double gamma, const Vector &v) const {
  require_positive_step(gamma);
  return resolvent_(gamma, v);
}

double CocoerciveOperator::value(const Vector &x) const {
  if (!value_) {
    throw InvalidConfigError(std::string("operator '") + to_string(kind_) +
                             "' has no function value");
  }
  return value_(x);
}

double CocoerciveOperator::lipschitz() const noexcept {
  return std::isinf(beta_) ? 0.0 : 1.0 / beta_;
}

MonotoneOperator CocoerciveOperator::as_monotone() const {
  return MonotoneOperator::custom(resolvent_, false, value_);
}

} // namespace triplesplit
