#include "triplesplit/problems.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <locale>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace triplesplit {

// -- NormalStream -------------------------------------------------------------

double NormalStream::uniform() {
  // (0, 1], 53 random bits
  return (double(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

// -- bound projection -----------------------------------------------------------

void BoundProjectionInstance::validate() const {
  if (n == 0) {
    throw InvalidConfigError("instance dimension must be positive");
  }
  if (!(lo < hi)) {
    throw InvalidBoundsError("instance bounds require lo < hi");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidConfigError("instance weight alpha must be positive");
  }
  if (u.size() != Eigen::Index(n)) {
    throw DimensionMismatchError("instance profile has " +
                                 std::to_string(u.size()) + " entries, n = " +
                                 std::to_string(n));
  }
  if (!u.allFinite() || !std::isfinite(b)) {
    throw InvalidConfigError("instance data must be finite");
  }
}

Matrix BoundProjectionInstance::constraint_matrix() const {
  return Matrix::Ones(1, Eigen::Index(n));
}

double BoundProjectionInstance::objective(const Vector &x) const {
  return 0.5 * alpha * (x - u).squaredNorm();
}

BoundProjectionInstance build_figure2_instance(std::size_t n,
                                               std::uint64_t seed,
                                               const Figure2Options &opts) {
  BoundProjectionInstance inst;
  inst.n = n;
  inst.lo = opts.lo;
  inst.hi = opts.hi;
  inst.alpha = opts.alpha;
  inst.seed = seed;
  inst.u.resize(Eigen::Index(n));
  NormalStream noise(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase =
        2.0 * std::numbers::pi * double(i + 1) / double(n);
    inst.u(Eigen::Index(i)) = std::sin(phase) + opts.noise * noise.next();
  }
  inst.b = inst.u.sum();
  inst.validate();
  return inst;
}

double clamped_sum(const BoundProjectionInstance &inst, double t) {
  return (inst.u.array() + t / inst.alpha).cwiseMax(inst.lo).cwiseMin(inst.hi)
      .sum();
}

KktCertificate kkt_oracle(const BoundProjectionInstance &inst) {
  inst.validate();
  const double n = double(inst.n);
  if (inst.b < n * inst.lo || inst.b > n * inst.hi) {
    throw InfeasibleInstanceError("sum constraint b = " +
                                  std::to_string(inst.b) +
                                  " lies outside [n lo, n hi]");
  }

  // t -> clamped_sum(t) is continuous, nondecreasing and linear between the
  // breakpoints alpha (lo - u_i), alpha (hi - u_i).
  std::vector<double> knots;
  knots.reserve(2 * inst.n);
  for (Eigen::Index i = 0; i < inst.u.size(); ++i) {
    knots.push_back(inst.alpha * (inst.lo - inst.u(i)));
    knots.push_back(inst.alpha * (inst.hi - inst.u(i)));
  }
  std::sort(knots.begin(), knots.end());

  double t = knots.front();
  double s_prev = clamped_sum(inst, knots.front());
  if (s_prev < inst.b) {
    t = knots.back();
    for (std::size_t j = 1; j < knots.size(); ++j) {
      const double s = clamped_sum(inst, knots[j]);
      if (s >= inst.b) {
        const double span = s - s_prev;
        t = span > 0.0 ? knots[j - 1] +
                             (inst.b - s_prev) * (knots[j] - knots[j - 1]) / span
                       : knots[j];
        break;
      }
      s_prev = s;
    }
  }

  KktCertificate cert;
  cert.multiplier = t;
  cert.x_star = (inst.u.array() + t / inst.alpha)
                    .cwiseMax(inst.lo)
                    .cwiseMin(inst.hi)
                    .matrix();
  cert.lower_multipliers = Vector::Zero(inst.u.size());
  cert.upper_multipliers = Vector::Zero(inst.u.size());
  for (Eigen::Index i = 0; i < inst.u.size(); ++i) {
    const double free = inst.u(i) + t / inst.alpha;
    if (free <= inst.lo) {
      cert.active_lower.push_back(std::size_t(i));
      cert.lower_multipliers(i) = inst.alpha * (inst.lo - inst.u(i)) - t;
    } else if (free >= inst.hi) {
      cert.active_upper.push_back(std::size_t(i));
      cert.upper_multipliers(i) = t - inst.alpha * (inst.hi - inst.u(i));
    }
  }
  return cert;
}

double CertificateCheck::max() const {
  return std::max({box_violation, equality_violation, stationarity,
                   dual_violation, complementarity});
}

CertificateCheck check_certificate(const BoundProjectionInstance &inst,
                                   const KktCertificate &cert) {
  const Vector &x = cert.x_star;
  CertificateCheck c;
  c.box_violation =
      std::max({0.0, (inst.lo - x.array()).maxCoeff(),
                (x.array() - inst.hi).maxCoeff()});
  c.equality_violation = std::abs(x.sum() - inst.b);
  const Vector stat = inst.alpha * (x - inst.u) -
                      Vector::Constant(x.size(), cert.multiplier) -
                      cert.lower_multipliers + cert.upper_multipliers;
  c.stationarity = stat.cwiseAbs().maxCoeff();
  c.dual_violation =
      std::max({0.0, -cert.lower_multipliers.minCoeff(),
                -cert.upper_multipliers.minCoeff()});
  c.complementarity =
      std::max((cert.lower_multipliers.array() * (x.array() - inst.lo))
                   .abs()
                   .maxCoeff(),
               (cert.upper_multipliers.array() * (inst.hi - x.array()))
                   .abs()
                   .maxCoeff());
  return c;
}

SplittingOperators assemble_splitting_operators(
    const BoundProjectionInstance &inst) {
  inst.validate();
  return {MonotoneOperator::box(inst.lo, inst.hi),
          MonotoneOperator::affine(inst.constraint_matrix(),
                                   Vector::Constant(1, inst.b)),
          CocoerciveOperator::quadratic(inst.alpha, inst.u)};
}

StepOutput explicit_bound_projection_step(const BoundProjectionInstance &inst,
                                          ExplicitScheme scheme,
                                          ForwardSign sign, double gamma,
                                          const Vector &z) {
  const double n = double(inst.n);
  const double ag = inst.alpha * gamma;

  StepOutput s;
  s.z = z;
  // A^+ (b - A z) + z with A the row of ones, A^+ = A^T / n
  s.x_b = z.array() + (inst.b - z.sum()) / n;
  s.c_at_xb = inst.alpha * (s.x_b - inst.u);
  const double dir = sign == ForwardSign::Splitting ? -1.0 : 1.0;
  s.x_a = (2.0 * s.x_b - z + dir * gamma * s.c_at_xb)
              .cwiseMax(inst.lo)
              .cwiseMin(inst.hi);
  if (scheme == ExplicitScheme::DavisYin) {
    s.x_c = s.x_a;
  } else if (sign == ForwardSign::Splitting) {
    s.x_c = (s.x_a + gamma * s.c_at_xb + ag * inst.u) / (ag + 1.0);
  } else {
    s.x_c = s.x_a / (ag + 1.0) + (ag / (ag + 1.0)) * inst.u;
  }
  s.tz = z + s.x_c - s.x_b;
  if (!s.tz.allFinite()) {
    throw NumericalBlowupError("non-finite bound-projection iterate", z);
  }
  return s;
}

void write_instance(std::ostream &os, const BoundProjectionInstance &inst) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf.precision(17);
  buf << inst.n << ' ' << inst.lo << ' ' << inst.hi << ' ' << inst.alpha
      << ' ' << inst.b << ' ' << inst.seed << '\n';
  for (Eigen::Index i = 0; i < inst.u.size(); ++i) {
    buf << inst.u(i) << '\n';
  }
  os << buf.str();
}

BoundProjectionInstance read_instance(std::istream &is) {
  is.imbue(std::locale::classic());
  BoundProjectionInstance inst;
  if (!(is >> inst.n >> inst.lo >> inst.hi >> inst.alpha >> inst.b >>
        inst.seed)) {
    throw InvalidConfigError("instance file: malformed header (expected "
                             "'n lo hi alpha b seed')");
  }
  inst.u.resize(Eigen::Index(inst.n));
  for (std::size_t i = 0; i < inst.n; ++i) {
    if (!(is >> inst.u(Eigen::Index(i)))) {
      throw InvalidConfigError("instance file: expected " +
                               std::to_string(inst.n) + " profile entries, got " +
                               std::to_string(i));
    }
  }
  double extra = 0.0;
  if (is >> extra) {
    throw InvalidConfigError("instance file: trailing data after profile");
  }
  inst.validate();
  return inst;
}

// -- composite instance -----------------------------------------------------

MonotoneOperator CompositeInstance::f_operator() const {
  return MonotoneOperator::quadratic(alpha_f, u_f);
}

MonotoneOperator CompositeInstance::h_operator() const {
  return MonotoneOperator::quadratic(alpha_h, u_h);
}

CocoerciveOperator CompositeInstance::composite_operator() const {
  return CocoerciveOperator::linear_composite(l, alpha_g, u_g);
}

Vector CompositeInstance::grad_g(const Vector &y) const {
  return grad_quadratic(alpha_g, u_g, y);
}

Vector CompositeInstance::prox_g(double gamma, const Vector &v) const {
  return prox_quadratic(alpha_g, u_g, gamma, v);
}

double CompositeInstance::lipschitz() const {
  return composite_operator().lipschitz();
}

double CompositeInstance::step_bound() const {
  const double lip = lipschitz();
  return lip > 0.0 ? 2.0 / lip : kInfinity;
}

double CompositeInstance::objective(const Vector &x) const {
  return 0.5 * alpha_f * (x - u_f).squaredNorm() +
         0.5 * alpha_g * (l * x - u_g).squaredNorm() +
         0.5 * alpha_h * (x - u_h).squaredNorm();
}

Vector CompositeInstance::minimizer() const {
  const Eigen::Index n = dim();
  const Matrix lhs = (alpha_f + alpha_h) * Matrix::Identity(n, n) +
                     alpha_g * (l.transpose() * l);
  const Vector rhs =
      alpha_f * u_f + alpha_h * u_h + alpha_g * (l.transpose() * u_g);
  return lhs.ldlt().solve(rhs);
}

CompositeInstance build_algo5_instance(std::size_t n, const Matrix &l,
                                       std::uint64_t seed) {
  if (l.rows() != Eigen::Index(n) || l.cols() != Eigen::Index(n)) {
    throw DimensionMismatchError("composite instance needs a square " +
                                 std::to_string(n) + " x " +
                                 std::to_string(n) + " linear map");
  }
  CompositeInstance inst;
  inst.l = l;
  NormalStream rng(seed);
  auto draw = [&] {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v(i) = rng.next();
    }
    return v;
  };
  inst.u_f = draw();
  inst.u_g = draw();
  inst.u_h = draw();
  return inst;
}

StepOutput composite_step(const CompositeInstance &inst, double gamma,
                          const Vector &z) {
  const CocoerciveOperator composite = inst.composite_operator();

  StepOutput s;
  s.z = z;
  s.x_b = prox_quadratic(inst.alpha_h, inst.u_h, gamma, z);
  const Vector y = inst.l * s.x_b;
  s.c_at_xb = inst.l.transpose() * inst.grad_g(y);
  s.x_a = prox_quadratic(inst.alpha_f, inst.u_f, gamma,
                         2.0 * s.x_b - z - gamma * s.c_at_xb);
  s.x_c = composite.resolvent(gamma, s.x_a + gamma * s.c_at_xb);
  s.tz = z + s.x_c - s.x_b;
  if (!s.tz.allFinite()) {
    throw NumericalBlowupError("non-finite composite iterate", z);
  }
  return s;
}

Stepper bind_composite(CompositeInstance inst) {
  auto shared = std::make_shared<const CompositeInstance>(std::move(inst));
  auto composite =
      std::make_shared<const CocoerciveOperator>(shared->composite_operator());
  return [shared, composite](double gamma, const Vector &z) {
    const CompositeInstance &inst = *shared;
    StepOutput s;
    s.z = z;
    s.x_b = prox_quadratic(inst.alpha_h, inst.u_h, gamma, z);
    s.c_at_xb = inst.l.transpose() * inst.grad_g(inst.l * s.x_b);
    s.x_a = prox_quadratic(inst.alpha_f, inst.u_f, gamma,
                           2.0 * s.x_b - z - gamma * s.c_at_xb);
    s.x_c = composite->resolvent(gamma, s.x_a + gamma * s.c_at_xb);
    s.tz = z + s.x_c - s.x_b;
    if (!s.tz.allFinite()) {
      throw NumericalBlowupError("non-finite composite iterate", z);
    }
    return s;
  };
}

} // namespace triplesplit
