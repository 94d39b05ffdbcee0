#pragma once

// Reference computations used by the tests. None of these call the library
// routine they are checked against; they solve the same problems by slower,
// more direct means.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Deterministic sampler (std::mt19937_64 + std distributions).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi);
  double normal();
  std::size_t index(std::size_t n);
  Vector vector(Eigen::Index n, double scale = 1.0);
  Matrix matrix(Eigen::Index rows, Eigen::Index cols);

private:
  std::mt19937_64 engine_;
};

/// argmin alpha/2 ||x - u||^2 over lo <= x_i <= hi, sum x = b, found by a
/// grid over the free coordinates (the last one is eliminated) followed by
/// repeated window shrinking around the incumbent. Intended for n <= 3.
Vector brute_force_bound_projection(const Vector &u, double lo, double hi,
                                    double alpha, double b);

/// Minimizes a convex function of one variable on [lo, hi] by golden
/// section search.
double golden_section(const std::function<double(double)> &f, double lo,
                      double hi, int iters = 200);

/// Closed-form reference for the box-and-sum problem found by bisection on
/// the multiplier (a different root finder from the library's breakpoint
/// scan).
Vector bisection_bound_projection(const Vector &u, double lo, double hi,
                                  double alpha, double b);

/// Euclidean projection onto {x : A x = b} via the normal equations solved
/// with a full-pivot LU.
Vector project_affine(const Matrix &a, const Vector &b, const Vector &v);

/// prox of gamma * alpha/2 ||L x - c||^2 by a direct dense solve.
Vector prox_linear_quadratic(const Matrix &l, double alpha, const Vector &c,
                             double gamma, const Vector &v);

/// f*(A^T w) for f = alpha/2 ||x - u||^2, by maximizing
/// <A^T w, x> - f(x) with plain gradient ascent.
double quadratic_conjugate_numeric(const Matrix &a, double alpha,
                                   const Vector &u, const Vector &w);

/// Support function of [lo, hi]^n at y by enumerating the vertices
/// (n <= 10).
double box_support_by_vertices(double lo, double hi, const Vector &y);

/// Central finite-difference gradient.
Vector fd_gradient(const std::function<double(const Vector &)> &f,
                   const Vector &x, double h = 1e-6);

/// phi(y) + 1/(2 gamma) ||y - v||^2
double prox_objective(const std::function<double(const Vector &)> &phi,
                      double gamma, const Vector &v, const Vector &y);

/// Averaged-operator constant and the rate factor tau for KM with
/// constant relaxation lambda.
double averaged_a(double beta, double gamma);
double tau_factor(double beta, double gamma, double lambda);

/// Solution of the three scalar-block quadratic program
///   min sum_i alpha_i/2 (x_i - u_i)^2  s.t.  x_1 + x_2 + x_3 = b
/// from its 4 x 4 KKT system.
Eigen::Vector4d scalar_three_block_kkt(const Eigen::Vector3d &alpha,
                                       const Eigen::Vector3d &u, double b);

/// Minimizer of sum_i alpha_i/2 ||x - u_i||^2 (the weighted mean).
Vector weighted_mean(const std::vector<double> &alpha,
                     const std::vector<Vector> &u);

} // namespace oracle
