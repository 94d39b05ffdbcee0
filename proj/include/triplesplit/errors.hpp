#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace triplesplit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidBoundsError : public Error {
public:
  using Error::Error;
};

/// A constraint matrix or linear operator could not be factorized.
class SingularOperatorError : public Error {
public:
  using Error::Error;
};

class InvalidConfigError : public Error {
public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
public:
  using Error::Error;
};

class InfeasibleInstanceError : public Error {
public:
  using Error::Error;
};

class UnsupportedBlockError : public Error {
public:
  using Error::Error;
};

/// A step produced a non-finite intermediate. Carries the iterate that fed
/// the failing step.
class NumericalBlowupError : public Error {
public:
  NumericalBlowupError(std::string what, Vector iterate)
      : Error(std::move(what)), iterate_(std::move(iterate)) {}

  const Vector &iterate() const noexcept { return iterate_; }

private:
  Vector iterate_;
};

/// An ADMM block subproblem could not be solved.
class SubproblemError : public Error {
public:
  SubproblemError(std::size_t block, const std::string &what)
      : Error("block " + std::to_string(block + 1) + ": " + what),
        block_(block) {}

  std::size_t block() const noexcept { return block_; }

private:
  std::size_t block_;
};

} // namespace triplesplit
