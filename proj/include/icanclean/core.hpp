#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace icanclean {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

// Error hierarchy. The CLI maps each family onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise invalid numeric input.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Too few samples for the requested decomposition.
class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

/// One side of a CCA has numerical rank zero.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (threshold, window geometry, scenario sizes).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Configuration that is valid in principle but not supported by an operation.
class UnsupportedConfigError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Throws ValidationError naming the first non-finite entry, or ShapeError on an empty matrix.
template <typename Derived>
void validate_finite(const Eigen::MatrixBase<Derived>& m, const std::string& what = "matrix") {
  if (m.rows() < 1 || m.cols() < 1) {
    throw ShapeError(what + ": expected at least one row and one column, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (m.allFinite()) return;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(static_cast<double>(m(i, j)))) {
        throw ValidationError(what + ": non-finite value at row " + std::to_string(i) +
                              ", column " + std::to_string(j));
      }
    }
  }
}

}  // namespace icanclean
