#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sdae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of all errors thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension or shape mismatch between operands.
class DimensionError : public Error {
public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

/// A matrix pair whose pencil is identically singular.
class NotRegularError : public Error {
public:
  explicit NotRegularError(const std::string& what) : Error(what) {}
};

/// Invalid argument values (non-finite entries, bad intervals, ...).
class InvalidArgumentError : public Error {
public:
  explicit InvalidArgumentError(const std::string& what) : Error(what) {}
};

/// A detectability certificate did not hold where one is required.
class CertificateError : public Error {
public:
  explicit CertificateError(const std::string& what) : Error(what) {}
};

/// Requested estimation accuracy cannot be met by the configured gains.
class BudgetError : public Error {
public:
  explicit BudgetError(const std::string& what) : Error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgumentError(msg);
}

inline void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) throw InvalidArgumentError(name + ": non-finite entries");
}

}  // namespace sdae
