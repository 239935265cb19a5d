#pragma once

#include <stdexcept>
#include <string>

namespace dualkpca {

/// Malformed or inconsistent input data (files, shapes, dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters supplied by a caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a meaningful result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// H^T G H has an eigenvalue at or below the singularity floor, so the
/// gradient of the nuclear-norm term is undefined at the current iterate.
class SingularityError : public NumericError {
 public:
  SingularityError(const std::string& what, double eigenvalue)
      : NumericError(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// An iterative method hit its budget before reaching the target accuracy.
class ToleranceNotReached : public NumericError {
 public:
  ToleranceNotReached(const std::string& what, double residual, long budget_used)
      : NumericError(what), residual_(residual), budget_used_(budget_used) {}
  double residual() const noexcept { return residual_; }
  long budget_used() const noexcept { return budget_used_; }

 private:
  double residual_;
  long budget_used_;
};

/// Parse failure with the 1-based line where it happened.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dualkpca
