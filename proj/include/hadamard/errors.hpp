#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace hadamard {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that do not fit together: mismatched spaces, malformed points,
/// maps that fail their nonexpansiveness check.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside the domain of an operation (t outside [0,1], λ < 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Text input that could not be parsed. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

/// A parsed value that violates an invariant. The message names the invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative scheme hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double residual)
      : Error(what + " (iterations " + std::to_string(iterations) + ", residual " +
              std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

/// ConvergenceError that also carries the last iterate.
template <class P>
class ConvergenceFailure : public ConvergenceError {
 public:
  ConvergenceFailure(const std::string& what, std::size_t iterations, double residual, P last)
      : ConvergenceError(what, iterations, residual), last_(std::move(last)) {}

  const P& last_iterate() const noexcept { return last_; }

 private:
  P last_;
};

}  // namespace hadamard
