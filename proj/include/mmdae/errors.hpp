#pragma once

#include <stdexcept>
#include <string>

namespace mmdae {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: case file, parameters, cross references, schedule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ValidationError(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// In-service lines no longer form a single connected network.
class IslandError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Non-finite residual or Jacobian entry; carries the equation name.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& equation, const std::string& what)
      : Error(what), equation_(equation) {}
  const std::string& equation() const { return equation_; }

 private:
  std::string equation_;
};

/// Base for numerical failures during a solve.
class SolverError : public Error {
 public:
  using Error::Error;
};

class NewtonError : public SolverError {
 public:
  enum class Kind { max_iter_exceeded, singular_matrix, diverged };

  NewtonError(Kind kind, const std::string& what, double residual_norm)
      : SolverError(what), kind_(kind), residual_norm_(residual_norm) {}

  Kind kind() const { return kind_; }
  double residual_norm() const { return residual_norm_; }

 private:
  Kind kind_;
  double residual_norm_;
};

class StepSizeUnderflow : public SolverError {
 public:
  using SolverError::SolverError;
};

class HistoryUnavailable : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace mmdae
