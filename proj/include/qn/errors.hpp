#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix lengths disagree with what the operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function (r <= 0, bad parameters).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two atoms coincide, so a pair potential is singular.
class SingularityError : public DomainError {
 public:
  SingularityError(std::size_t i, std::size_t j)
      : DomainError("coincident atoms " + std::to_string(i) + " and " + std::to_string(j)),
        first(i),
        second(j) {}

  std::size_t first;
  std::size_t second;
};

/// Objective returned a non-finite value while probing.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class UnsupportedSize : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_number(line) {}

  std::size_t line_number;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qn
