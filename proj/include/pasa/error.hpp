#pragma once

#include <stdexcept>
#include <string>

namespace pasa {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shape disagreements (names both shapes in the message).
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Invalid argument values (non-positive temperature, bad fractions, ...).
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

// Violated call contracts (missing gradient, label out of range, ...).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

// KL divergence undefined for the given pair of distributions.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

// A numeric evaluation produced a non-finite result.
class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& msg) : Error(msg) {}
};

// Malformed input files; message carries the location.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace pasa
