#pragma once

#include <stdexcept>
#include <string>

namespace titlmars {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kInput = 2,
  kCapacity = 3,
  kInternal = 4,
};

// Base of all library errors. Each subclass maps onto one exit code.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

// Bad caller input: wrong dimension, missing file, inconsistent bounds.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ExitCode::kInput, what) {}
};

// Malformed document; message carries line/field context.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ExitCode::kInput, what) {}
};

// Well-formed document whose contents violate a model invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ExitCode::kInput, what) {}
};

// Variable index or vector length mismatch between a model and its input.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what)
      : Error(ExitCode::kInput, what) {}
};

// Work exceeds a configured cap (oracle vertex count, node/time limit).
class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what)
      : Error(ExitCode::kCapacity, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::kInput, what) {}
};

// A broken internal guarantee, e.g. a heuristic beating a certified optimum.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error(ExitCode::kInternal, what) {}
};

}  // namespace titlmars
