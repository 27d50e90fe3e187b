#pragma once

#include <stdexcept>
#include <string>

namespace nbi {

enum class ErrorKind {
  validation,
  io,
  parse,
  dependency,
  numerical,
  leakage,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

struct DependencyError : Error {
  explicit DependencyError(const std::string& what) : Error(ErrorKind::dependency, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

struct LeakageError : Error {
  explicit LeakageError(const std::string& what) : Error(ErrorKind::leakage, what) {}
};

struct InternalError : Error {
  explicit InternalError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

// Process exit status for an uncaught error of this kind.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::io:
    case ErrorKind::parse:
    case ErrorKind::leakage:
      return 2;
    case ErrorKind::dependency:
      return 3;
    case ErrorKind::numerical:
      return 4;
    case ErrorKind::internal:
      break;
  }
  return 1;
}

}  // namespace nbi
