#pragma once

#include <stdexcept>
#include <string>

namespace vizsim {

enum class ErrorKind {
  invalid_input,  // bad shapes, malformed files, unknown labels
  domain,         // computation undefined for these inputs
  io,             // file system / codec failures
};

/// Every failure raised by the library carries a kind so front ends can map it
/// to an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace vizsim
