#pragma once

#include <stdexcept>
#include <string>

namespace fisherpli {

enum class ErrorKind {
  InvalidArgument,
  Domain,
  Numerical,
  SphereEmpty,
  UnsupportedFamily,
  Config,
  Io,
};

/// Base of every exception thrown by the library. The kind maps one-to-one
/// onto the C API status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// Carries the tolerance actually achieved when a numerical routine gives up.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, double achieved = 0.0)
      : Error(ErrorKind::Numerical, what), achieved_(achieved) {}
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class SphereEmptyError : public Error {
 public:
  explicit SphereEmptyError(const std::string& what) : Error(ErrorKind::SphereEmpty, what) {}
};

class UnsupportedFamilyError : public Error {
 public:
  explicit UnsupportedFamilyError(const std::string& what)
      : Error(ErrorKind::UnsupportedFamily, what) {}
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(ErrorKind::Config, field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace fisherpli
