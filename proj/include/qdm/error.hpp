#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdm {

enum class ErrorKind {
  Domain,
  OutOfRange,
  Index,
  Extraction,
  Underdetermined,
  Config,
  Io,
};

/// Base of every exception thrown by the core. The C API maps `kind()` onto
/// its status codes.
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

/// Intensity outside the calibrated window of a photophysics curve.
class OutOfRangeError : public Error {
 public:
  explicit OutOfRangeError(const std::string& what) : Error(ErrorKind::OutOfRange, what) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& what) : Error(ErrorKind::Index, what) {}
};

class ExtractionError : public Error {
 public:
  explicit ExtractionError(const std::string& what) : Error(ErrorKind::Extraction, what) {}
};

class UnderdeterminedError : public Error {
 public:
  explicit UnderdeterminedError(const std::string& what) : Error(ErrorKind::Underdetermined, what) {}
};

class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Config, line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  /// 1-based; 0 when the problem is not tied to a single line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace qdm
