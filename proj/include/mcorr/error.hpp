#ifndef MCORR_ERROR_HPP
#define MCORR_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcorr {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two operands disagree in width, height or channel count.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the domain an operation accepts.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidWindowError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NoPatchesError : public Error {
 public:
  using Error::Error;
};

class EmptySelectionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed IMG2D / PGM input. offset() is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class PromptMissError : public Error {
 public:
  PromptMissError(std::size_t x, std::size_t y)
      : Error("prompt (" + std::to_string(x) + ", " + std::to_string(y) +
              ") falls on a background pixel"),
        x_(x),
        y_(y) {}

  std::size_t x() const noexcept { return x_; }
  std::size_t y() const noexcept { return y_; }

 private:
  std::size_t x_;
  std::size_t y_;
};

/// Invalid configuration document or CLI flag value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcorr

#endif  // MCORR_ERROR_HPP
