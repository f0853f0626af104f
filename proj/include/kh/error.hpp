#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kh {

// Base of every error thrown by the library. The CLI maps the subclasses
// onto exit codes (data errors -> 2, numerical errors -> 3).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// --- data / contract errors ---

class DimensionError : public Error {
public:
  using Error::Error;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

class ContractError : public Error {
public:
  using Error::Error;
};

class UnknownPresetError : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class IoError : public Error {
public:
  using Error::Error;
};

// --- numerical errors ---

class NumericalError : public Error {
public:
  using Error::Error;
};

class SingularMatrixError : public NumericalError {
public:
  SingularMatrixError(const std::string& what, std::size_t index)
      : NumericalError(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

class DivergenceError : public NumericalError {
public:
  DivergenceError(const std::string& what, long step)
      : NumericalError(what), step_(step) {}

  long step() const noexcept { return step_; }

private:
  long step_;
};

}  // namespace kh
