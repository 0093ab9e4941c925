#pragma once

#include <stdexcept>
#include <string>

namespace tdvs {

/// Argument outside the domain of a density or update rule.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Estimation produced a non-finite objective or parameter.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

enum class InputErrorCode {
  kIo = 1,
  kParse = 2,
  kDimension = 3,
  kMissingColumn = 4,
  kInvalidArgument = 5,
};

/// Malformed or inconsistent user input (files, flags, dimensions).
class InputError : public std::runtime_error {
 public:
  InputError(InputErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  InputErrorCode code() const { return code_; }

 private:
  InputErrorCode code_;
};

}  // namespace tdvs
