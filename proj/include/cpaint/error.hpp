#pragma once

#include <stdexcept>
#include <string>

namespace cpaint {

/// Raised when a caller breaks a documented precondition (dimension
/// mismatch, non-positive concentration, empty component, ...).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Raised for bad external input: malformed files, unknown keys, empty data.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a series handed to a diagnostic carries no information.
class DegenerateSeries : public std::domain_error {
 public:
  explicit DegenerateSeries(const std::string& what) : std::domain_error(what) {}
};

#define CPAINT_REQUIRE(cond, msg)                         \
  do {                                                    \
    if (!(cond)) throw ::cpaint::ContractViolation(msg);  \
  } while (false)

}  // namespace cpaint
