#pragma once

#include <stdexcept>
#include <string>

namespace manirank {

enum class ErrorKind {
  kInvalidInput,
  kUnknownAttribute,
  kInconsistentCandidateSet,
  kDegenerateGroup,
  kDegenerateAttribute,
  kDegenerateIntersection,
  kInfeasible,
  kRepairStalled,
  kBudgetExceeded,
  kInstanceTooLarge,
  kScenarioUnreachable,
};

const char* to_string(ErrorKind kind);

/// Base of every error raised by the library. `kind()` lets callers (the CLI in
/// particular) map failures onto stable exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace manirank
