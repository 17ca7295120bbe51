#pragma once

#include <stdexcept>
#include <string>

namespace equicap {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidOrder,
  kNotASubgroup,
  kBadHomomorphism,
  kInconsistentRepresentation,
  kDimensionMismatch,
  kShapeMismatch,
  kUndecided,
  kConfig,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (the CLI in
// particular) can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidOrder: return "invalid-order";
    case ErrorCode::kNotASubgroup: return "not-a-subgroup";
    case ErrorCode::kBadHomomorphism: return "bad-homomorphism";
    case ErrorCode::kInconsistentRepresentation: return "inconsistent-representation";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kUndecided: return "undecided";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace equicap
