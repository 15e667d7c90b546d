// Error taxonomy shared by every module. Each failure mode carries a stable
// code (so the CLI can map it to an exit status) plus a human-readable
// message and, where it makes sense, the offending index/position.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mk {

enum class Err {
  // subshift layer
  NotPrimitiveWithinCap,
  InadmissibleTransition,
  LengthMismatch,
  EndpointMismatch,
  IdenticalBlocks,
  // measure layer
  DoeblinViolation,
  SupportMismatch,
  OverlappingRanges,
  InequalityViolated,
  // equivalence layer
  AdjacencyMismatch,
  InadmissibleWord,
  // classifier layer
  TailsUnknown,
  TailsEqual,
  AssumptionViolated,
  // cocycle layer
  SpacingViolation,
  LengthViolation,
  PairInvalid,
  OutsideDomain,
  NoneFoundWithinLen,
  NotApplicable,
  InsufficientWindow,
  // example-family layer
  InvalidInterleaving,
  SeedInvalid,
  // simulation layer
  DegenerateVariance,
  // generic
  InvalidInput,
  InternalInvariant,
};

const char* to_string(Err code);

inline constexpr std::int64_t kNoIndex = INT64_MIN;

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& message, std::int64_t index = kNoIndex)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code(code),
        index(index) {}

  Err code;
  std::int64_t index;  // offending position when applicable, kNoIndex otherwise
};

// Internal-consistency check: failures indicate a bug in this library, not
// bad input, and map to a distinct process exit status.
inline void invariant(bool ok, const std::string& message) {
  if (!ok) throw Error(Err::InternalInvariant, message);
}

}  // namespace mk
