#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace tetherfly {

enum class ErrorCode {
  TooShort,        // tether length does not exceed the endpoint chord
  NoConvergence,   // root finder missed its tolerance
  NoPhysicalRoot,  // initial-guess quadratic has no positive real root
  OutsideSpan,     // lowest point of the curve lies outside the endpoints
  InvalidArc,      // arc length outside [0, s_total]
  TetherTaut,      // simulated vehicle reached the tether length
  InvalidInput,    // precondition violated by the caller
  InvalidConfig,   // scenario configuration failed validation
  Schema,          // trace file does not match the expected columns/version
};

const char* to_string(ErrorCode code);

// Single exception type for every domain failure in the library. `value`
// carries the numeric context when one exists (last residual, offending
// length, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<double> value = std::nullopt)
      : std::runtime_error(what), code_(code), value_(value) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<double> value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  std::optional<double> value_;
};

}  // namespace tetherfly
