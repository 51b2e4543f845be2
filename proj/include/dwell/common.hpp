// common.hpp — shared constants and error types
#pragma once

#include <stdexcept>
#include <string>

namespace dwell {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Self-inconsistent or out-of-range configuration.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// State does not fit its grid: tail mass outside the box, uncertainty
// violation, unsupported extent.
class grid_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evolution left its validity domain: boundary leakage, kick-phase bound,
// NaN/overflow, degenerate tangent.
class stability_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unsupported file content.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A fit could not be performed on the given series.
class fit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dwell
