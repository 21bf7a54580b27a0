#pragma once

#include <stdexcept>
#include <string>

namespace codedq {

/// Invalid parameter value (probability outside [0,1], negative rate, ...).
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Structurally inconsistent configuration (mismatched block lengths,
/// unknown BCH parameters, payload exhausted by header, ...).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Operation not defined for the given inputs (e.g. occupancy of a BSC).
class UnsupportedError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Numerical breakdown: singular system, non-convergent quadrature or
/// fixed-point iteration. Carries residual diagnostics in the message.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Requested quantity cannot be resolved at the computed precision
/// (e.g. tail probability beyond the solved horizon).
class PrecisionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace codedq
