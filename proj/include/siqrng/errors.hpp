#pragma once

#include <stdexcept>
#include <string>

namespace siqrng {

/// Argument outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// No certified randomness: R_final <= 0 or floor(R_final) == 0.
class EstimationAbort : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Tally cannot support estimation (no detected X-basis events).
class EmptyTallyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnreachableTarget : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NonUnimodalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InsufficientBits : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class LengthMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable file.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace siqrng
