#pragma once

#include <stdexcept>
#include <string>

namespace orbitgauge {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };
struct ArgumentError : Error { using Error::Error; };
struct InvalidCover : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct InconsistentInput : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Raised when a certified answer would need more working bits than allowed.
struct PrecisionExhausted : Error { using Error::Error; };

}  // namespace orbitgauge
