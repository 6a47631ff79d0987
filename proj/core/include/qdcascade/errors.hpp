#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qdcascade {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed file header or unparsable content.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// File ended in the middle of a record.
class TruncationError : public Error {
  public:
    TruncationError(std::string const &what, std::uint64_t byte_offset)
        : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    [[nodiscard]] std::uint64_t byte_offset() const noexcept {
        return byte_offset_;
    }

  private:
    std::uint64_t byte_offset_;
};

class IoError : public Error {
  public:
    using Error::Error;
};

/// Requested window lies outside the data range.
class RangeError : public Error {
  public:
    using Error::Error;
};

/// A caller-side precondition was violated (unsorted input, missing
/// metadata, invalid model parameters).
class ContractError : public Error {
  public:
    using Error::Error;
};

/// Picosecond timeline would overflow 64 bits.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Empty input where data is required.
class EmptyInputError : public Error {
  public:
    using Error::Error;
};

/// Nonlinear or linear fit could not produce a result.
class FitError : public Error {
  public:
    using Error::Error;
};

/// Fringe scan sampled below two points per fringe.
class AliasingError : public FitError {
  public:
    using FitError::FitError;
};

/// Configuration problem; carries the offending key path.
class ConfigError : public Error {
  public:
    ConfigError(std::string key, std::string const &what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    [[nodiscard]] std::string const &key() const noexcept { return key_; }

  private:
    std::string key_;
};

} // namespace qdcascade
