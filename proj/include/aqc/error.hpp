#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aqc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (length mismatch, bad index...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter is outside its admissible domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Problem too large for an exhaustive or dense representation.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Rejection sampling ran out of attempts before collecting enough instances.
class GenerationExhausted : public Error {
 public:
  GenerationExhausted(std::size_t attempts, std::size_t accepted)
      : Error("instance generation exhausted after " + std::to_string(attempts) +
              " attempts (" + std::to_string(accepted) + " accepted, rate " +
              std::to_string(attempts ? double(accepted) / double(attempts) : 0.0) + ")"),
        attempts_(attempts),
        accepted_(accepted) {}

  std::size_t attempts() const noexcept { return attempts_; }
  std::size_t accepted() const noexcept { return accepted_; }
  double acceptance_rate() const noexcept {
    return attempts_ ? double(accepted_) / double(attempts_) : 0.0;
  }

 private:
  std::size_t attempts_;
  std::size_t accepted_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Two levels that must be separated are (numerically) degenerate.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Too little data for a statistic or fit.
class SampleSizeError : public Error {
 public:
  using Error::Error;
};

/// No point of a q(s) curve reaches the irregularity threshold.
class NoIrregularRegion : public Error {
 public:
  using Error::Error;
};

}  // namespace aqc
