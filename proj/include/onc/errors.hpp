#pragma once

#include <stdexcept>
#include <string>

namespace onc {

// Base of every error raised by the library. The harness maps the two
// families below onto process exit codes (1 configuration, 2 numerical).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class UsageError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class IoError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, int step)
      : NumericalError(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class NotStabilizingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Closed loop is stable but contracts slower than the requested gamma.
class GammaTooAggressiveError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BankGenerationError : public NumericalError {
 public:
  BankGenerationError(const std::string& what, int produced)
      : NumericalError(what), produced_(produced) {}
  int produced() const { return produced_; }

 private:
  int produced_;
};

class OracleAccuracyError : public NumericalError {
 public:
  OracleAccuracyError(const std::string& what, int slice)
      : NumericalError(what), slice_(slice) {}
  int slice() const { return slice_; }

 private:
  int slice_;
};

}  // namespace onc
