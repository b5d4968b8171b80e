#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rnp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidInstrumentError : public Error {
public:
  using Error::Error;
};

class MalformedQuoteError : public Error {
public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
public:
  using Error::Error;
};

class InvalidProbabilityError : public Error {
public:
  using Error::Error;
};

/// The risk-neutral set is empty (the market admits arbitrage).
class EmptySetError : public Error {
public:
  using Error::Error;
};

class NumericalFailureError : public Error {
public:
  NumericalFailureError(const std::string& what, std::string status)
      : Error(what + " (solver status: " + status + ")"), status_(std::move(status)) {}

  const std::string& status() const noexcept { return status_; }

private:
  std::string status_;
};

class DegenerateDenominatorError : public Error {
public:
  DegenerateDenominatorError(double min_denominator, double delta_denom)
      : Error("denominator can vanish over the risk-neutral set: min E g = " +
              std::to_string(min_denominator) + " < delta_denom = " +
              std::to_string(delta_denom)),
        min_denominator_(min_denominator) {}

  double min_denominator() const noexcept { return min_denominator_; }

private:
  double min_denominator_;
};

class InvalidReferenceError : public Error {
public:
  using Error::Error;
};

/// Moment fit collapsed to a point mass. Carries the log-mean, which is still defined.
class DegenerateFitError : public Error {
public:
  explicit DegenerateFitError(double mu)
      : Error("log-normal fit is degenerate (sigma == 0)"), mu_(mu) {}

  double mu() const noexcept { return mu_; }

private:
  double mu_;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class EmptyMarketError : public Error {
public:
  using Error::Error;
};

} // namespace rnp
