#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace jflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments: grid mismatch, non-finite data, bad tolerances.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A Hermitian form that had to be positive definite was not.
class PositivityError : public Error {
public:
  PositivityError(std::string what, std::size_t index, std::array<double, 4> location,
                  double margin)
      : Error(std::move(what)), index(index), location(location), margin(margin) {}

  std::size_t index;
  std::array<double, 4> location;
  double margin;
};

/// The class pair violates c [X] - [W] > 0.
class ConeConditionError : public Error {
public:
  ConeConditionError(std::string what, double margin) : Error(std::move(what)), margin(margin) {}
  double margin;
};

/// Too many consecutive step rejections in the time integrator.
class StiffnessError : public Error {
public:
  StiffnessError(std::string what, double t) : Error(std::move(what)), t(t) {}
  double t;
};

/// Newton iteration failed to reach tolerance.
class ConvergenceError : public Error {
public:
  ConvergenceError(std::string what, std::vector<double> residuals)
      : Error(std::move(what)), residuals(std::move(residuals)) {}
  std::vector<double> residuals;
};

/// Structured input could not be parsed or validated; carries every problem found.
class ConfigError : public Error {
public:
  explicit ConfigError(std::vector<std::string> problems);
  std::vector<std::string> problems;
};

/// Persisted artifact could not be read back.
class FormatError : public Error {
public:
  using Error::Error;
};

} // namespace jflow
