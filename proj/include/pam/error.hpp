#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument, inconsistent shapes or non-finite data.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Experiment or solver configuration rejected; `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A metric is not defined for the given map (zero peak, empty zone, ...).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class SolverDivergence : public Error {
 public:
  SolverDivergence(std::size_t iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration), detail_(what) {}

  std::size_t iteration() const noexcept { return iteration_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t iteration_;
  std::string detail_;
};

}  // namespace pam
