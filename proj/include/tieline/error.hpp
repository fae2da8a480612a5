#pragma once

#include <stdexcept>
#include <string>

namespace tieline {

// Root of every error the library throws. The CLI maps each family onto an
// exit code, so new error kinds should derive from one of the three below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or semantically invalid input (case files, reports, options).
class InputError : public Error {
 public:
  InputError(std::string code, const std::string& what)
      : Error(code + ": " + what), code_(std::move(code)) {}

  // Stable, named identifier of the violated rule, e.g. "tie_endpoint_not_boundary".
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// A solver could not deliver a trustworthy answer: infeasibility of a model
// assumed feasible, iteration caps, numerical breakdown, protocol violations.
class SolverError : public Error {
 public:
  SolverError(std::string code, const std::string& what)
      : Error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Two independent computations that must agree did not.
class CrossCheckError : public Error {
 public:
  using Error::Error;
};

}  // namespace tieline
