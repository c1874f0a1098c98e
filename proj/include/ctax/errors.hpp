#pragma once

#include <stdexcept>
#include <string>

namespace ctax {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a data invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A model that has no feasible point, e.g. a day whose reserve requirement
// exceeds the fleet.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Solver breakdown or limit hit where a proven result was required.
class SolveError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctax
