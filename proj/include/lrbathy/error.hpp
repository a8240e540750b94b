#pragma once

#include <stdexcept>
#include <string>

namespace lrb {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (files, point sets, configuration).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A query outside the parameter domain of a surface.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double nearest_u, double nearest_v)
      : Error(what), nearest_u_(nearest_u), nearest_v_(nearest_v) {}

  double nearest_u() const { return nearest_u_; }
  double nearest_v() const { return nearest_v_; }

 private:
  double nearest_u_;
  double nearest_v_;
};

/// An illegal mesh refinement request.
class RefinementError : public Error {
 public:
  using Error::Error;
};

/// The linear system of an approximation step could not be solved.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrb
