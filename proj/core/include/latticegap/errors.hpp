#pragma once

#include <stdexcept>
#include <string>

namespace latticegap {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The lattice definition or configuration is malformed.
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what, int line = -1, int column = -1)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested frequency falls inside a band where the resolvent does not
/// exist (or within the guard margin around it).
class SpectrumViolation : public Error {
 public:
  SpectrumViolation(const std::string& what, double omega)
      : Error(what), omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

/// An iterative scheme exhausted its budget before reaching the tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace latticegap
