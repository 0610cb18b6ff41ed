#pragma once

#include <stdexcept>
#include <string>

namespace delaymargin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroPolynomial : public Error {
 public:
  ZeroPolynomial() : Error("polynomial is identically zero") {}
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class RetardedAssumptionViolated : public Error {
 public:
  RetardedAssumptionViolated(int deg_p, int deg_q)
      : Error("system is not retarded: deg P = " + std::to_string(deg_p) +
              " must exceed deg Q = " + std::to_string(deg_q)) {}
};

class IdenticallyZero : public Error {
 public:
  IdenticallyZero()
      : Error("crossing polynomial vanishes identically; every frequency is a crossing") {}
};

class DegenerateCrossing : public Error {
 public:
  using Error::Error;
};

class UnsupportedDescriptor : public Error {
 public:
  using Error::Error;
};

/// The boundary matrix is numerically singular at `omega`; the system has a
/// root on (or within tolerance of) the imaginary axis at this delay.
class SingularOnGrid : public Error {
 public:
  SingularOnGrid(double omega, double norm_estimate)
      : Error("boundary operator singular at omega = " + std::to_string(omega)),
        omega_(omega),
        norm_estimate_(norm_estimate) {}
  double omega() const { return omega_; }
  double norm_estimate() const { return norm_estimate_; }

 private:
  double omega_;
  double norm_estimate_;
};

class NotDoubling : public Error {
 public:
  using Error::Error;
};

class DivergentWeight : public Error {
 public:
  using Error::Error;
};

class Divergent : public Error {
 public:
  using Error::Error;
};

class KernelNotInSpace : public Error {
 public:
  using Error::Error;
};

class UnboundedSymbol : public Error {
 public:
  using Error::Error;
};

}  // namespace delaymargin
