#pragma once

#include <stdexcept>
#include <string>

namespace impactlab {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or missing input data (files, configs, malformed CSV).
class InputError : public Error {
 public:
  using Error::Error;
};

// Two day lists with no common trading day.
class EmptyPanelError : public Error {
 public:
  using Error::Error;
};

// Lag or slot index outside the session grid.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Volume normalization impossible (all-zero volumes).
class NormalizationError : public Error {
 public:
  using Error::Error;
};

// Least-squares fit could not be performed (too few usable points).
class FitError : public Error {
 public:
  using Error::Error;
};

// Linear system rejected; carries the estimated condition number.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

// Stochastic search exhausted its budget without a finite objective.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace impactlab
