#pragma once

#include <stdexcept>
#include <string>

namespace pvcoat {

// Base for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad scenario/config/CLI input. Maps to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Simulation state became non-finite. Maps to exit code 2.
class NumericalDivergence : public Error {
 public:
  using Error::Error;
};

// Wrench demands a negative squared rotor speed or exceeds the speed limit.
class UnrealizableWrench : public Error {
 public:
  UnrealizableWrench(const std::string& what, bool saturated)
      : Error(what), saturated_(saturated) {}
  // true: a rotor hit max_rotor_speed; false: negative thrust demanded
  bool saturated() const { return saturated_; }

 private:
  bool saturated_;
};

// rho/h combination outside the ground-effect model's validity range.
class InvalidModel : public Error {
 public:
  using Error::Error;
};

// Least-squares fit has no information (all regressors zero).
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

// Point cloud has no 3 non-collinear points.
class DegenerateCloud : public Error {
 public:
  using Error::Error;
};

class TooFewPoints : public Error {
 public:
  using Error::Error;
};

// Largest connected component holds less than half the inliers.
class FragmentedCloud : public Error {
 public:
  using Error::Error;
};

class NonConvex : public Error {
 public:
  using Error::Error;
};

class SpacingTooLarge : public Error {
 public:
  using Error::Error;
};

class DegenerateThrust : public Error {
 public:
  using Error::Error;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

}  // namespace pvcoat
