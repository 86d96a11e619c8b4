#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace momident {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, schema violations, invalid topology.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular systems, gimbal lock, divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace momident
