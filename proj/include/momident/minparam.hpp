#pragma once

#include "momident/common.hpp"
#include "momident/dataset.hpp"
#include "momident/kinematics.hpp"
#include "momident/robot_model.hpp"

#include <Eigen/SparseCore>

#include <span>
#include <string>
#include <vector>

namespace momident {

/// Coefficients of the column dependencies created by one revolute joint.
struct DependencyVectors {
  Eigen::Matrix<double, 6, 1> t1;
  Eigen::Matrix<double, 6, 1> t2;
  Vec3 t3;
};

DependencyVectors dependency_vectors(double twist, const Vec3& offset);

/// Grouping vectors that move a child's redundant parameters into its parent.
struct GroupingVectors {
  Vec10 k1;
  Vec10 k2;
  Vec10 k3;
};

GroupingVectors grouping_vectors(double twist, const Vec3& offset);

/// Entries of a non-base link parameter vector that survive the reduction (0-based).
inline constexpr int kKeptEntries[7] = {0, 2, 3, 4, 5, 7, 8};

/**
 * @brief Linear map from standard to minimal parameters.
 *
 * Columns of the map index the stacked parameter vectors of the identified
 * links. Each minimal parameter corresponds to one kept column of the system
 * kinematic matrix.
 */
struct MinimalBasis {
  std::vector<int> links;  ///< identified link indices, base first
  Eigen::SparseMatrix<double, Eigen::RowMajor> map;
  std::vector<int> kept_columns;  ///< column of the system matrix for each minimal parameter
  std::vector<int> owner;         ///< position in `links` for each minimal parameter

  int size() const { return static_cast<int>(kept_columns.size()); }
  int standard_size() const { return 10 * static_cast<int>(links.size()); }

  Eigen::VectorXd reduce(const Eigen::VectorXd& standard) const;
  Eigen::MatrixXd reduce_skm(const Eigen::MatrixXd& skm) const;
};

/// Recursive grouping over the identified links. Wheels are excluded.
MinimalBasis minimal_basis(const RobotModel& model);

/// Name of a standard parameter, e.g. "I1xx", "m2", "m3·a3z".
std::string standard_parameter_name(int link, int entry);

/// Human-readable expression of each minimal parameter, coefficients rounded to 4 decimals.
std::vector<std::string> minimal_parameter_expressions(const RobotModel& model, const MinimalBasis& basis);

/// Numbered expression listing, one line per minimal parameter.
std::string minimal_parameter_report(const RobotModel& model);

/// Map as CSV with a header row of standard parameter names.
std::string basis_csv(const MinimalBasis& basis);

struct Regressor {
  Eigen::MatrixXd G;
  Eigen::VectorXd m;
  std::vector<double> times;
};

/// Momentum contribution of the wheels at one state.
Vec6 wheel_momentum(const RobotModel& model, std::span<const LinkState> states);

/// Minimal system matrix at one state.
Eigen::MatrixXd minimal_skm(const MinimalBasis& basis, std::span<const LinkState> states);

/**
 * @brief Stacks minimal system matrices and the applied momentum over a dataset.
 *
 * The base angular velocity is rebuilt from the Euler angles and rates.
 * @throws NumericalError when there are fewer rows than parameters.
 */
Regressor regressor(const RobotModel& model, const Dataset& data, const MinimalBasis& basis);

}  // namespace momident
