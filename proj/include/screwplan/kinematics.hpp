#pragma once

// Serial-manipulator kinematics in product-of-exponentials form.
//
// Every joint is described by its screw axis in the home (zero) configuration,
// expressed in the base frame. With E_i(q_i) = exp(q_i/2 xi_i), the end-effector
// pose is FK(q) = B E_1(q_1) ... E_n(q_n) M, where B is the base pose and M the
// end-effector pose at q = 0 relative to the base.

#include "screwplan/dq.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace screwplan {

using JointConfig = Eigen::VectorXd;
using PoseJacobian = Eigen::Matrix<double, 8, Eigen::Dynamic>;

enum class JointType { Revolute, Prismatic };

struct Joint {
  std::string name;
  JointType type = JointType::Revolute;
  Vec3 axis = Vec3::UnitZ();   ///< unit direction
  Vec3 point = Vec3::Zero();   ///< any point on the axis (ignored for prismatic joints)
  double lower = -3.141592653589793;
  double upper = 3.141592653589793;
  double max_velocity = 2.0;   ///< rad/s or m/s
};

class SerialManipulator {
 public:
  /// Validates limits (lower < upper) and axes; `home` is the end-effector pose
  /// at the zero configuration relative to the base.
  SerialManipulator(std::string name, std::vector<Joint> joints, UnitDualQuaternion base,
                    UnitDualQuaternion home);

  const std::string& name() const { return name_; }
  int dof() const { return static_cast<int>(joints_.size()); }
  const std::vector<Joint>& joints() const { return joints_; }
  const UnitDualQuaternion& base() const { return base_; }
  const UnitDualQuaternion& home() const { return home_; }

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  Eigen::VectorXd max_velocities() const;
  JointConfig mid_range() const;

  /// Same chain mounted at a different base pose.
  SerialManipulator with_base(const UnitDualQuaternion& base) const;

  /// Screw of joint i as the dual vector xi = w + eps (p x w), or eps w for a
  /// prismatic joint, in the base frame at q = 0.
  const DualQuaternion& screw(int i) const { return screws_[static_cast<std::size_t>(i)]; }
  /// exp(q/2 xi_i) in closed form.
  UnitDualQuaternion joint_motion(int i, double q) const;

 private:
  std::string name_;
  std::vector<Joint> joints_;
  UnitDualQuaternion base_;
  UnitDualQuaternion home_;
  std::vector<DualQuaternion> screws_;
};

/// End-effector pose in the world frame.
UnitDualQuaternion forward_kinematics(const SerialManipulator& model, const JointConfig& q);

/// 8 x n matrix with vec(dx/dt) = J qdot.
PoseJacobian pose_jacobian(const SerialManipulator& model, const JointConfig& q);

struct KinematicState {
  UnitDualQuaternion pose;
  PoseJacobian jacobian;
};

/// Pose and Jacobian from one pass over the chain.
KinematicState evaluate(const SerialManipulator& model, const JointConfig& q);

/// 3 x n map from qdot to the world-frame velocity of the end-effector origin.
Eigen::Matrix<double, 3, Eigen::Dynamic> translation_jacobian(const UnitDualQuaternion& x,
                                                             const PoseJacobian& j);

/// Upper bound on the distance between the base origin and the end-effector.
double reach_bound(const SerialManipulator& model);

// --- model files -----------------------------------------------------------

/// Loads a model from a YAML file, or from the bundled set when `path_or_name`
/// names one of bundled_robot_names() and no such file exists.
SerialManipulator load_robot(const std::string& path_or_name);
SerialManipulator parse_robot(std::string_view yaml_text);
std::string to_yaml(const SerialManipulator& model);
std::vector<std::string> bundled_robot_names();

// --- DH conversion for fixture authoring -------------------------------------

enum class DhConvention {
  Standard,  ///< A_i = Rz(theta) Tz(d) Tx(a) Rx(alpha); joint i moves about z_{i-1}
  Modified,  ///< A_i = Rx(alpha) Tx(a) Rz(theta) Tz(d); joint i moves about z_i
};

struct DhRow {
  double a = 0.0;
  double d = 0.0;
  double alpha = 0.0;
  double theta = 0.0;  ///< fixed offset added to the joint variable
  JointType type = JointType::Revolute;
  double lower = -3.141592653589793;
  double upper = 3.141592653589793;
  double max_velocity = 2.0;
};

/// Converts a DH table to screw form. `flange` is appended after the last
/// link frame and `base` places the chain in the world.
SerialManipulator from_dh(std::string name, const std::vector<DhRow>& rows, DhConvention convention,
                          const UnitDualQuaternion& flange = {}, const UnitDualQuaternion& base = {});

/// Throws DimensionMismatch unless q has model.dof() entries.
void check_dimension(const SerialManipulator& model, const JointConfig& q);

}  // namespace screwplan
