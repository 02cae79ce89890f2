#pragma once

// Kinematic pose controller on the error e = 1 - x_m* x_d.

#include "screwplan/dq.hpp"
#include "screwplan/kinematics.hpp"

#include <Eigen/Core>

#include <optional>

namespace screwplan {

enum class ObstacleMode {
  /// Remove the normal part of the relative translation and re-compose on the manifold.
  Tangent,
  /// Additive form scaled by the end-effector speed; kept for comparison.
  Literal,
};

struct ControllerParams {
  double lambda_e = 10.0;
  /// Damping of the pseudoinverse.
  double lambda_d = 0.01;
  double dt = 1e-3;
  /// Per-joint speed limits; empty uses the model's.
  Eigen::VectorXd qdot_max;
  double nullspace_gain = 1.0;
  ObstacleMode obstacle_mode = ObstacleMode::Tangent;

  void validate() const;
};

struct ControlState {
  JointConfig q;
  UnitDualQuaternion x_m;
  Vec3 v_ee = Vec3::Zero();
};

/// Outward unit normal of an obstacle surface near the end-effector, world frame.
struct SurfaceConstraint {
  Vec3 normal = Vec3::UnitZ();
};

/// vec(1 - x_m* x_d) with x_m* x_d sign-normalized to a non-negative scalar part.
Vec8 spatial_error(const UnitDualQuaternion& x_m, const UnitDualQuaternion& x_d);

/// N = H-(x_d) C8 J, the map from joint velocities to -d/dt vec(e).
Eigen::Matrix<double, 8, Eigen::Dynamic> extended_jacobian(const UnitDualQuaternion& x_d,
                                                           const PoseJacobian& j);

/// N^T (N N^T + lambda^2 I)^-1.
Eigen::MatrixXd damped_pseudoinverse(const Eigen::MatrixXd& n, double lambda);
/// Moore-Penrose pseudoinverse.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& n);

struct ControlOutput {
  Eigen::VectorXd qdot;
  Vec8 error = Vec8::Zero();
  /// Desired pose after the surface modification (equals x_d without one).
  UnitDualQuaternion desired;
  bool clipped = false;
  bool surface_active = false;
};

/// One control update. With a surface constraint the desired pose is bent
/// onto the tangent plane and any joint velocity component that would move
/// the end-effector into the surface is removed.
ControlOutput control_step(const SerialManipulator& model, const ControlState& state,
                           const UnitDualQuaternion& x_d, const ControllerParams& params,
                           const std::optional<SurfaceConstraint>& surface = std::nullopt);

/// -gain (I - N+ N) grad H for H = 1/2 sum((q - mid) / range)^2.
Eigen::VectorXd nullspace_joint_limit_task(const SerialManipulator& model, const JointConfig& q,
                                           const Eigen::MatrixXd& primary_n, double gain = 1.0);

/// Desired pose with the translation towards the surface removed. `eta` is
/// the world-frame outward normal.
UnitDualQuaternion obstacle_constrained_desired(const UnitDualQuaternion& x_m, const UnitDualQuaternion& x_d,
                                                const Vec3& v_ee, const Vec3& eta,
                                                ObstacleMode mode = ObstacleMode::Tangent);

struct IntegrationResult {
  JointConfig q;
  bool limit_hit = false;
};

/// Explicit Euler step clamped to the joint limits.
IntegrationResult integrate(const SerialManipulator& model, const JointConfig& q, const Eigen::VectorXd& qdot,
                            double dt);

struct TrackResult {
  JointConfig q;
  UnitDualQuaternion x;
  double error = 0.0;
  int steps = 0;
  bool converged = false;
};

/// Runs the controller from q0 until goal_error(FK(q), x_d) <= tolerance or
/// max_steps; a plain differential IK when used without obstacles.
TrackResult track_pose(const SerialManipulator& model, const JointConfig& q0, const UnitDualQuaternion& x_d,
                       const ControllerParams& params, double tolerance, int max_steps);

}  // namespace screwplan
