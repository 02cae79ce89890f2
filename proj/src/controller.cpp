#include "screwplan/controller.hpp"

#include "screwplan/error.hpp"
#include "screwplan/tsia.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace screwplan {

void ControllerParams::validate() const {
  if (!(lambda_e > 0.0)) throw Error(ErrorCode::InvalidInput, "lambda_e must be positive");
  if (!(lambda_d >= 0.0)) throw Error(ErrorCode::InvalidInput, "lambda_d must be non-negative");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidInput, "dt must be positive");
  if (!(nullspace_gain >= 0.0)) throw Error(ErrorCode::InvalidInput, "nullspace_gain must be non-negative");
  if (qdot_max.size() > 0 && !(qdot_max.array() > 0.0).all()) {
    throw Error(ErrorCode::InvalidInput, "velocity limits must be positive");
  }
}

namespace {

// x_d with the sign that puts x_m* x_d on the short side.
UnitDualQuaternion aligned_desired(const UnitDualQuaternion& x_m, const UnitDualQuaternion& x_d) {
  const UnitDualQuaternion x_e = x_m.conj() * x_d;
  return x_e.primary().w < 0.0 ? -x_d : x_d;
}

}  // namespace

Vec8 spatial_error(const UnitDualQuaternion& x_m, const UnitDualQuaternion& x_d) {
  const UnitDualQuaternion x_e = x_m.conj() * aligned_desired(x_m, x_d);
  return DualQuaternion::identity().vec() - x_e.vec();
}

Eigen::Matrix<double, 8, Eigen::Dynamic> extended_jacobian(const UnitDualQuaternion& x_d,
                                                           const PoseJacobian& j) {
  return hamilton_minus(x_d.value()) * c8() * j;
}

Eigen::MatrixXd damped_pseudoinverse(const Eigen::MatrixXd& n, double lambda) {
  Eigen::MatrixXd a = n.transpose() * n;
  a.diagonal().array() += lambda * lambda;
  return a.ldlt().solve(n.transpose());
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& n) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(n);
  cod.setThreshold(1e-10);
  return cod.pseudoInverse();
}

Eigen::VectorXd nullspace_joint_limit_task(const SerialManipulator& model, const JointConfig& q,
                                           const Eigen::MatrixXd& primary_n, double gain) {
  check_dimension(model, q);
  const Eigen::VectorXd lo = model.lower_limits();
  const Eigen::VectorXd hi = model.upper_limits();
  const Eigen::ArrayXd range = (hi - lo).array();
  const Eigen::VectorXd grad = ((q - 0.5 * (lo + hi)).array() / range.square()).matrix();
  const Eigen::MatrixXd projector =
      Eigen::MatrixXd::Identity(q.size(), q.size()) - pseudoinverse(primary_n) * primary_n;
  return -gain * projector * grad;
}

UnitDualQuaternion obstacle_constrained_desired(const UnitDualQuaternion& x_m, const UnitDualQuaternion& x_d,
                                                const Vec3& v_ee, const Vec3& eta, ObstacleMode mode) {
  const double en = eta.norm();
  if (!(en > 1e-12)) throw Error(ErrorCode::DegenerateGeometry, "obstacle normal has zero length");
  const Vec3 eta_w = eta / en;
  const UnitDualQuaternion rel = shortest(x_m.conj() * x_d);
  const Quaternion r_rel = rel.rotation();
  const Vec3 t_rel = rel.translation();
  // Normal in the end-effector frame, where the relative translation lives.
  const Vec3 eta_b = x_m.rotation().conj().rotate(eta_w);
  const Eigen::Matrix3d tangent = Eigen::Matrix3d::Identity() - eta_b * eta_b.transpose();

  if (mode == ObstacleMode::Literal) {
    // x_m exp(log(rel) - eps t/2), then the tangent translation scaled by the speed.
    const DualQuaternion l = log(rel);
    const DualQuaternion y{l.primary, l.dual - Quaternion::pure(0.5 * t_rel)};
    const UnitDualQuaternion base = x_m * exp(y);
    const Vec3 shift = v_ee.norm() * (tangent * (0.5 * t_rel));
    const DualQuaternion bumped = base.value() + DualQuaternion{Quaternion{}, Quaternion::pure(shift)} * base.value();
    return UnitDualQuaternion::normalized(bumped);
  }

  const bool approaching = v_ee.dot(-eta_w) > 0.0;
  const bool pulls_inward = t_rel.dot(eta_b) < 0.0;
  if (!approaching && !pulls_inward) return x_d;
  return x_m * UnitDualQuaternion::from_rotation_translation(r_rel.normalized(), tangent * t_rel);
}

ControlOutput control_step(const SerialManipulator& model, const ControlState& state,
                           const UnitDualQuaternion& x_d, const ControllerParams& params,
                           const std::optional<SurfaceConstraint>& surface) {
  check_dimension(model, state.q);
  const KinematicState ks = evaluate(model, state.q);

  ControlOutput out;
  out.desired = x_d;
  if (surface) {
    out.desired = obstacle_constrained_desired(state.x_m, x_d, state.v_ee, surface->normal,
                                               params.obstacle_mode);
    out.surface_active = true;
  }
  const UnitDualQuaternion target = aligned_desired(state.x_m, out.desired);
  out.error = spatial_error(state.x_m, target);

  const Eigen::MatrixXd n = extended_jacobian(target, ks.jacobian);
  // d/dt vec(e) = -N qdot, so qdot = N+ lambda e gives exponential decay.
  Eigen::VectorXd qdot = damped_pseudoinverse(n, params.lambda_d) * (params.lambda_e * out.error);
  if (params.nullspace_gain > 0.0 && model.dof() > 1) {
    qdot += nullspace_joint_limit_task(model, state.q, n, params.nullspace_gain);
  }

  if (surface) {
    const Vec3 eta = surface->normal.normalized();
    const Eigen::RowVectorXd a = eta.transpose() * translation_jacobian(ks.pose, ks.jacobian);
    const double inward = a.dot(qdot);
    const double aa = a.squaredNorm();
    if (inward < 0.0 && aa > 1e-18) qdot -= a.transpose() * (inward / aa);
  }

  const Eigen::VectorXd limit = params.qdot_max.size() == model.dof() ? params.qdot_max : model.max_velocities();
  double scale = 1.0;
  for (Eigen::Index i = 0; i < qdot.size(); ++i) {
    const double m = std::abs(qdot[i]);
    if (m > limit[i]) scale = std::min(scale, limit[i] / m);
  }
  if (scale < 1.0) {
    qdot *= scale;
    out.clipped = true;
  }
  out.qdot = std::move(qdot);
  return out;
}

IntegrationResult integrate(const SerialManipulator& model, const JointConfig& q, const Eigen::VectorXd& qdot,
                            double dt) {
  check_dimension(model, q);
  check_dimension(model, qdot);
  IntegrationResult r{q + dt * qdot, false};
  const Eigen::VectorXd lo = model.lower_limits();
  const Eigen::VectorXd hi = model.upper_limits();
  for (Eigen::Index i = 0; i < r.q.size(); ++i) {
    if (r.q[i] < lo[i]) {
      r.q[i] = lo[i];
      r.limit_hit = true;
    } else if (r.q[i] > hi[i]) {
      r.q[i] = hi[i];
      r.limit_hit = true;
    }
  }
  return r;
}

TrackResult track_pose(const SerialManipulator& model, const JointConfig& q0, const UnitDualQuaternion& x_d,
                       const ControllerParams& params, double tolerance, int max_steps) {
  params.validate();
  TrackResult r;
  r.q = q0;
  r.x = forward_kinematics(model, q0);
  r.error = goal_error(r.x, x_d);
  while (r.error > tolerance && r.steps < max_steps) {
    const ControlOutput u = control_step(model, {r.q, r.x, Vec3::Zero()}, x_d, params);
    r.q = integrate(model, r.q, u.qdot, params.dt).q;
    r.x = forward_kinematics(model, r.q);
    r.error = goal_error(r.x, x_d);
    ++r.steps;
  }
  r.converged = r.error <= tolerance;
  return r;
}

}  // namespace screwplan
