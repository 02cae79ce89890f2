#include "screwplan/kinematics.hpp"

#include "bundled_robots.hpp"
#include "screwplan/error.hpp"
#include "screwplan/pose_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace screwplan {

namespace {

DualQuaternion joint_screw(const Joint& j) {
  if (j.type == JointType::Prismatic) return DualQuaternion::pure(Vec3::Zero(), j.axis);
  return DualQuaternion::pure(j.axis, j.point.cross(j.axis));
}

}  // namespace

SerialManipulator::SerialManipulator(std::string name, std::vector<Joint> joints,
                                     UnitDualQuaternion base, UnitDualQuaternion home)
    : name_(std::move(name)), joints_(std::move(joints)), base_(base), home_(home) {
  if (joints_.empty()) throw Error(ErrorCode::InvalidInput, "robot '" + name_ + "' has no joints");
  screws_.reserve(joints_.size());
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    Joint& j = joints_[i];
    if (j.name.empty()) j.name = "joint" + std::to_string(i + 1);
    const double n = j.axis.norm();
    if (!(n > 1e-12) || !j.axis.allFinite() || !j.point.allFinite()) {
      throw Error(ErrorCode::InvalidInput, "joint '" + j.name + "' has an invalid axis");
    }
    j.axis /= n;
    if (!(j.lower < j.upper)) {
      std::ostringstream msg;
      msg << "joint '" << j.name << "' has lower limit " << j.lower << " >= upper limit " << j.upper;
      throw Error(ErrorCode::InconsistentLimits, msg.str());
    }
    if (!(j.max_velocity > 0.0)) {
      throw Error(ErrorCode::InconsistentLimits, "joint '" + j.name + "' has non-positive velocity limit");
    }
    screws_.push_back(joint_screw(j));
  }
}

Eigen::VectorXd SerialManipulator::lower_limits() const {
  Eigen::VectorXd v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[static_cast<std::size_t>(i)].lower;
  return v;
}

Eigen::VectorXd SerialManipulator::upper_limits() const {
  Eigen::VectorXd v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[static_cast<std::size_t>(i)].upper;
  return v;
}

Eigen::VectorXd SerialManipulator::max_velocities() const {
  Eigen::VectorXd v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[static_cast<std::size_t>(i)].max_velocity;
  return v;
}

JointConfig SerialManipulator::mid_range() const { return 0.5 * (lower_limits() + upper_limits()); }

SerialManipulator SerialManipulator::with_base(const UnitDualQuaternion& base) const {
  return SerialManipulator(name_, joints_, base, home_);
}

UnitDualQuaternion SerialManipulator::joint_motion(int i, double q) const {
  const Joint& j = joints_[static_cast<std::size_t>(i)];
  const DualQuaternion& xi = screws_[static_cast<std::size_t>(i)];
  if (j.type == JointType::Prismatic) {
    return UnitDualQuaternion::from_translation(q * j.axis);
  }
  const double s = std::sin(0.5 * q);
  const double c = std::cos(0.5 * q);
  return UnitDualQuaternion::checked(
      DualQuaternion{Quaternion{c, s * j.axis}, Quaternion{0.0, s * xi.dual.vec3()}});
}

void check_dimension(const SerialManipulator& model, const JointConfig& q) {
  if (q.size() != model.dof()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(model.dof()) +
                                                  " joint values for '" + model.name() + "', got " +
                                                  std::to_string(q.size()));
  }
}

UnitDualQuaternion forward_kinematics(const SerialManipulator& model, const JointConfig& q) {
  check_dimension(model, q);
  UnitDualQuaternion x = model.base();
  for (int i = 0; i < model.dof(); ++i) x = x * model.joint_motion(i, q[i]);
  return (x * model.home()).renormalized();
}

KinematicState evaluate(const SerialManipulator& model, const JointConfig& q) {
  check_dimension(model, q);
  const int n = model.dof();
  std::vector<DualQuaternion> world_screws(static_cast<std::size_t>(n));
  UnitDualQuaternion l = model.base();
  for (int i = 0; i < n; ++i) {
    // Screw of joint i carried to the world frame by the motion of the joints before it.
    world_screws[static_cast<std::size_t>(i)] = l.value() * model.screw(i) * l.conj().value();
    l = l * model.joint_motion(i, q[i]);
  }
  KinematicState out{(l * model.home()).renormalized(), PoseJacobian(8, n)};
  for (int i = 0; i < n; ++i) {
    out.jacobian.col(i) = (0.5 * world_screws[static_cast<std::size_t>(i)] * out.pose.value()).vec();
  }
  return out;
}

PoseJacobian pose_jacobian(const SerialManipulator& model, const JointConfig& q) {
  return evaluate(model, q).jacobian;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> translation_jacobian(const UnitDualQuaternion& x,
                                                             const PoseJacobian& j) {
  // p = 2 D P*, so dp = 2 (dD P* + D dP*).
  Eigen::Matrix4d c4 = Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
  const Eigen::Matrix4d a = hamilton_plus4(x.dual()) * c4;
  const Eigen::Matrix4d b = hamilton_minus4(x.primary().conj());
  const Eigen::Matrix<double, 4, Eigen::Dynamic> jp =
      2.0 * (a * j.topRows<4>() + b * j.bottomRows<4>());
  return jp.bottomRows<3>();
}

double reach_bound(const SerialManipulator& model) {
  double bound = 0.0;
  Vec3 prev = Vec3::Zero();
  for (const Joint& j : model.joints()) {
    if (j.type == JointType::Prismatic) {
      bound += std::max(std::abs(j.lower), std::abs(j.upper));
      continue;
    }
    bound += (j.point - prev).norm();
    prev = j.point;
  }
  return bound + (model.home().translation() - prev).norm();
}

// --- YAML ----------------------------------------------------------------------

namespace {

std::vector<double> read_numbers(const YAML::Node& node, const std::string& what) {
  if (!node) throw Error(ErrorCode::ParseError, "missing field '" + what + "'");
  if (!node.IsSequence()) throw Error(ErrorCode::ParseError, "field '" + what + "' must be a list");
  std::vector<double> out;
  for (const auto& v : node) out.push_back(v.as<double>());
  return out;
}

Vec3 read_vec3(const YAML::Node& node, const std::string& what) {
  const auto v = read_numbers(node, what);
  if (v.size() != 3) throw Error(ErrorCode::ParseError, "field '" + what + "' needs 3 values");
  return {v[0], v[1], v[2]};
}

UnitDualQuaternion read_pose(const YAML::Node& node, const std::string& what) {
  if (!node) return {};
  const auto v = read_numbers(node, what);
  try {
    return pose_from_scalars(v);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, "field '" + what + "': " + e.what());
  }
}

}  // namespace

SerialManipulator parse_robot(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ParseError, std::string("robot file: ") + e.what());
  }
  try {
    if (!root.IsMap()) throw Error(ErrorCode::ParseError, "robot file must be a mapping");
    const std::string name = root["name"] ? root["name"].as<std::string>() : "robot";
    const YAML::Node joints_node = root["joints"];
    if (!joints_node || !joints_node.IsSequence()) {
      throw Error(ErrorCode::ParseError, "robot file needs a 'joints' list");
    }
    const double default_vel = root["max_velocity"] ? root["max_velocity"].as<double>() : 2.0;
    std::vector<Joint> joints;
    for (const auto& jn : joints_node) {
      Joint j;
      if (jn["name"]) j.name = jn["name"].as<std::string>();
      const std::string type = jn["type"] ? jn["type"].as<std::string>() : "revolute";
      if (type == "revolute") {
        j.type = JointType::Revolute;
      } else if (type == "prismatic") {
        j.type = JointType::Prismatic;
      } else {
        throw Error(ErrorCode::ParseError, "unknown joint type '" + type + "'");
      }
      j.axis = read_vec3(jn["axis"], "axis");
      if (jn["point"]) j.point = read_vec3(jn["point"], "point");
      if (jn["limits"]) {
        const auto lim = read_numbers(jn["limits"], "limits");
        if (lim.size() != 2) throw Error(ErrorCode::ParseError, "field 'limits' needs 2 values");
        j.lower = lim[0];
        j.upper = lim[1];
      }
      j.max_velocity = jn["max_velocity"] ? jn["max_velocity"].as<double>() : default_vel;
      joints.push_back(std::move(j));
    }
    if (root["dof"] && root["dof"].as<int>() != static_cast<int>(joints.size())) {
      throw Error(ErrorCode::ParseError, "'dof' is " + root["dof"].as<std::string>() + " but " +
                                             std::to_string(joints.size()) + " joints are listed");
    }
    return SerialManipulator(name, std::move(joints), read_pose(root["base"], "base"),
                             read_pose(root["ee_offset"], "ee_offset"));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ParseError, std::string("robot file: ") + e.what());
  }
}

std::vector<std::string> bundled_robot_names() {
  std::vector<std::string> names;
  for (const auto& [name, body] : detail::bundled_robot_sources()) names.emplace_back(name);
  return names;
}

SerialManipulator load_robot(const std::string& path_or_name) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(path_or_name, ec)) {
    return parse_robot(read_text_file(path_or_name));
  }
  for (const auto& [name, body] : detail::bundled_robot_sources()) {
    if (name == path_or_name) return parse_robot(body);
  }
  throw Error(ErrorCode::Io, "no robot file or bundled model named '" + path_or_name + "'");
}

std::string to_yaml(const SerialManipulator& model) {
  auto list = [](const auto& values) {
    std::string s = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ", ";
      s += format_double(values[i]);
    }
    return s + "]";
  };
  auto vec3 = [&](const Vec3& v) { return list(std::vector<double>{v.x(), v.y(), v.z()}); };
  auto pose = [&](const UnitDualQuaternion& x) {
    const Vec8 v = x.vec();
    return list(std::vector<double>(v.data(), v.data() + 8));
  };

  std::ostringstream os;
  os << "name: " << model.name() << "\n";
  os << "dof: " << model.dof() << "\n";
  os << "base: " << pose(model.base()) << "\n";
  os << "ee_offset: " << pose(model.home()) << "\n";
  os << "joints:\n";
  for (const Joint& j : model.joints()) {
    os << "  - name: " << j.name << "\n";
    os << "    type: " << (j.type == JointType::Revolute ? "revolute" : "prismatic") << "\n";
    os << "    axis: " << vec3(j.axis) << "\n";
    if (j.type == JointType::Revolute) os << "    point: " << vec3(j.point) << "\n";
    os << "    limits: " << list(std::vector<double>{j.lower, j.upper}) << "\n";
    os << "    max_velocity: " << format_double(j.max_velocity) << "\n";
  }
  return os.str();
}

// --- DH ------------------------------------------------------------------------

SerialManipulator from_dh(std::string name, const std::vector<DhRow>& rows, DhConvention convention,
                          const UnitDualQuaternion& flange, const UnitDualQuaternion& base) {
  using U = UnitDualQuaternion;
  auto rot_x = [](double a) { return U::from_axis_angle(Vec3::UnitX(), a); };
  auto rot_z = [](double a) { return U::from_axis_angle(Vec3::UnitZ(), a); };
  auto trans_x = [](double a) { return U::from_translation(a * Vec3::UnitX()); };
  auto trans_z = [](double d) { return U::from_translation(d * Vec3::UnitZ()); };

  std::vector<Joint> joints;
  U frame;  // frame of the previous link at the zero configuration
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DhRow& r = rows[i];
    Joint j;
    j.name = "joint" + std::to_string(i + 1);
    j.type = r.type;
    j.lower = r.lower;
    j.upper = r.upper;
    j.max_velocity = r.max_velocity;
    if (convention == DhConvention::Standard) {
      j.axis = frame.rotation().rotate(Vec3::UnitZ());
      j.point = frame.translation();
      frame = frame * rot_z(r.theta) * trans_z(r.d) * trans_x(r.a) * rot_x(r.alpha);
    } else {
      frame = frame * rot_x(r.alpha) * trans_x(r.a);
      j.axis = frame.rotation().rotate(Vec3::UnitZ());
      j.point = frame.translation();
      frame = frame * rot_z(r.theta) * trans_z(r.d);
    }
    if (j.type == JointType::Prismatic) j.point = Vec3::Zero();
    joints.push_back(std::move(j));
  }
  return SerialManipulator(std::move(name), std::move(joints), base, (frame * flange).renormalized());
}

}  // namespace screwplan
