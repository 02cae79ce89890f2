#include "screwplan/sim.hpp"

#include "screwplan/pose_io.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace screwplan {

// --- configuration -----------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ParseError, "config: " + what); }

void check_keys(const YAML::Node& node, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!node.IsMap()) config_error("'" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

std::vector<double> numbers(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) config_error("'" + what + "' must be a list of numbers");
  std::vector<double> out;
  for (const auto& v : n) out.push_back(v.as<double>());
  return out;
}

Eigen::VectorXd vector_of(const YAML::Node& n, const std::string& what) {
  const auto v = numbers(n, what);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

UnitDualQuaternion pose_of(const YAML::Node& n, const std::string& what) {
  try {
    return pose_from_scalars(numbers(n, what));
  } catch (const Error& e) {
    config_error("'" + what + "': " + e.what());
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, T& out) {
  if (parent[key]) out = parent[key].as<T>();
}

std::filesystem::path resolve_path(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.empty() || path.is_absolute() || base.empty()) return path;
  return base / path;
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  try {
    const YAML::Node root = YAML::Load(std::string(yaml_text));
    if (root.IsNull()) return c;
    check_keys(root,
               {"robot", "demo", "scene", "output", "seed", "start_joints", "start_pose", "ik_seed", "goal",
                "planner", "controller", "repet", "sim"},
               "top level");
    if (root["robot"]) {
      const auto r = root["robot"].as<std::string>();
      const auto p = resolve_path(r, base_dir);
      c.robot = std::filesystem::exists(p) ? p.string() : r;
    }
    if (root["demo"]) c.demo = resolve_path(root["demo"].as<std::string>(), base_dir);
    if (root["scene"]) c.scene = resolve_path(root["scene"].as<std::string>(), base_dir);
    if (root["output"]) c.output = resolve_path(root["output"].as<std::string>(), base_dir);
    read(root, "seed", c.seed);
    if (root["start_joints"]) c.start_joints = vector_of(root["start_joints"], "start_joints");
    if (root["start_pose"]) c.start_pose = pose_of(root["start_pose"], "start_pose");
    if (root["ik_seed"]) c.ik_seed = vector_of(root["ik_seed"], "ik_seed");
    if (root["goal"]) c.goal = pose_of(root["goal"], "goal");

    if (const auto n = root["planner"]) {
      check_keys(n, {"tau", "goal_tolerance", "guiding_fraction", "max_iterations"}, "planner");
      read(n, "tau", c.planner.tau_step);
      read(n, "goal_tolerance", c.planner.goal_tolerance);
      read(n, "guiding_fraction", c.planner.guiding_fraction);
      read(n, "max_iterations", c.planner.max_iterations);
    }
    if (const auto n = root["controller"]) {
      check_keys(n, {"lambda_e", "lambda_d", "dt", "qdot_max", "nullspace_gain", "obstacle_mode"}, "controller");
      read(n, "lambda_e", c.controller.lambda_e);
      read(n, "lambda_d", c.controller.lambda_d);
      read(n, "dt", c.controller.dt);
      if (n["qdot_max"]) c.controller.qdot_max = vector_of(n["qdot_max"], "qdot_max");
      read(n, "nullspace_gain", c.controller.nullspace_gain);
      if (n["obstacle_mode"]) {
        const auto m = n["obstacle_mode"].as<std::string>();
        if (m == "tangent") {
          c.controller.obstacle_mode = ObstacleMode::Tangent;
        } else if (m == "literal") {
          c.controller.obstacle_mode = ObstacleMode::Literal;
        } else {
          config_error("obstacle_mode must be 'tangent' or 'literal'");
        }
      }
    }
    if (const auto n = root["repet"]) {
      check_keys(n, {"k_eta", "max_depth", "growth", "max_resamples", "random_samples", "clearance_margin"},
                 "repet");
      read(n, "k_eta", c.repet.k_eta);
      read(n, "max_depth", c.repet.max_depth);
      read(n, "growth", c.repet.growth);
      read(n, "max_resamples", c.repet.max_resamples);
      read(n, "random_samples", c.repet.random_samples);
      read(n, "clearance_margin", c.repet.clearance_margin);
    }
    if (const auto n = root["sim"]) {
      check_keys(n,
                 {"inner_steps", "track_tolerance", "safety_margin", "key_pose_tolerance", "max_key_pose_steps",
                  "max_segment_step", "continuation_limit", "stall_iterations", "translation_noise",
                  "rotation_noise"},
                 "sim");
      read(n, "inner_steps", c.sim.inner_steps);
      read(n, "track_tolerance", c.sim.track_tolerance);
      read(n, "safety_margin", c.sim.safety_margin);
      read(n, "key_pose_tolerance", c.sim.key_pose_tolerance);
      read(n, "max_key_pose_steps", c.sim.max_key_pose_steps);
      read(n, "max_segment_step", c.sim.max_segment_step);
      read(n, "continuation_limit", c.sim.continuation_limit);
      read(n, "stall_iterations", c.sim.stall_iterations);
      read(n, "translation_noise", c.sim.translation_noise);
      read(n, "rotation_noise", c.sim.rotation_noise);
    }
  } catch (const YAML::Exception& e) {
    config_error(e.what());
  }
  c.repet.seed = c.seed;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.parent_path());
}

std::string to_yaml(const ExperimentConfig& c) {
  auto list = [](const Eigen::VectorXd& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s + "]";
  };
  auto pose = [&](const UnitDualQuaternion& x) {
    const Vec8 v = x.vec();
    return list(Eigen::VectorXd(v));
  };
  std::ostringstream os;
  os << "robot: " << c.robot << "\n";
  os << "demo: " << c.demo.string() << "\n";
  if (!c.scene.empty()) os << "scene: " << c.scene.string() << "\n";
  os << "output: " << c.output.string() << "\n";
  os << "seed: " << c.seed << "\n";
  if (c.start_joints) os << "start_joints: " << list(*c.start_joints) << "\n";
  if (c.start_pose) os << "start_pose: " << pose(*c.start_pose) << "\n";
  if (c.ik_seed) os << "ik_seed: " << list(*c.ik_seed) << "\n";
  if (c.goal) os << "goal: " << pose(*c.goal) << "\n";
  os << "planner:\n"
     << "  tau: " << format_double(c.planner.tau_step) << "\n"
     << "  goal_tolerance: " << format_double(c.planner.goal_tolerance) << "\n"
     << "  guiding_fraction: " << format_double(c.planner.guiding_fraction) << "\n"
     << "  max_iterations: " << c.planner.max_iterations << "\n";
  os << "controller:\n"
     << "  lambda_e: " << format_double(c.controller.lambda_e) << "\n"
     << "  lambda_d: " << format_double(c.controller.lambda_d) << "\n"
     << "  dt: " << format_double(c.controller.dt) << "\n";
  if (c.controller.qdot_max.size() > 0) os << "  qdot_max: " << list(c.controller.qdot_max) << "\n";
  os << "  nullspace_gain: " << format_double(c.controller.nullspace_gain) << "\n"
     << "  obstacle_mode: " << (c.controller.obstacle_mode == ObstacleMode::Tangent ? "tangent" : "literal")
     << "\n";
  os << "repet:\n"
     << "  k_eta: " << format_double(c.repet.k_eta) << "\n"
     << "  max_depth: " << c.repet.max_depth << "\n"
     << "  growth: " << format_double(c.repet.growth) << "\n"
     << "  max_resamples: " << c.repet.max_resamples << "\n"
     << "  random_samples: " << c.repet.random_samples << "\n"
     << "  clearance_margin: " << format_double(c.repet.clearance_margin) << "\n";
  os << "sim:\n"
     << "  inner_steps: " << c.sim.inner_steps << "\n"
     << "  track_tolerance: " << format_double(c.sim.track_tolerance) << "\n"
     << "  safety_margin: " << format_double(c.sim.safety_margin) << "\n"
     << "  key_pose_tolerance: " << format_double(c.sim.key_pose_tolerance) << "\n"
     << "  max_key_pose_steps: " << c.sim.max_key_pose_steps << "\n"
     << "  max_segment_step: " << format_double(c.sim.max_segment_step) << "\n"
     << "  continuation_limit: " << c.sim.continuation_limit << "\n"
     << "  stall_iterations: " << c.sim.stall_iterations << "\n"
     << "  translation_noise: " << format_double(c.sim.translation_noise) << "\n"
     << "  rotation_noise: " << format_double(c.sim.rotation_noise) << "\n";
  return os.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  feed(to_yaml(config));
  for (const auto& p : {config.demo, config.scene}) {
    std::error_code ec;
    if (!p.empty() && std::filesystem::is_regular_file(p, ec)) feed(read_text_file(p));
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::Unreachable:
      return 2;
    case ErrorCode::AvoidanceFailure:
    case ErrorCode::DegenerateGeometry:
      return 3;
    default:
      return 4;
  }
}

Stats summarize(const std::vector<double>& samples) {
  Stats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  double var = 0.0;
  for (double v : samples) var += (v - s.mean) * (v - s.mean);
  s.stddev = s.count > 1 ? std::sqrt(var / static_cast<double>(s.count - 1)) : 0.0;
  return s;
}

// --- setup -------------------------------------------------------------------

ExperimentSetup resolve(const ExperimentConfig& config) {
  config.planner.validate();
  config.controller.validate();
  if (config.sim.inner_steps < 1) throw Error(ErrorCode::InvalidInput, "sim.inner_steps must be at least 1");
  if (config.demo.empty()) throw Error(ErrorCode::InvalidInput, "no demonstration given");
  if (config.start_joints.has_value() == config.start_pose.has_value()) {
    throw Error(ErrorCode::InvalidInput, "give exactly one of start_joints and start_pose");
  }

  SerialManipulator model = load_robot(config.robot);
  PosePath demo{collapse_duplicates(read_pose_file(config.demo)), PathKind::Demonstrated};
  if (demo.size() < 2) {
    throw Error(ErrorCode::PathTooShort, "demonstration '" + config.demo.string() + "' has fewer than 2 distinct poses");
  }
  ObstacleScene scene = config.scene.empty() ? ObstacleScene{} : load_scene(config.scene);
  if (config.controller.qdot_max.size() > 0) check_dimension(model, config.controller.qdot_max);

  JointConfig q0;
  if (config.start_joints) {
    q0 = *config.start_joints;
    check_dimension(model, q0);
  } else {
    const JointConfig seed = config.ik_seed ? *config.ik_seed : model.mid_range();
    check_dimension(model, seed);
    ControllerParams ik = config.controller;
    ik.nullspace_gain = 0.0;
    const TrackResult r = track_pose(model, seed, *config.start_pose, ik, 1e-6, 50000);
    if (!r.converged) throw Error(ErrorCode::Unreachable, "start pose is not reachable from the IK seed");
    q0 = r.q;
  }
  const UnitDualQuaternion goal = config.goal ? *config.goal : demo.back();
  return {std::move(model), std::move(demo), std::move(scene), std::move(q0), goal};
}

// --- simulation loop ---------------------------------------------------------

namespace {

class Simulation {
 public:
  Simulation(const ExperimentSetup& setup, const ExperimentConfig& config, ExperimentResult& out)
      : s_(setup), c_(config), out_(out), rng_(config.seed), inside_(setup.scene.obstacles.size(), false) {
    q_ = s_.q0;
    x_true_ = forward_kinematics(s_.model, q_);
    x_meas_ = measure(x_true_);
    out_.record.dof = s_.model.dof();
    record(x_meas_, false);
  }

  const UnitDualQuaternion& measured() const { return x_meas_; }

  StepOutcome execute(const UnitDualQuaternion& target, const PlanStep& step) {
    const auto t0 = std::chrono::steady_clock::now();
    check_stall(step);
    StepOutcome outcome;
    if (auto obstacle = triggered_obstacle()) {
      auto cont = predict(step.ip, step.current, step.guide_index, step.params, c_.sim.continuation_limit);
      if (continuation_collides(cont)) {
        outcome = avoid(*obstacle, cont);
      }
    }
    if (outcome.poses.empty()) {
      for (int k = 0; k < c_.sim.inner_steps; ++k) {
        tick(target, false);
        if (c_.sim.track_tolerance > 0.0 && goal_error(x_meas_, target) <= c_.sim.track_tolerance) break;
      }
      outcome = StepOutcome{{x_meas_}};
    }
    out_.step_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return outcome;
  }

 private:
  UnitDualQuaternion measure(const UnitDualQuaternion& x) {
    if (c_.sim.translation_noise <= 0.0 && c_.sim.rotation_noise <= 0.0) return x;
    std::normal_distribution<double> nt(0.0, std::max(c_.sim.translation_noise, 0.0));
    std::normal_distribution<double> nr(0.0, std::max(c_.sim.rotation_noise, 0.0));
    const Vec3 dt(nt(rng_), nt(rng_), nt(rng_));
    const Vec3 dr(nr(rng_), nr(rng_), nr(rng_));
    const double angle = dr.norm();
    const UnitDualQuaternion rot =
        angle > 0.0 ? UnitDualQuaternion::from_axis_angle(dr / angle, angle) : UnitDualQuaternion{};
    return (UnitDualQuaternion::from_translation(dt) * x * rot).renormalized();
  }

  std::optional<double> clearance(const Vec3& p) const {
    if (s_.scene.empty()) return std::nullopt;
    const auto c = closest_obstacle(s_.scene, p, step_);
    if (!c) return std::nullopt;
    return c->distance;
  }

  void record(const UnitDualQuaternion& x_d, bool avoiding) {
    TrajectoryRow row;
    row.step = step_;
    row.time = static_cast<double>(step_) * c_.controller.dt;
    row.q = q_;
    row.x_m = x_meas_;
    row.x_d = x_d;
    row.goal_error = goal_error(x_meas_, s_.goal);
    row.min_clearance = clearance(x_true_.translation());
    row.avoidance_active = avoiding;
    out_.record.rows.push_back(std::move(row));
  }

  void tick(const UnitDualQuaternion& x_d, bool avoiding) {
    const Vec3 p = x_true_.translation();
    std::optional<SurfaceConstraint> surface;
    if (const auto c = closest_obstacle(s_.scene, p, step_); c && c->distance <= c_.sim.safety_margin) {
      try {
        surface = SurfaceConstraint{normal_vector(p, s_.scene.obstacles[c->index])};
      } catch (const Error&) {
      }
    }
    const Vec3 before = x_meas_.translation();
    const ControlOutput u = control_step(s_.model, {q_, x_meas_, v_ee_}, x_d, c_.controller, surface);
    q_ = integrate(s_.model, q_, u.qdot, c_.controller.dt).q;
    x_true_ = forward_kinematics(s_.model, q_);
    x_meas_ = measure(x_true_);
    v_ee_ = (x_meas_.translation() - before) / c_.controller.dt;
    ++step_;
    record(x_d, avoiding);
  }

  // Index of the closest obstacle whose shell was entered since the last check.
  std::optional<std::size_t> triggered_obstacle() {
    const Vec3 p = x_true_.translation();
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s_.scene.obstacles.size(); ++i) {
      const auto& o = s_.scene.obstacles[i];
      const bool in = o.active(step_) && inside_detection_shell(p, o);
      if (in && !inside_[i]) {
        const double d = (p - o.center).norm() - o.radius;
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      inside_[i] = in;
    }
    return best;
  }

  void update_shell_flags() {
    const Vec3 p = x_true_.translation();
    for (std::size_t i = 0; i < s_.scene.obstacles.size(); ++i) {
      const auto& o = s_.scene.obstacles[i];
      inside_[i] = o.active(step_) && inside_detection_shell(p, o);
    }
  }

  bool continuation_collides(const std::vector<UnitDualQuaternion>& cont) const {
    Vec3 prev = x_true_.translation();
    for (const auto& x : cont) {
      const Vec3 p = x.translation();
      if (segment_collides(prev, p, s_.scene, step_, c_.repet.clearance_margin)) return true;
      prev = p;
    }
    return false;
  }

  StepOutcome avoid(std::size_t obstacle, const std::vector<UnitDualQuaternion>& cont) {
    std::vector<Vec3> positions;
    positions.reserve(cont.size());
    for (const auto& x : cont) positions.push_back(x.translation());
    const EscapeResult esc =
        escape_tree(x_meas_, s_.goal.translation(), obstacle, s_.scene, positions, c_.repet, step_);
    ++out_.summary.avoidance_events;
    out_.level_seconds.insert(out_.level_seconds.end(), esc.level_seconds.begin(), esc.level_seconds.end());

    const std::size_t used = esc.reconnect_index ? *esc.reconnect_index + 1 : cont.size();
    std::vector<UnitDualQuaternion> segment{x_meas_};
    segment.insert(segment.end(), cont.begin(), cont.begin() + static_cast<std::ptrdiff_t>(used));
    if (segment.size() < 2) segment.push_back(s_.goal);

    std::vector<Vec3> polyline = esc.waypoints;
    polyline.push_back(esc.reconnection);
    double seg_len = 0.0;
    double poly_len = 0.0;
    for (std::size_t i = 1; i < segment.size(); ++i) {
      seg_len += (segment[i].translation() - segment[i - 1].translation()).norm();
    }
    for (std::size_t i = 1; i < polyline.size(); ++i) poly_len += (polyline[i] - polyline[i - 1]).norm();
    double spacing = c_.sim.max_segment_step;
    if (poly_len > seg_len && poly_len > 0.0) spacing *= seg_len / poly_len;
    spacing = std::max(spacing, 1e-5);

    const auto keys = shift_final_path(densify(segment, spacing), polyline);
    StepOutcome outcome;
    outcome.iterations = std::max<std::size_t>(used, 1);
    for (std::size_t k = 1; k < keys.size(); ++k) {
      const Vec3 goal_p = keys[k].translation();
      int n = 0;
      do {
        tick(keys[k], true);
      } while (++n < c_.sim.max_key_pose_steps &&
               (x_true_.translation() - goal_p).norm() > c_.sim.key_pose_tolerance);
      outcome.poses.push_back(x_meas_);
    }
    update_shell_flags();
    return outcome;
  }

  void check_stall(const PlanStep& step) {
    if (c_.sim.stall_iterations == 0) return;
    const double e = goal_error(step.current, s_.goal);
    if (e < best_error_ - 1e-9) {
      best_error_ = e;
      best_at_ = step.iteration;
    } else if (step.iteration - best_at_ > c_.sim.stall_iterations) {
      std::ostringstream msg;
      msg << "goal error stalled at " << best_error_ << " for " << c_.sim.stall_iterations << " iterations";
      throw Error(ErrorCode::NonConvergence, msg.str());
    }
  }

  const ExperimentSetup& s_;
  const ExperimentConfig& c_;
  ExperimentResult& out_;
  std::mt19937_64 rng_;
  std::vector<bool> inside_;
  JointConfig q_;
  UnitDualQuaternion x_true_;
  UnitDualQuaternion x_meas_;
  Vec3 v_ee_ = Vec3::Zero();
  std::size_t step_ = 0;
  double best_error_ = std::numeric_limits<double>::infinity();
  std::size_t best_at_ = 0;
};

void finish_summary(ExperimentResult& r) {
  auto& s = r.summary;
  const auto& rows = r.record.rows;
  s.controller_steps = rows.empty() ? 0 : rows.back().step;
  s.final_goal_error = rows.empty() ? 0.0 : rows.back().goal_error;
  s.path_length = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    s.path_length += (rows[i].x_m.translation() - rows[i - 1].x_m.translation()).norm();
  }
  for (const auto& row : rows) {
    if (row.min_clearance && (!s.min_clearance || *row.min_clearance < *s.min_clearance)) {
      s.min_clearance = row.min_clearance;
    }
  }
  s.planner_iterations = r.step_seconds.size();
  s.planner_step_seconds = summarize(r.step_seconds);
  s.tree_level_seconds = summarize(r.level_seconds);
}

void fail(ExperimentResult& r, const Error& e) {
  r.summary.exit_code = exit_code_for(e.code());
  r.summary.status = std::string(to_string(e.code()));
  r.summary.message = e.what();
}

}  // namespace

ExperimentResult simulate(const ExperimentSetup& setup, const ExperimentConfig& config) {
  ExperimentResult result;
  result.summary.config_hash = config_hash(config);
  Simulation sim(setup, config, result);
  const StepExecutor executor = [&](const UnitDualQuaternion& target, const PlanStep& step) {
    return sim.execute(target, step);
  };
  try {
    result.final_path = plan(setup.demo, sim.measured(), setup.goal, config.planner, executor);
  } catch (const NonConvergenceError& e) {
    result.final_path = e.partial_path();
    fail(result, e);
  } catch (const Error& e) {
    fail(result, e);
  }
  finish_summary(result);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  std::optional<ExperimentSetup> setup;
  try {
    setup = resolve(config);
  } catch (const Error& e) {
    ExperimentResult r;
    r.summary.config_hash = config_hash(config);
    fail(r, e);
    if (r.summary.exit_code != 2) r.summary.exit_code = 4;
    return r;
  }
  return simulate(*setup, config);
}

PosePath record_demo(const SerialManipulator& model, const std::vector<JointConfig>& joints) {
  std::vector<UnitDualQuaternion> poses;
  poses.reserve(joints.size());
  for (const auto& q : joints) poses.push_back(forward_kinematics(model, q));
  return {collapse_duplicates(poses), PathKind::Demonstrated};
}

ExperimentResult retarget_demo(const std::vector<JointConfig>& demo_joints, const SerialManipulator& model_a,
                               const SerialManipulator& model_b, const JointConfig& start_b,
                               const UnitDualQuaternion& goal, const ExperimentConfig& config) {
  PosePath demo = record_demo(model_a, demo_joints);
  if (demo.size() < 2) throw Error(ErrorCode::PathTooShort, "recorded demonstration has fewer than 2 distinct poses");
  const double reach = reach_bound(model_b);
  const double dist = (goal.translation() - model_b.base().translation()).norm();
  if (dist > reach) {
    std::ostringstream msg;
    msg << "goal is " << dist << " m from the base of '" << model_b.name() << "', beyond its reach of " << reach
        << " m";
    throw Error(ErrorCode::Unreachable, msg.str());
  }
  check_dimension(model_b, start_b);
  ObstacleScene scene = config.scene.empty() ? ObstacleScene{} : load_scene(config.scene);
  return simulate({model_b, std::move(demo), std::move(scene), start_b, goal}, config);
}

std::vector<ExperimentResult> run_batch(const std::vector<ExperimentConfig>& configs, unsigned threads) {
  std::vector<ExperimentResult> results(configs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(configs.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) results[i] = run_experiment(configs[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

// --- output ------------------------------------------------------------------

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
}

void append_pose(std::string& line, const UnitDualQuaternion& x) {
  const Vec8 v = x.vec();
  for (int i = 0; i < 8; ++i) line += "," + format_double(v[i]);
}

constexpr const char* kPlotScript = R"(#!/usr/bin/env python3
"""Plots path.csv, error.csv and clearance.csv from a screwplan run."""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent


def columns(name):
    with open(here / name, newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) if r[k] else float("nan") for r in rows] for k in (rows[0].keys() if rows else [])}


path = columns("path.csv")
err = columns("error.csv")
clr = columns("clearance.csv")

fig = plt.figure(figsize=(12, 4))
ax = fig.add_subplot(1, 3, 1, projection="3d")
if path:
    ax.plot(path["x"], path["y"], path["z"])
ax.set_xlabel("x [m]")
ax.set_ylabel("y [m]")
ax.set_zlabel("z [m]")
ax.set_title("end-effector path")

ax = fig.add_subplot(1, 3, 2)
if err:
    ax.semilogy(err["step"], err["goal_error"])
ax.set_xlabel("step")
ax.set_title("goal error")

ax = fig.add_subplot(1, 3, 3)
if clr:
    ax.plot(clr["step"], clr["min_clearance"])
ax.axhline(0.0, color="k", lw=0.5)
ax.set_xlabel("step")
ax.set_title("clearance [m]")

fig.tight_layout()
fig.savefig(here / "paths.png", dpi=120)
)";

}  // namespace

std::string trajectory_csv(const TrajectoryRecord& record) {
  std::string out = "step,time";
  for (int i = 0; i < record.dof; ++i) out += ",q" + std::to_string(i + 1);
  for (const char* prefix : {"xm", "xd"}) {
    for (const char* c : {"pw", "px", "py", "pz", "dw", "dx", "dy", "dz"}) out += std::string(",") + prefix + "_" + c;
  }
  out += ",goal_error,min_clearance,avoidance_active\n";
  for (const auto& r : record.rows) {
    std::string line = std::to_string(r.step) + "," + format_double(r.time);
    for (Eigen::Index i = 0; i < r.q.size(); ++i) line += "," + format_double(r.q[i]);
    append_pose(line, r.x_m);
    append_pose(line, r.x_d);
    line += "," + format_double(r.goal_error) + ",";
    if (r.min_clearance) line += format_double(*r.min_clearance);
    line += r.avoidance_active ? ",1\n" : ",0\n";
    out += line;
  }
  return out;
}

void write_trajectory_csv(const TrajectoryRecord& record, const std::filesystem::path& path) {
  write_text(path, trajectory_csv(record));
}

std::string summary_json(const RunSummary& s) {
  auto stats = [](const Stats& st) {
    return nlohmann::json{{"mean", st.mean}, {"stddev", st.stddev}, {"count", st.count}};
  };
  nlohmann::json j;
  j["status"] = s.status;
  j["exit_code"] = s.exit_code;
  j["message"] = s.message;
  j["final_goal_error"] = s.final_goal_error;
  j["path_length"] = s.path_length;
  j["min_clearance"] = s.min_clearance ? nlohmann::json(*s.min_clearance) : nlohmann::json(nullptr);
  j["planner_iterations"] = s.planner_iterations;
  j["controller_steps"] = s.controller_steps;
  j["avoidance_events"] = s.avoidance_events;
  j["planner_step_seconds"] = stats(s.planner_step_seconds);
  j["tree_level_seconds"] = stats(s.tree_level_seconds);
  j["config_hash"] = s.config_hash;
  return j.dump(2) + "\n";
}

void emit_plots(const TrajectoryRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string path = "step,x,y,z\n";
  std::string err = "step,goal_error\n";
  std::string clr = "step,min_clearance\n";
  for (const auto& r : record.rows) {
    const Vec3 p = r.x_m.translation();
    const std::string step = std::to_string(r.step);
    path += step + "," + format_double(p.x()) + "," + format_double(p.y()) + "," + format_double(p.z()) + "\n";
    err += step + "," + format_double(r.goal_error) + "\n";
    clr += step + "," + (r.min_clearance ? format_double(*r.min_clearance) : std::string()) + "\n";
  }
  write_text(dir / "path.csv", path);
  write_text(dir / "error.csv", err);
  write_text(dir / "clearance.csv", clr);
  write_text(dir / "plot_paths.py", kPlotScript);
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
  write_trajectory_csv(result.record, dir / "trajectory.csv");
  write_pose_file(dir / "final_path.txt", result.final_path.poses);
  write_text(dir / "summary.json", summary_json(result.summary));
  emit_plots(result.record, dir);
}

}  // namespace screwplan
