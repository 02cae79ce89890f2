// Command-line front end: run experiments, plan open-loop, record and
// retarget demonstrations, convert DH tables.

#include "screwplan/error.hpp"
#include "screwplan/kinematics.hpp"
#include "screwplan/pose_io.hpp"
#include "screwplan/sim.hpp"
#include "screwplan/tsia.hpp"

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace screwplan;

namespace {

// A pose given inline ("pw px ... dz" or "tx ty tz qw qx qy qz") or as a file
// whose first data line is the pose.
UnitDualQuaternion pose_arg(const std::string& s) {
  std::error_code ec;
  if (fs::is_regular_file(s, ec)) {
    const auto poses = read_pose_file(s);
    if (poses.empty()) throw Error(ErrorCode::ParseError, "'" + s + "' holds no pose");
    return poses.front();
  }
  return parse_pose(s);
}

JointConfig joints_arg(const std::string& s) {
  const auto v = parse_scalars(s);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void print_summary(const RunSummary& s, const fs::path& out) {
  std::cout << s.status << ": goal error " << s.final_goal_error << ", " << s.controller_steps
            << " controller steps, " << s.avoidance_events << " avoidance events";
  if (s.min_clearance) std::cout << ", min clearance " << *s.min_clearance << " m";
  std::cout << "\n";
  if (!s.message.empty()) std::cerr << s.message << "\n";
  if (!out.empty()) std::cout << "outputs in " << out.string() << "\n";
}

struct RunOptions {
  std::string config, demo, scene, robot, goal, start_pose, start_joints, out;
  std::optional<double> tau, guiding_fraction, k_eta;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunOptions& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (!o.demo.empty()) c.demo = o.demo;
  if (!o.scene.empty()) c.scene = o.scene;
  if (!o.robot.empty()) c.robot = o.robot;
  if (!o.goal.empty()) c.goal = pose_arg(o.goal);
  if (!o.start_pose.empty()) {
    c.start_pose = pose_arg(o.start_pose);
    c.start_joints.reset();
  }
  if (!o.start_joints.empty()) {
    c.start_joints = joints_arg(o.start_joints);
    c.start_pose.reset();
  }
  if (!o.out.empty()) c.output = o.out;
  if (o.tau) c.planner.tau_step = *o.tau;
  if (o.guiding_fraction) c.planner.guiding_fraction = *o.guiding_fraction;
  if (o.k_eta) c.repet.k_eta = *o.k_eta;
  if (o.seed) {
    c.seed = *o.seed;
    c.repet.seed = *o.seed;
  }
  const ExperimentResult r = run_experiment(c);
  write_outputs(r, c.output);
  print_summary(r.summary, c.output);
  return r.summary.exit_code;
}

int cmd_plan(const std::string& demo, const std::string& start, const std::string& goal, const PlannerParams& p,
             const std::string& out) {
  const PosePath dp{read_pose_file(demo), PathKind::Demonstrated};
  const UnitDualQuaternion g = goal.empty() ? dp.back() : pose_arg(goal);
  const UnitDualQuaternion s = start.empty() ? dp.front() : pose_arg(start);
  PosePath fp;
  int code = 0;
  try {
    fp = plan(dp, s, g, p);
  } catch (const NonConvergenceError& e) {
    std::cerr << e.what() << "\n";
    fp = e.partial_path();
    code = 2;
  }
  if (out.empty()) {
    std::cout << "# pw px py pz dw dx dy dz\n";
    for (const auto& x : fp.poses) std::cout << format_pose(x) << "\n";
  } else {
    write_pose_file(out, fp.poses);
    std::cout << fp.size() << " poses written to " << out << "\n";
  }
  return code;
}

int cmd_record(const std::string& robot, const std::string& joints, const std::string& out) {
  const SerialManipulator model = load_robot(robot);
  const PosePath demo = record_demo(model, read_joint_file(joints));
  write_pose_file(out, demo.poses, "recorded on " + model.name());
  std::cout << demo.size() << " poses written to " << out << "\n";
  return 0;
}

int cmd_retarget(const std::string& config, const std::string& joints, const std::string& robot_a,
                 const std::string& robot_b, const std::string& start_b, const std::string& goal,
                 const std::string& out) {
  ExperimentConfig c = config.empty() ? ExperimentConfig{} : load_config(config);
  if (!out.empty()) c.output = out;
  const SerialManipulator a = load_robot(robot_a);
  const SerialManipulator b = load_robot(robot_b);
  JointConfig q0 = start_b.empty() ? b.mid_range() : joints_arg(start_b);
  const ExperimentResult r = retarget_demo(read_joint_file(joints), a, b, q0, pose_arg(goal), c);
  write_outputs(r, c.output);
  print_summary(r.summary, c.output);
  return r.summary.exit_code;
}

int cmd_dh2screw(const std::string& file, const std::string& out) {
  const YAML::Node root = YAML::Load(read_text_file(file));
  const std::string convention = root["convention"] ? root["convention"].as<std::string>() : "modified";
  if (convention != "standard" && convention != "modified") {
    throw Error(ErrorCode::ParseError, "convention must be 'standard' or 'modified'");
  }
  std::vector<DhRow> rows;
  for (const auto& n : root["rows"]) {
    DhRow r;
    if (n["a"]) r.a = n["a"].as<double>();
    if (n["d"]) r.d = n["d"].as<double>();
    if (n["alpha"]) r.alpha = n["alpha"].as<double>();
    if (n["theta"]) r.theta = n["theta"].as<double>();
    if (n["type"] && n["type"].as<std::string>() == "prismatic") r.type = JointType::Prismatic;
    if (n["limits"]) {
      r.lower = n["limits"][0].as<double>();
      r.upper = n["limits"][1].as<double>();
    }
    if (n["max_velocity"]) r.max_velocity = n["max_velocity"].as<double>();
    rows.push_back(r);
  }
  auto pose = [&](const char* key) {
    if (!root[key]) return UnitDualQuaternion{};
    std::vector<double> v;
    for (const auto& x : root[key]) v.push_back(x.as<double>());
    return pose_from_scalars(v);
  };
  const SerialManipulator m =
      from_dh(root["name"] ? root["name"].as<std::string>() : "robot", rows,
              convention == "standard" ? DhConvention::Standard : DhConvention::Modified, pose("flange"),
              pose("base"));
  const std::string text = to_yaml(m);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out) << text;
  }
  return 0;
}

int cmd_batch(const std::vector<std::string>& configs, unsigned threads) {
  std::vector<ExperimentConfig> cs;
  for (const auto& f : configs) cs.push_back(load_config(f));
  const auto results = run_batch(cs, threads);
  int worst = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_outputs(results[i], cs[i].output);
    std::cout << configs[i] << ": " << results[i].summary.status << " (exit " << results[i].summary.exit_code
              << ")\n";
    worst = std::max(worst, results[i].summary.exit_code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"screwplan: demonstration-driven pose planning with reactive obstacle deflection"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a closed-loop experiment");
  run_cmd->add_option("--config", run.config, "Experiment configuration (YAML)");
  run_cmd->add_option("--demo", run.demo, "Demonstration pose file");
  run_cmd->add_option("--scene", run.scene, "Obstacle scene (YAML)");
  run_cmd->add_option("--robot", run.robot, "Robot file or bundled model name");
  run_cmd->add_option("--goal", run.goal, "Goal pose (8 or 7 scalars, or a pose file)");
  run_cmd->add_option("--start-pose", run.start_pose, "Start pose");
  run_cmd->add_option("--start-joints", run.start_joints, "Start joint configuration");
  run_cmd->add_option("--tau", run.tau, "Interpolation step");
  run_cmd->add_option("--guiding-fraction", run.guiding_fraction, "Position of the first guiding pose");
  run_cmd->add_option("--k-eta", run.k_eta, "Escape plane size");
  run_cmd->add_option("--seed", run.seed, "Random seed");
  run_cmd->add_option("--out", run.out, "Output directory");

  std::string demo, start, goal, out, robot, joints, robot_a, robot_b, start_b, config, dh;
  PlannerParams pp;
  auto* plan_cmd = app.add_subcommand("plan", "Plan open-loop and print the final path");
  plan_cmd->add_option("--demo", demo, "Demonstration pose file")->required();
  plan_cmd->add_option("--start", start, "Start pose (default: first demonstrated pose)");
  plan_cmd->add_option("--goal", goal, "Goal pose (default: last demonstrated pose)");
  plan_cmd->add_option("--tau", pp.tau_step, "Interpolation step");
  plan_cmd->add_option("--guiding-fraction", pp.guiding_fraction, "Position of the first guiding pose");
  plan_cmd->add_option("--tolerance", pp.goal_tolerance, "Goal tolerance");
  plan_cmd->add_option("--max-iterations", pp.max_iterations, "Iteration budget (0: automatic)");
  plan_cmd->add_option("--out", out, "Output pose file (default: stdout)");

  auto* rec_cmd = app.add_subcommand("record-demo", "Turn a joint trajectory into a demonstration");
  rec_cmd->add_option("--robot", robot, "Robot file or bundled model name")->required();
  rec_cmd->add_option("--joints", joints, "Joint trajectory, one configuration per line")->required();
  rec_cmd->add_option("--out", out, "Demonstration file to write")->required();

  auto* ret_cmd = app.add_subcommand("retarget", "Record on one robot, execute on another");
  ret_cmd->add_option("--config", config, "Experiment configuration for controller and planner settings");
  ret_cmd->add_option("--joints", joints, "Joint trajectory recorded on robot A")->required();
  ret_cmd->add_option("--robot-a", robot_a, "Recording robot")->required();
  ret_cmd->add_option("--robot-b", robot_b, "Executing robot")->required();
  ret_cmd->add_option("--start-joints", start_b, "Start configuration of robot B (default: mid-range)");
  ret_cmd->add_option("--goal", goal, "Goal pose")->required();
  ret_cmd->add_option("--out", out, "Output directory");

  auto* dh_cmd = app.add_subcommand("dh2screw", "Convert a DH table to a robot file");
  dh_cmd->add_option("dh", dh, "DH description (YAML)")->required();
  dh_cmd->add_option("--out", out, "Robot file to write (default: stdout)");

  std::vector<std::string> configs;
  unsigned threads = 0;
  auto* batch_cmd = app.add_subcommand("batch", "Run several experiments in parallel");
  batch_cmd->add_option("configs", configs, "Configuration files")->required();
  batch_cmd->add_option("--threads", threads, "Worker threads (0: one per core)");

  app.add_subcommand("robots", "List bundled robot models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 4;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*plan_cmd) return cmd_plan(demo, start, goal, pp, out);
    if (*rec_cmd) return cmd_record(robot, joints, out);
    if (*ret_cmd) return cmd_retarget(config, joints, robot_a, robot_b, start_b, goal, out);
    if (*dh_cmd) return cmd_dh2screw(dh, out);
    if (*batch_cmd) return cmd_batch(configs, threads);
    for (const auto& n : bundled_robot_names()) std::cout << n << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const YAML::Exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
