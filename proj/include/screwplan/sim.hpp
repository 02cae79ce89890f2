#pragma once

// Closed-loop kinematic simulation: planner -> escape trees -> controller ->
// integrated joint state, plus the file formats around it.

#include "screwplan/controller.hpp"
#include "screwplan/dq.hpp"
#include "screwplan/error.hpp"
#include "screwplan/kinematics.hpp"
#include "screwplan/repet.hpp"
#include "screwplan/tsia.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace screwplan {

struct SimParams {
  /// Controller steps per planner iteration.
  int inner_steps = 10;
  /// Ends the inner loop early once goal_error(x_m, target) falls below this (0 disables).
  double track_tolerance = 0.0;
  /// The surface layer engages within this distance of an obstacle surface.
  double safety_margin = 0.005;
  /// Position tolerance for each key pose of a deflected segment.
  double key_pose_tolerance = 1e-3;
  int max_key_pose_steps = 2000;
  /// Key-pose spacing of deflected segments.
  double max_segment_step = 0.005;
  /// Longest open-loop continuation handed to the escape search.
  std::size_t continuation_limit = 20000;
  /// Planner iterations without goal-error progress before giving up (0 disables).
  std::size_t stall_iterations = 3000;
  /// Standard deviations of Gaussian noise on the measured pose (m, rad).
  double translation_noise = 0.0;
  double rotation_noise = 0.0;
};

struct ExperimentConfig {
  std::string robot = "planar2";
  std::filesystem::path demo;
  std::filesystem::path scene;
  std::filesystem::path output = "out";
  std::optional<JointConfig> start_joints;
  std::optional<UnitDualQuaternion> start_pose;
  /// Seed configuration for solving start_pose; defaults to mid-range.
  std::optional<JointConfig> ik_seed;
  /// Defaults to the last demonstrated pose.
  std::optional<UnitDualQuaternion> goal;
  std::uint64_t seed = 0;
  PlannerParams planner;
  ControllerParams controller;
  RepetParams repet;
  SimParams sim;
};

/// Relative paths in the file are resolved against `base_dir`.
ExperimentConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_yaml(const ExperimentConfig& config);

struct TrajectoryRow {
  std::size_t step = 0;
  double time = 0.0;
  JointConfig q;
  UnitDualQuaternion x_m;
  UnitDualQuaternion x_d;
  double goal_error = 0.0;
  std::optional<double> min_clearance;
  bool avoidance_active = false;
};

struct TrajectoryRecord {
  std::vector<TrajectoryRow> rows;
  int dof = 0;
};

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

Stats summarize(const std::vector<double>& samples);

struct RunSummary {
  std::string status = "success";
  int exit_code = 0;
  std::string message;
  double final_goal_error = 0.0;
  double path_length = 0.0;
  std::optional<double> min_clearance;
  std::size_t planner_iterations = 0;
  std::size_t controller_steps = 0;
  std::size_t avoidance_events = 0;
  Stats planner_step_seconds;
  Stats tree_level_seconds;
  std::string config_hash;
};

struct ExperimentResult {
  TrajectoryRecord record;
  PosePath final_path{{}, PathKind::Final};
  RunSummary summary;
  std::vector<double> level_seconds;
  std::vector<double> step_seconds;
};

/// Everything a run needs, already loaded.
struct ExperimentSetup {
  SerialManipulator model;
  PosePath demo;
  ObstacleScene scene;
  JointConfig q0;
  UnitDualQuaternion goal;
};

/// Loads files and solves the start configuration. Throws on invalid input.
ExperimentSetup resolve(const ExperimentConfig& config);

/// Runs the loop. Module errors are caught and reported in the summary; the
/// record holds every controller step taken up to that point.
ExperimentResult simulate(const ExperimentSetup& setup, const ExperimentConfig& config);

/// resolve + simulate; configuration errors are reported with exit code 4.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// 0 success, 2 non-convergence, 3 avoidance failure, 4 configuration or input error.
int exit_code_for(ErrorCode code);

/// FNV-1a over the effective configuration and the referenced inputs.
std::string config_hash(const ExperimentConfig& config);

/// trajectory.csv, final_path.txt, summary.json and the plot data.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);
void write_trajectory_csv(const TrajectoryRecord& record, const std::filesystem::path& path);
std::string trajectory_csv(const TrajectoryRecord& record);
std::string summary_json(const RunSummary& summary);

/// path.csv, error.csv, clearance.csv and plot_paths.py.
void emit_plots(const TrajectoryRecord& record, const std::filesystem::path& dir);

/// FK of every configuration, consecutive duplicates collapsed.
PosePath record_demo(const SerialManipulator& model, const std::vector<JointConfig>& joints);

/// Records the demonstration on model A and executes it on model B.
/// Throws Unreachable when the goal lies beyond model B's reach.
ExperimentResult retarget_demo(const std::vector<JointConfig>& demo_joints, const SerialManipulator& model_a,
                               const SerialManipulator& model_b, const JointConfig& start_b,
                               const UnitDualQuaternion& goal, const ExperimentConfig& config);

/// Runs every configuration on up to `threads` workers; results keep input order.
std::vector<ExperimentResult> run_batch(const std::vector<ExperimentConfig>& configs, unsigned threads = 0);

}  // namespace screwplan
