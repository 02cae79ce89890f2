#include "screwplan/error.hpp"
#include "screwplan/pose_io.hpp"
#include "screwplan/sim.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace screwplan;
using namespace screwplan::testing;

namespace {

const std::filesystem::path kData = SCREWPLAN_EXAMPLES_DIR;

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "screwplan_test_sim" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

ExperimentConfig baseline_config() { return load_config(kData / "planar2_baseline.yaml"); }
ExperimentConfig avoidance_config() { return load_config(kData / "spatial7_avoid.yaml"); }

}  // namespace

TEST_CASE("baseline self retarget") {
  const ExperimentResult r = run_experiment(baseline_config());
  CHECK(r.summary.exit_code == 0);
  CHECK(r.summary.status == "success");
  CHECK(r.summary.final_goal_error <= 1e-3);
  CHECK_FALSE(r.summary.min_clearance);
  CHECK(r.summary.avoidance_events == 0);
  CHECK(r.summary.config_hash.size() == 16);
  REQUIRE(r.record.rows.size() > 2);
  for (std::size_t i = 1; i < r.record.rows.size(); ++i) CHECK(r.record.rows[i].step == r.record.rows[i - 1].step + 1);
  CHECK(r.summary.controller_steps == r.record.rows.back().step);
  CHECK(r.summary.planner_iterations == r.step_seconds.size());
  // Rows carry consistent kinematics.
  const SerialManipulator m = load_robot("planar2");
  for (std::size_t i = 0; i < r.record.rows.size(); i += 997) {
    CHECK(same_pose_distance(forward_kinematics(m, r.record.rows[i].q), r.record.rows[i].x_m) < 1e-12);
  }
}

TEST_CASE("avoidance run") {
  const ExperimentConfig cfg = avoidance_config();
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.summary.exit_code == 0);
  CHECK(r.summary.avoidance_events >= 1);
  CHECK(std::any_of(r.record.rows.begin(), r.record.rows.end(), [](const auto& row) { return row.avoidance_active; }));
  REQUIRE(r.summary.min_clearance);
  CHECK(*r.summary.min_clearance >= 0.0);
  CHECK(r.summary.tree_level_seconds.count >= 1);
  // Brute-force audit of the executed path at 1 mm.
  const ObstacleScene scene = load_scene(cfg.scene);
  const SerialManipulator m = load_robot(cfg.robot);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < r.record.rows.size(); ++i) {
    const Vec3 a = forward_kinematics(m, r.record.rows[i - 1].q).translation();
    const Vec3 b = forward_kinematics(m, r.record.rows[i].q).translation();
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / 1e-3)));
    for (int k = 0; k <= n; ++k) {
      const Vec3 p = a + (b - a) * (static_cast<double>(k) / n);
      for (const auto& o : scene.obstacles) worst = std::min(worst, (p - o.center).norm() - o.radius);
    }
  }
  CHECK(worst >= 0.0);
  CHECK(r.summary.final_goal_error <= 1e-3);
}

TEST_CASE("without the escape trees the same run hits the safety layer") {
  ExperimentConfig cfg = avoidance_config();
  cfg.repet.max_depth = 0;
  cfg.repet.max_resamples = 0;
  const ExperimentResult r = run_experiment(cfg);
  // Either the search fails outright or the safety layer keeps the arm out.
  if (r.summary.exit_code == 0) {
    REQUIRE(r.summary.min_clearance);
    CHECK(*r.summary.min_clearance >= 0.0);
  } else {
    CHECK(r.summary.exit_code == 3);
  }
}

TEST_CASE("unreachable goal") {
  ExperimentConfig cfg = baseline_config();
  cfg.goal = UnitDualQuaternion::from_translation({5, 0, 0});
  cfg.sim.stall_iterations = 500;
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.summary.exit_code == 2);
  CHECK(r.summary.status == to_string(ErrorCode::NonConvergence));
  CHECK(r.record.rows.size() > 1);
  const auto dir = scratch("unreachable");
  write_outputs(r, dir);
  CHECK(line_count(slurp(dir / "trajectory.csv")) == r.record.rows.size() + 1);
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j["exit_code"] == 2);
}

TEST_CASE("configuration errors") {
  SUBCASE("both starts") {
    ExperimentConfig cfg = baseline_config();
    cfg.start_pose = UnitDualQuaternion{};
    const ExperimentResult r = run_experiment(cfg);
    CHECK(r.summary.exit_code == 4);
    CHECK(r.record.rows.empty());
  }
  SUBCASE("missing demo") {
    ExperimentConfig cfg = baseline_config();
    cfg.demo = kData / "does_not_exist.txt";
    CHECK(run_experiment(cfg).summary.exit_code == 4);
  }
  SUBCASE("wrong joint count") {
    ExperimentConfig cfg = baseline_config();
    cfg.start_joints = JointConfig::Zero(3);
    CHECK(run_experiment(cfg).summary.exit_code == 4);
  }
  SUBCASE("unknown keys") {
    CHECK_THROWS_AS(parse_config("robot: planar2\nplanner: {tau_step: 0.1}\n"), Error);
    CHECK_THROWS_AS(parse_config("robto: planar2\n"), Error);
    CHECK_THROWS_AS(parse_config("controller: {obstacle_mode: sideways}\n"), Error);
  }
  SUBCASE("start pose solved by IK") {
    ExperimentConfig cfg = baseline_config();
    cfg.start_joints.reset();
    const SerialManipulator m = load_robot("planar2");
    cfg.start_pose = forward_kinematics(m, JointConfig{{0.2, 0.5}});
    const ExperimentSetup s = resolve(cfg);
    CHECK(goal_error(forward_kinematics(m, s.q0), *cfg.start_pose) <= 1e-6);
    cfg.start_pose = UnitDualQuaternion::from_translation({5, 0, 0});
    CHECK(run_experiment(cfg).summary.exit_code == 2);
  }
}

TEST_CASE("config round trip and hash") {
  const ExperimentConfig a = avoidance_config();
  const ExperimentConfig b = parse_config(to_yaml(a));
  CHECK(to_yaml(b) == to_yaml(a));
  CHECK(b.repet.seed == a.seed);
  CHECK(config_hash(a) == config_hash(b));
  ExperimentConfig c = a;
  c.seed = a.seed + 1;
  CHECK(config_hash(c) != config_hash(a));
  c = a;
  c.planner.tau_step = 0.02;
  CHECK(config_hash(c) != config_hash(a));
}

TEST_CASE("deterministic output") {
  ExperimentConfig cfg = avoidance_config();
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  CHECK(trajectory_csv(a.record) == trajectory_csv(b.record));
  SUBCASE("noise is seeded") {
    cfg.sim.translation_noise = 1e-5;
    cfg.sim.rotation_noise = 1e-5;
    const auto c = run_experiment(cfg);
    const auto d = run_experiment(cfg);
    CHECK(trajectory_csv(c.record) == trajectory_csv(d.record));
    CHECK(trajectory_csv(c.record) != trajectory_csv(a.record));
  }
}

TEST_CASE("trajectory csv layout") {
  const ExperimentResult r = run_experiment(baseline_config());
  const std::string csv = trajectory_csv(r.record);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header ==
        "step,time,q1,q2,xm_pw,xm_px,xm_py,xm_pz,xm_dw,xm_dx,xm_dy,xm_dz,"
        "xd_pw,xd_px,xd_py,xd_pz,xd_dw,xd_dx,xd_dy,xd_dz,goal_error,min_clearance,avoidance_active");
  CHECK(line_count(csv) == r.record.rows.size() + 1);
  // Values survive a text round trip exactly.
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, line);
  std::vector<std::string> fields;
  std::stringstream ls(line);
  for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() == 23);
  CHECK(std::stod(fields[2]) == r.record.rows[1].q[0]);
  CHECK(std::stod(fields[4]) == r.record.rows[1].x_m.vec()[0]);
  CHECK(std::stod(fields[20]) == r.record.rows[1].goal_error);
  CHECK(fields[21].empty());
}

TEST_CASE("plot data") {
  SUBCASE("empty record") {
    const auto dir = scratch("plots_empty");
    emit_plots(TrajectoryRecord{}, dir);
    CHECK(slurp(dir / "path.csv") == "step,x,y,z\n");
    CHECK(slurp(dir / "error.csv") == "step,goal_error\n");
    CHECK(slurp(dir / "clearance.csv") == "step,min_clearance\n");
    CHECK(std::filesystem::exists(dir / "plot_paths.py"));
  }
  SUBCASE("baseline rows") {
    const ExperimentResult r = run_experiment(baseline_config());
    const auto dir = scratch("plots_baseline");
    emit_plots(r.record, dir);
    CHECK(line_count(slurp(dir / "path.csv")) == r.record.rows.size() + 1);
  }
  SUBCASE("clearance column matches the summary") {
    const ExperimentResult r = run_experiment(avoidance_config());
    const auto dir = scratch("plots_avoid");
    write_outputs(r, dir);
    std::istringstream in(slurp(dir / "clearance.csv"));
    std::string line;
    std::getline(in, line);
    double best = std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) best = std::min(best, std::stod(line.substr(line.find(',') + 1)));
    REQUIRE(r.summary.min_clearance);
    CHECK(best == *r.summary.min_clearance);
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(j["min_clearance"].get<double>() == *r.summary.min_clearance);
    CHECK(j["config_hash"] == r.summary.config_hash);
    CHECK(read_pose_file(dir / "final_path.txt").size() == r.final_path.size());
  }
}

TEST_CASE("record demo") {
  const SerialManipulator m = load_robot("planar2");
  SUBCASE("constant trajectory collapses to one pose") {
    const PosePath d = record_demo(m, std::vector<JointConfig>(20, JointConfig{{0.3, 0.1}}));
    CHECK(d.size() == 1);
    ExperimentConfig cfg = baseline_config();
    const auto dir = scratch("constant_demo");
    write_pose_file(dir / "demo.txt", d.poses);
    cfg.demo = dir / "demo.txt";
    CHECK(run_experiment(cfg).summary.exit_code == 4);
  }
  SUBCASE("shoulder sweep") {
    std::vector<JointConfig> joints;
    for (int i = 0; i < 100; ++i) joints.push_back(JointConfig{{std::numbers::pi / 2 * i / 99.0, 0.0}});
    const PosePath d = record_demo(m, joints);
    REQUIRE(d.size() == 100);
    CHECK((d.front().translation() - Vec3(2, 0, 0)).norm() < 1e-12);
    CHECK((d.back().translation() - Vec3(0, 2, 0)).norm() < 1e-12);
    // Planning back onto the demo stays on the arc and ends at its goal.
    const PosePath fp = plan(d, d.front(), d.back());
    for (const auto& x : fp.poses) {
      const Vec3 p = x.translation();
      CHECK(std::abs(p.norm() - 2.0) < 1e-9);
      CHECK(std::abs(p.z()) < 1e-12);
      const double heading = 2.0 * std::atan2(x.rotation().z, x.rotation().w);
      CHECK(std::abs(heading - std::atan2(p.y(), p.x())) < 1e-9);
    }
    CHECK(goal_error(fp.back(), d.back()) <= 1e-3);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(record_demo(m, {JointConfig::Zero(3)}), Error);
  }
}

TEST_CASE("retarget") {
  const SerialManipulator planar2 = load_robot("planar2");
  std::vector<JointConfig> joints;
  for (const auto& q : read_joint_file(kData / "planar2_sweep_joints.txt")) joints.push_back(q);
  const ExperimentConfig cfg = baseline_config();
  SUBCASE("same model matches run_experiment") {
    const PosePath demo{read_pose_file(cfg.demo)};
    const ExperimentResult a = retarget_demo(joints, planar2, planar2, *cfg.start_joints, demo.back(), cfg);
    const ExperimentResult b = run_experiment(cfg);
    CHECK(trajectory_csv(a.record) == trajectory_csv(b.record));
  }
  SUBCASE("goal beyond reach") {
    try {
      retarget_demo(joints, planar2, planar2, *cfg.start_joints, UnitDualQuaternion::from_translation({3, 0, 0}), cfg);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Unreachable);
      CHECK(exit_code_for(e.code()) == 2);
    }
  }
}

TEST_CASE("batch keeps input order") {
  std::vector<ExperimentConfig> configs{baseline_config(), avoidance_config(), baseline_config()};
  configs[2].start_joints = JointConfig{{5.0, 0.0, 1.0}};
  const auto results = run_batch(configs, 3);
  REQUIRE(results.size() == 3);
  CHECK(results[0].summary.exit_code == 0);
  CHECK(results[1].summary.avoidance_events >= 1);
  CHECK(results[2].summary.exit_code == 4);
  CHECK(trajectory_csv(results[0].record) == trajectory_csv(run_experiment(configs[0]).record));
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCode::NonConvergence) == 2);
  CHECK(exit_code_for(ErrorCode::Unreachable) == 2);
  CHECK(exit_code_for(ErrorCode::AvoidanceFailure) == 3);
  CHECK(exit_code_for(ErrorCode::ParseError) == 4);
  CHECK(exit_code_for(ErrorCode::InvalidInput) == 4);
  CHECK(exit_code_for(ErrorCode::Io) == 4);
}
