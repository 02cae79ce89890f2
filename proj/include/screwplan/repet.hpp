#pragma once

// Reactive deflection around spherical obstacles with plane-oriented escape
// trees. Only the end-effector position is checked against obstacles.

#include "screwplan/dq.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace screwplan {

struct SphereObstacle {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double shell_radius = 0.0;
  /// The obstacle exists from this simulation step on.
  std::size_t activation_step = 0;

  /// shell_radius defaults to 1.5 radius when passed as 0.
  static SphereObstacle make(const Vec3& center, double radius, double shell_radius = 0.0,
                             std::size_t activation_step = 0);
  bool active(std::size_t step) const { return step >= activation_step; }
  /// Throws InvalidInput unless shell_radius > radius > 0.
  void validate() const;
};

struct ObstacleScene {
  std::vector<SphereObstacle> obstacles;

  bool empty() const { return obstacles.empty(); }
  void validate() const;
};

/// YAML: `obstacles: [{center: [x, y, z], radius: r, shell_radius: s, activation_step: k}]`.
ObstacleScene parse_scene(std::string_view yaml_text);
ObstacleScene load_scene(const std::filesystem::path& path);
std::string to_yaml(const ObstacleScene& scene);

struct ClosestObstacle {
  std::size_t index = 0;
  Vec3 surface_point = Vec3::Zero();
  /// Signed distance to the surface (negative inside).
  double distance = 0.0;
};

/// Active obstacle with the smallest surface distance; ties go to the lower index.
std::optional<ClosestObstacle> closest_obstacle(const ObstacleScene& scene, const Vec3& position,
                                                std::size_t step = 0);

/// Closed test: |position - center| <= shell_radius.
bool inside_detection_shell(const Vec3& position, const SphereObstacle& obstacle);

/// Unit vector from the centre towards `position`. Throws DegenerateGeometry at the centre.
Vec3 normal_vector(const Vec3& position, const SphereObstacle& obstacle);

struct TangentPlane {
  Vec3 root = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 v = Vec3::Zero();
  Vec3 u = Vec3::Zero();
  double k_eta = 0.0;
};

/// Plane through `root` orthogonal to the obstacle normal there, with
/// v = i x eta k/2 (j when eta is nearly parallel to i) and u = eta x v.
TangentPlane build_plane(const Vec3& root, double k_eta, const SphereObstacle& obstacle);

/// root +- v, root +- u, root +- v +- u.
std::array<Vec3, 8> candidate_points(const TangentPlane& plane);

/// Minimum distance from `point` to the segment p0-p1.
double segment_point_distance(const Vec3& p0, const Vec3& p1, const Vec3& point);

/// True iff the segment passes closer than radius + inflate to an active obstacle centre.
bool segment_collides(const Vec3& p0, const Vec3& p1, const ObstacleScene& scene, std::size_t step = 0,
                      double inflate = 0.0);

struct RepetParams {
  /// Plane diagonal; 0 uses the obstacle's shell radius.
  double k_eta = 0.0;
  int max_depth = 5;
  double growth = 2.0;
  int max_resamples = 3;
  /// Random in-plane samples added per level after the first attempt.
  int random_samples = 8;
  /// Extra radius used for tree and reconnection checks.
  double clearance_margin = 0.01;
  std::uint64_t seed = 0;
};

struct EscapeNode {
  Vec3 position = Vec3::Zero();
  int parent = -1;
  int depth = 0;
};

struct EscapeTree {
  std::vector<EscapeNode> nodes;
  double k_eta = 0.0;
};

struct EscapeResult {
  /// Starts at the query position; collision-free polyline ending before `reconnection`.
  std::vector<Vec3> waypoints;
  Vec3 reconnection = Vec3::Zero();
  /// Index into the continuation, or nullopt when reconnecting to the goal.
  std::optional<std::size_t> reconnect_index;
  EscapeTree tree;
  int resamples = 0;
  /// Wall-clock seconds spent on each expanded level.
  std::vector<double> level_seconds;
};

/// Searches a detour from translation(x_c) around `scene.obstacles[obstacle]`.
/// `continuation` holds the positions the undisturbed plan would visit next;
/// the detour reconnects to the first of them beyond the shell that is
/// reachable in a straight free line, or to the goal when the goal lies in the
/// shell. Throws AvoidanceFailure when no detour is found.
EscapeResult escape_tree(const UnitDualQuaternion& x_c, const Vec3& goal_position, std::size_t obstacle,
                         const ObstacleScene& scene, std::span<const Vec3> continuation,
                         const RepetParams& params = {}, std::size_t step = 0);

/// Moves the translations of `segment` onto the polyline through `polyline`
/// by matching normalized arc length; rotations stay untouched.
std::vector<UnitDualQuaternion> shift_final_path(std::span<const UnitDualQuaternion> segment,
                                                 std::span<const Vec3> polyline);

/// Inserts ScLERP poses so consecutive translations are at most `max_step` apart.
std::vector<UnitDualQuaternion> densify(std::span<const UnitDualQuaternion> poses, double max_step);

/// Brute-force clearance of a polyline: minimum surface distance over samples
/// spaced at most `resolution` apart.
double polyline_clearance(std::span<const Vec3> points, const ObstacleScene& scene, double resolution,
                          std::size_t step = 0);

}  // namespace screwplan
