#include "screwplan/repet.hpp"

#include "screwplan/error.hpp"
#include "screwplan/pose_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace screwplan {

SphereObstacle SphereObstacle::make(const Vec3& center, double radius, double shell_radius,
                                    std::size_t activation_step) {
  SphereObstacle o{center, radius, shell_radius > 0.0 ? shell_radius : 1.5 * radius, activation_step};
  o.validate();
  return o;
}

void SphereObstacle::validate() const {
  if (!center.allFinite() || !(radius > 0.0) || !(shell_radius > radius)) {
    std::ostringstream msg;
    msg << "obstacle needs shell_radius > radius > 0 (radius " << radius << ", shell " << shell_radius
        << ")";
    throw Error(ErrorCode::InvalidInput, msg.str());
  }
}

void ObstacleScene::validate() const {
  for (const auto& o : obstacles) o.validate();
}

ObstacleScene parse_scene(std::string_view yaml_text) {
  ObstacleScene scene;
  try {
    const YAML::Node root = YAML::Load(std::string(yaml_text));
    if (root.IsNull()) return scene;
    const YAML::Node list = root.IsSequence() ? root : root["obstacles"];
    if (!list) return scene;
    if (!list.IsSequence()) throw Error(ErrorCode::ParseError, "'obstacles' must be a list");
    for (const auto& n : list) {
      const YAML::Node c = n["center"];
      if (!c || !c.IsSequence() || c.size() != 3) {
        throw Error(ErrorCode::ParseError, "obstacle needs a 3-element 'center'");
      }
      if (!n["radius"]) throw Error(ErrorCode::ParseError, "obstacle needs a 'radius'");
      const Vec3 center(c[0].as<double>(), c[1].as<double>(), c[2].as<double>());
      const double r = n["radius"].as<double>();
      const double s = n["shell_radius"] ? n["shell_radius"].as<double>() : 0.0;
      const std::size_t k = n["activation_step"] ? n["activation_step"].as<std::size_t>() : 0;
      try {
        scene.obstacles.push_back(SphereObstacle::make(center, r, s, k));
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, e.what());
      }
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scene file: ") + e.what());
  }
  return scene;
}

ObstacleScene load_scene(const std::filesystem::path& path) { return parse_scene(read_text_file(path)); }

std::string to_yaml(const ObstacleScene& scene) {
  std::ostringstream os;
  os << "obstacles:\n";
  for (const auto& o : scene.obstacles) {
    os << "  - center: [" << format_double(o.center.x()) << ", " << format_double(o.center.y()) << ", "
       << format_double(o.center.z()) << "]\n";
    os << "    radius: " << format_double(o.radius) << "\n";
    os << "    shell_radius: " << format_double(o.shell_radius) << "\n";
    os << "    activation_step: " << o.activation_step << "\n";
  }
  return os.str();
}

std::optional<ClosestObstacle> closest_obstacle(const ObstacleScene& scene, const Vec3& position,
                                                std::size_t step) {
  std::optional<ClosestObstacle> best;
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const auto& o = scene.obstacles[i];
    if (!o.active(step)) continue;
    const Vec3 d = position - o.center;
    const double dist = d.norm() - o.radius;
    if (best && !(dist < best->distance)) continue;
    const Vec3 dir = d.norm() > 0.0 ? Vec3(d / d.norm()) : Vec3::UnitZ();
    best = ClosestObstacle{i, o.center + o.radius * dir, dist};
  }
  return best;
}

bool inside_detection_shell(const Vec3& position, const SphereObstacle& obstacle) {
  return (position - obstacle.center).norm() <= obstacle.shell_radius;
}

Vec3 normal_vector(const Vec3& position, const SphereObstacle& obstacle) {
  const Vec3 d = position - obstacle.center;
  const double n = d.norm();
  if (!(n > 1e-12)) throw Error(ErrorCode::DegenerateGeometry, "position coincides with obstacle centre");
  return d / n;
}

TangentPlane build_plane(const Vec3& root, double k_eta, const SphereObstacle& obstacle) {
  if (!(k_eta > 0.0)) throw Error(ErrorCode::InvalidInput, "k_eta must be positive");
  const Vec3 eta = normal_vector(root, obstacle);
  const Vec3 ref = std::abs(eta.x()) > 0.99 ? Vec3::UnitY() : Vec3::UnitX();
  Vec3 v = ref.cross(eta);
  v *= 0.5 * k_eta / v.norm();
  return {root, eta, v, eta.cross(v), k_eta};
}

std::array<Vec3, 8> candidate_points(const TangentPlane& p) {
  const Vec3& r = p.root;
  return {r + p.v, r - p.v, r + p.u, r - p.u, r + p.v + p.u, r + p.v - p.u, r - p.v + p.u, r - p.v - p.u};
}

double segment_point_distance(const Vec3& p0, const Vec3& p1, const Vec3& point) {
  const Vec3 d = p1 - p0;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (point - p0).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p0 + t * d - point).norm();
}

bool segment_collides(const Vec3& p0, const Vec3& p1, const ObstacleScene& scene, std::size_t step,
                      double inflate) {
  for (const auto& o : scene.obstacles) {
    if (o.active(step) && segment_point_distance(p0, p1, o.center) < o.radius + inflate) return true;
  }
  return false;
}

namespace {

struct Target {
  Vec3 position;
  std::optional<std::size_t> index;
};

std::vector<Target> reconnection_targets(const Vec3& goal, const SphereObstacle& obstacle,
                                         std::span<const Vec3> continuation) {
  std::vector<Target> targets;
  if (inside_detection_shell(goal, obstacle)) {
    targets.push_back({goal, std::nullopt});
    return targets;
  }
  std::size_t i = 0;
  while (i < continuation.size() && inside_detection_shell(continuation[i], obstacle)) ++i;
  for (; i < continuation.size(); ++i) {
    if (!inside_detection_shell(continuation[i], obstacle)) targets.push_back({continuation[i], i});
  }
  targets.push_back({goal, std::nullopt});
  return targets;
}

}  // namespace

EscapeResult escape_tree(const UnitDualQuaternion& x_c, const Vec3& goal_position, std::size_t obstacle,
                         const ObstacleScene& scene, std::span<const Vec3> continuation,
                         const RepetParams& params, std::size_t step) {
  using clock = std::chrono::steady_clock;
  if (obstacle >= scene.obstacles.size()) throw Error(ErrorCode::InvalidInput, "obstacle index out of range");
  const SphereObstacle& obs = scene.obstacles[obstacle];
  const Vec3 start = x_c.translation();

  for (const auto& o : scene.obstacles) {
    if (!o.active(step)) continue;
    if ((goal_position - o.center).norm() < o.radius) {
      throw Error(ErrorCode::AvoidanceFailure, "goal lies inside an obstacle");
    }
  }
  const auto start_clearance = closest_obstacle(scene, start, step);
  if (start_clearance && start_clearance->distance <= 0.0) {
    throw Error(ErrorCode::AvoidanceFailure, "current position lies inside an obstacle");
  }
  // Segments leaving the start may not be able to honour the full margin.
  const double margin =
      start_clearance ? std::clamp(0.5 * start_clearance->distance, 0.0, params.clearance_margin)
                      : params.clearance_margin;

  const auto targets = reconnection_targets(goal_position, obs, continuation);
  auto reconnect = [&](const Vec3& from) -> const Target* {
    for (const auto& t : targets) {
      if (!segment_collides(from, t.position, scene, step, margin)) return &t;
    }
    return nullptr;
  };

  EscapeResult result;
  auto finish = [&](const EscapeTree& tree, int leaf, const Target& t) {
    std::vector<Vec3> chain;
    for (int i = leaf; i >= 0; i = tree.nodes[static_cast<std::size_t>(i)].parent) {
      chain.push_back(tree.nodes[static_cast<std::size_t>(i)].position);
    }
    std::reverse(chain.begin(), chain.end());
    result.waypoints = std::move(chain);
    result.reconnection = t.position;
    result.reconnect_index = t.index;
    result.tree = tree;
  };

  double k = params.k_eta > 0.0 ? params.k_eta : obs.shell_radius;
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (int attempt = 0; attempt <= params.max_resamples; ++attempt) {
    EscapeTree tree{{EscapeNode{start, -1, 0}}, k};
    if (const Target* t = reconnect(start)) {
      finish(tree, 0, *t);
      result.resamples = attempt;
      return result;
    }
    int root = 0;
    for (int depth = 1; depth <= params.max_depth; ++depth) {
      const auto t0 = clock::now();
      const Vec3 root_pos = tree.nodes[static_cast<std::size_t>(root)].position;
      const TangentPlane plane = build_plane(root_pos, k, obs);
      std::vector<Vec3> cands;
      for (const Vec3& c : candidate_points(plane)) cands.push_back(c);
      if (attempt > 0) {
        for (int s = 0; s < params.random_samples; ++s) {
          cands.push_back(root_pos + unit(rng) * plane.v + unit(rng) * plane.u);
        }
      }

      struct Child {
        int node;
        double cost;
      };
      std::vector<Child> children;
      for (const Vec3& c : cands) {
        if (segment_collides(root_pos, c, scene, step, margin)) continue;
        tree.nodes.push_back({c, root, depth});
        children.push_back({static_cast<int>(tree.nodes.size()) - 1, (c - goal_position).norm()});
      }
      std::stable_sort(children.begin(), children.end(),
                       [](const Child& a, const Child& b) { return a.cost < b.cost; });

      const Target* hit = nullptr;
      int hit_node = -1;
      for (const Child& ch : children) {
        if ((hit = reconnect(tree.nodes[static_cast<std::size_t>(ch.node)].position))) {
          hit_node = ch.node;
          break;
        }
      }
      result.level_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
      if (hit) {
        finish(tree, hit_node, *hit);
        result.resamples = attempt;
        return result;
      }
      if (children.empty()) break;
      root = children.front().node;
    }
    k *= params.growth;
  }
  std::ostringstream msg;
  msg << "no escape path around obstacle " << obstacle << " after " << params.max_resamples
      << " resamples";
  throw Error(ErrorCode::AvoidanceFailure, msg.str());
}

std::vector<UnitDualQuaternion> shift_final_path(std::span<const UnitDualQuaternion> segment,
                                                 std::span<const Vec3> polyline) {
  std::vector<UnitDualQuaternion> out(segment.begin(), segment.end());
  if (polyline.size() < 2 || segment.size() < 2) return out;

  std::vector<double> seg_s(segment.size(), 0.0);
  for (std::size_t i = 1; i < segment.size(); ++i) {
    seg_s[i] = seg_s[i - 1] + (segment[i].translation() - segment[i - 1].translation()).norm();
  }
  std::vector<double> poly_s(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    poly_s[i] = poly_s[i - 1] + (polyline[i] - polyline[i - 1]).norm();
  }
  const double seg_total = seg_s.back();
  const double poly_total = poly_s.back();

  std::size_t j = 0;
  for (std::size_t i = 0; i < segment.size(); ++i) {
    const double f = seg_total > 0.0 ? seg_s[i] / seg_total
                                     : static_cast<double>(i) / static_cast<double>(segment.size() - 1);
    const double s = f * poly_total;
    while (j + 2 < polyline.size() && poly_s[j + 1] < s) ++j;
    const double len = poly_s[j + 1] - poly_s[j];
    const double t = len > 0.0 ? std::clamp((s - poly_s[j]) / len, 0.0, 1.0) : 0.0;
    const Vec3 p = i + 1 == segment.size() ? polyline.back() : Vec3(polyline[j] + t * (polyline[j + 1] - polyline[j]));
    out[i] = UnitDualQuaternion::from_rotation_translation(segment[i].rotation(), p);
  }
  return out;
}

std::vector<UnitDualQuaternion> densify(std::span<const UnitDualQuaternion> poses, double max_step) {
  std::vector<UnitDualQuaternion> out;
  if (poses.empty()) return out;
  if (!(max_step > 0.0)) throw Error(ErrorCode::InvalidInput, "max_step must be positive");
  out.push_back(poses[0]);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    const double d = (poses[i].translation() - poses[i - 1].translation()).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(d / max_step)));
    for (int k = 1; k < n; ++k) out.push_back(sclerp(poses[i - 1], poses[i], static_cast<double>(k) / n));
    out.push_back(poses[i]);
  }
  return out;
}

double polyline_clearance(std::span<const Vec3> points, const ObstacleScene& scene, double resolution,
                          std::size_t step) {
  double best = std::numeric_limits<double>::infinity();
  auto probe = [&](const Vec3& p) {
    for (const auto& o : scene.obstacles) {
      if (o.active(step)) best = std::min(best, (p - o.center).norm() - o.radius);
    }
  };
  if (points.empty()) return best;
  probe(points[0]);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Vec3 d = points[i] - points[i - 1];
    const int n = std::max(1, static_cast<int>(std::ceil(d.norm() / resolution)));
    for (int k = 1; k <= n; ++k) probe(points[i - 1] + (static_cast<double>(k) / n) * d);
  }
  return best;
}

}  // namespace screwplan
