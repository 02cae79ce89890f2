#include "screwplan/tsia.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace screwplan {

void PlannerParams::validate() const {
  if (!(tau_step > 0.0 && tau_step <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "tau_step must lie in (0, 1]");
  }
  if (!(goal_tolerance > 0.0)) throw Error(ErrorCode::InvalidInput, "goal_tolerance must be positive");
  if (!(guiding_fraction >= 0.0 && guiding_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "guiding_fraction must lie in [0, 1]");
  }
}

std::size_t PlannerParams::iteration_budget(std::size_t path_length) const {
  if (max_iterations > 0) return max_iterations;
  return static_cast<std::size_t>(std::ceil(10.0 * static_cast<double>(path_length) / tau_step));
}

std::vector<UnitDualQuaternion> collapse_duplicates(std::span<const UnitDualQuaternion> poses,
                                                    double eps) {
  std::vector<UnitDualQuaternion> out;
  out.reserve(poses.size());
  for (const auto& p : poses) {
    if (out.empty() || pose_distance(out.back(), p) >= eps) out.push_back(p);
  }
  return out;
}

std::vector<UnitDualQuaternion> relative_transforms(const PosePath& dp) {
  const std::size_t n = dp.size();
  if (n < 2) {
    throw Error(ErrorCode::PathTooShort,
                "demonstration needs at least 2 distinct poses, got " + std::to_string(n));
  }
  std::vector<UnitDualQuaternion> deltas;
  deltas.reserve(n - 1);
  const UnitDualQuaternion& last = dp.back();
  for (std::size_t i = 0; i + 1 < n; ++i) deltas.push_back(dp[i].conj() * last);
  return deltas;
}

PosePath imitated_path(std::span<const UnitDualQuaternion> deltas, const UnitDualQuaternion& goal) {
  PosePath ip{{}, PathKind::Imitated};
  ip.poses.reserve(deltas.size() + 1);
  for (const auto& d : deltas) ip.poses.push_back(goal * d.conj());
  ip.poses.push_back(goal);
  return ip;
}

UnitDualQuaternion target_pose(const UnitDualQuaternion& d_c, const UnitDualQuaternion& d_guid,
                               double tau) {
  return sclerp(d_c, d_guid, tau);
}

GuideSelection select_guiding_pose(const PosePath& ip, std::optional<std::size_t> current_index,
                                   const PlannerParams& params) {
  const std::size_t n = ip.size();
  if (n == 0) throw Error(ErrorCode::PathTooShort, "imitated path is empty");
  std::size_t index;
  if (n == 1) {
    index = 0;
  } else if (!current_index) {
    const auto first = static_cast<long long>(std::ceil(params.guiding_fraction * static_cast<double>(n)));
    index = static_cast<std::size_t>(std::clamp<long long>(first, 1, static_cast<long long>(n) - 1));
  } else {
    index = std::min(*current_index + 1, n - 1);
  }
  return {ip[index], index};
}

double goal_error(const UnitDualQuaternion& d_c, const UnitDualQuaternion& d_goal) {
  const Vec8 a = d_c.vec();
  Vec8 b = d_goal.vec();
  if (a.dot(b) < 0.0) b = -b;
  return (a - b).norm();
}

StepExecutor open_loop_executor() {
  return [](const UnitDualQuaternion& target, const PlanStep&) {
    return StepOutcome{{target}};
  };
}

PosePath plan(const PosePath& dp, const UnitDualQuaternion& start, const UnitDualQuaternion& goal,
              const PlannerParams& params, const StepExecutor& executor) {
  params.validate();
  PosePath clean{collapse_duplicates(dp.poses), PathKind::Demonstrated};
  const auto deltas = relative_transforms(clean);
  return plan_on(imitated_path(deltas, goal), start, params, executor);
}

PosePath plan_on(const PosePath& ip, const UnitDualQuaternion& start, const PlannerParams& params,
                 const StepExecutor& executor) {
  params.validate();
  if (ip.size() < 2) {
    throw Error(ErrorCode::PathTooShort, "imitated path needs at least 2 poses");
  }
  const UnitDualQuaternion& goal = ip.back();
  const std::size_t budget = params.iteration_budget(ip.size());

  PosePath fp{{start}, PathKind::Final};
  UnitDualQuaternion current = start;
  std::size_t guide = select_guiding_pose(ip, std::nullopt, params).index;
  std::size_t iteration = 0;

  while (goal_error(current, goal) > params.goal_tolerance) {
    if (iteration >= budget) {
      std::ostringstream msg;
      msg << "planner did not reach the goal within " << budget << " iterations (goal error "
          << goal_error(current, goal) << ")";
      throw NonConvergenceError(msg.str(), std::move(fp));
    }
    const UnitDualQuaternion target = target_pose(current, ip[guide], params.tau_step);
    const PlanStep step{ip, params, current, guide, iteration};
    StepOutcome reached = executor(target, step);
    if (reached.poses.empty()) throw Error(ErrorCode::InvalidInput, "step executor returned no pose");
    for (auto& p : reached.poses) fp.poses.push_back(p);
    current = fp.poses.back();
    const std::size_t used = reached.iterations > 0 ? reached.iterations : reached.poses.size();
    iteration += used;
    guide = std::min(guide + used, ip.size() - 1);
  }
  if (fp.size() == 1) fp.poses.push_back(goal);
  return fp;
}

std::vector<UnitDualQuaternion> predict(const PosePath& ip, const UnitDualQuaternion& current,
                                        std::size_t guide_index, const PlannerParams& params,
                                        std::size_t count) {
  std::vector<UnitDualQuaternion> out;
  if (ip.size() == 0) return out;
  out.reserve(count);
  UnitDualQuaternion x = current;
  std::size_t guide = std::min(guide_index, ip.size() - 1);
  const UnitDualQuaternion& goal = ip.back();
  while (out.size() < count && goal_error(x, goal) > params.goal_tolerance) {
    x = target_pose(x, ip[guide], params.tau_step);
    out.push_back(x);
    guide = std::min(guide + 1, ip.size() - 1);
  }
  return out;
}

}  // namespace screwplan
