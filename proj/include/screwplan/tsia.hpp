#pragma once

// Task-space imitation: replay the relative motion of one demonstration
// backwards from a new goal and blend into it from a new start with ScLERP.

#include "screwplan/dq.hpp"
#include "screwplan/error.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace screwplan {

enum class PathKind { Demonstrated, Imitated, Final };

struct PosePath {
  std::vector<UnitDualQuaternion> poses;
  PathKind kind = PathKind::Demonstrated;

  std::size_t size() const { return poses.size(); }
  const UnitDualQuaternion& operator[](std::size_t i) const { return poses[i]; }
  const UnitDualQuaternion& front() const { return poses.front(); }
  const UnitDualQuaternion& back() const { return poses.back(); }
};

struct PlannerParams {
  double tau_step = 0.01;
  /// Threshold on goal_error.
  double goal_tolerance = 1e-3;
  /// First guiding pose sits at ceil(fraction * n) on the imitated path.
  double guiding_fraction = 0.2;
  /// 0 selects 10 n / tau_step.
  std::size_t max_iterations = 0;

  /// Throws InvalidInput on out-of-range values.
  void validate() const;
  std::size_t iteration_budget(std::size_t path_length) const;
};

/// Drops poses closer than `eps` (coefficient distance, sign-aware) to their predecessor.
std::vector<UnitDualQuaternion> collapse_duplicates(std::span<const UnitDualQuaternion> poses,
                                                    double eps = 1e-10);

/// delta_i = d_{i-1}* d_n for i = 2..n. Throws PathTooShort for fewer than two poses.
std::vector<UnitDualQuaternion> relative_transforms(const PosePath& dp);

/// d'_n = goal and d'_{i-1} = d'_n delta_i*.
PosePath imitated_path(std::span<const UnitDualQuaternion> deltas, const UnitDualQuaternion& goal);

/// d_c (d_c* d_guid)^tau.
UnitDualQuaternion target_pose(const UnitDualQuaternion& d_c, const UnitDualQuaternion& d_guid,
                               double tau);

struct GuideSelection {
  UnitDualQuaternion pose;
  std::size_t index = 0;
};

/// With no current index returns the first guide, ceil(fraction n) clamped to
/// [1, n-1] (0-based); otherwise advances by one and stops at the goal.
GuideSelection select_guiding_pose(const PosePath& ip, std::optional<std::size_t> current_index,
                                   const PlannerParams& params);

/// |vec(d_c) - vec(d_goal)| with the goal's sign aligned to d_c.
double goal_error(const UnitDualQuaternion& d_c, const UnitDualQuaternion& d_goal);

/// What the executor sees at each planner iteration.
struct PlanStep {
  const PosePath& ip;
  const PlannerParams& params;
  const UnitDualQuaternion& current;
  std::size_t guide_index;
  std::size_t iteration;
};

/// Poses actually reached, in order, and the number of planner iterations
/// they stand for (0 means one per pose). The guide advances by that count.
struct StepOutcome {
  std::vector<UnitDualQuaternion> poses;
  std::size_t iterations = 0;

  StepOutcome() = default;
  StepOutcome(std::vector<UnitDualQuaternion> p, std::size_t it = 0) : poses(std::move(p)), iterations(it) {}
};

using StepExecutor = std::function<StepOutcome(const UnitDualQuaternion& target, const PlanStep& step)>;

/// Executor that reaches every target exactly.
StepExecutor open_loop_executor();

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, PosePath partial)
      : Error(ErrorCode::NonConvergence, what), partial_(std::move(partial)) {}

  const PosePath& partial_path() const { return partial_; }

 private:
  PosePath partial_;
};

/// Runs the imitation loop from `start` toward the imitated path ending at
/// `goal`. Consecutive duplicates in `dp` are collapsed first.
PosePath plan(const PosePath& dp, const UnitDualQuaternion& start, const UnitDualQuaternion& goal,
              const PlannerParams& params = {}, const StepExecutor& executor = open_loop_executor());

/// Same loop over an already imitated path.
PosePath plan_on(const PosePath& ip, const UnitDualQuaternion& start, const PlannerParams& params = {},
                 const StepExecutor& executor = open_loop_executor());

/// Open-loop continuation from `current` with the guide at `guide_index`: the
/// next at most `count` poses the planner would produce without disturbance.
/// Stops early once the goal tolerance is met.
std::vector<UnitDualQuaternion> predict(const PosePath& ip, const UnitDualQuaternion& current,
                                        std::size_t guide_index, const PlannerParams& params,
                                        std::size_t count);

}  // namespace screwplan
