#pragma once

// Text formats for poses and joint trajectories.
//
// A pose is written as 8 scalars (pw px py pz dw dx dy dz). Readers also
// accept the 7-scalar form (tx ty tz qw qx qy qz). Scalars may be separated by
// whitespace or commas; lines starting with '#' are comments.

#include "screwplan/dq.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace screwplan {

/// Inputs read from text are accepted if they are this close to unit and are
/// then re-projected onto the unit set.
inline constexpr double kPoseInputTolerance = 1e-6;

/// Splits a line into scalars. Throws ParseError on malformed numbers.
std::vector<double> parse_scalars(std::string_view line);

/// Builds a pose from 8 (dual quaternion) or 7 (translation + quaternion) scalars.
UnitDualQuaternion pose_from_scalars(std::span<const double> values);
UnitDualQuaternion parse_pose(std::string_view text);

/// Shortest round-trip decimal form (17 significant digits).
std::string format_double(double v);
/// 8 space-separated scalars.
std::string format_pose(const UnitDualQuaternion& x);

std::vector<UnitDualQuaternion> read_pose_file(const std::filesystem::path& path);
std::vector<UnitDualQuaternion> parse_pose_lines(std::string_view text);
void write_pose_file(const std::filesystem::path& path, std::span<const UnitDualQuaternion> poses,
                     std::string_view header = {});

/// One joint configuration per line.
std::vector<Eigen::VectorXd> read_joint_file(const std::filesystem::path& path);
std::vector<Eigen::VectorXd> parse_joint_lines(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace screwplan
