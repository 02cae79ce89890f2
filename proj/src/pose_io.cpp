#include "screwplan/pose_io.hpp"

#include "screwplan/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace screwplan {

namespace {

bool is_separator(char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_separator(s.front()) || s.front() == '\n')) s.remove_prefix(1);
  while (!s.empty() && (is_separator(s.back()) || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

template <typename Fn>
void for_each_data_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    try {
      fn(line);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<double> parse_scalars(std::string_view line) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_separator(line[i])) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_separator(line[j])) ++j;
    const std::string_view token = line.substr(i, j - i);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::ParseError, "malformed number '" + std::string(token) + "'");
    }
    out.push_back(v);
    i = j;
  }
  return out;
}

UnitDualQuaternion pose_from_scalars(std::span<const double> v) {
  if (v.size() == 8) {
    const DualQuaternion dq{{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]}};
    UnitDualQuaternion::checked(dq, {.unit_norm = kPoseInputTolerance});
    // Values written by format_pose are kept bit for bit.
    const double defect = std::max(std::abs(dq.primary.norm() - 1.0), std::abs(dq.primary.dot(dq.dual)));
    if (defect <= 1e-14) return UnitDualQuaternion::checked(dq);
    return UnitDualQuaternion::normalized(dq);
  }
  if (v.size() == 7) {
    const Quaternion r{v[3], v[4], v[5], v[6]};
    if (std::abs(r.norm() - 1.0) > kPoseInputTolerance) {
      throw Error(ErrorCode::InvalidInput, "rotation quaternion is not unit");
    }
    return UnitDualQuaternion::from_rotation_translation(r.normalized(), Vec3{v[0], v[1], v[2]});
  }
  throw Error(ErrorCode::ParseError,
              "a pose needs 8 or 7 scalars, got " + std::to_string(v.size()));
}

UnitDualQuaternion parse_pose(std::string_view text) {
  const auto v = parse_scalars(trim(text));
  return pose_from_scalars(v);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_pose(const UnitDualQuaternion& x) {
  const Vec8 v = x.vec();
  std::string out;
  for (int i = 0; i < 8; ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<UnitDualQuaternion> parse_pose_lines(std::string_view text) {
  std::vector<UnitDualQuaternion> poses;
  for_each_data_line(text, [&](std::string_view line) { poses.push_back(parse_pose(line)); });
  return poses;
}

std::vector<UnitDualQuaternion> read_pose_file(const std::filesystem::path& path) {
  try {
    return parse_pose_lines(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_pose_file(const std::filesystem::path& path, std::span<const UnitDualQuaternion> poses,
                     std::string_view header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  }
  out << "# pw px py pz dw dx dy dz\n";
  if (!header.empty()) out << "# " << header << "\n";
  for (const auto& x : poses) out << format_pose(x) << "\n";
}

std::vector<Eigen::VectorXd> parse_joint_lines(std::string_view text) {
  std::vector<Eigen::VectorXd> rows;
  for_each_data_line(text, [&](std::string_view line) {
    const auto v = parse_scalars(line);
    if (!rows.empty() && static_cast<Eigen::Index>(v.size()) != rows.front().size()) {
      throw Error(ErrorCode::ParseError, "joint row " + std::to_string(rows.size() + 1) + " has " +
                                             std::to_string(v.size()) + " values, expected " +
                                             std::to_string(rows.front().size()));
    }
    rows.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  });
  return rows;
}

std::vector<Eigen::VectorXd> read_joint_file(const std::filesystem::path& path) {
  return parse_joint_lines(read_text_file(path));
}

}  // namespace screwplan
