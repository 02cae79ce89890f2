#include "screwplan/error.hpp"
#include "screwplan/pose_io.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>

using namespace screwplan;
using namespace screwplan::testing;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("scalars") {
  CHECK(parse_scalars("1 2 3") == std::vector<double>{1, 2, 3});
  CHECK(parse_scalars(" 1,2 ,\t3 ") == std::vector<double>{1, 2, 3});
  CHECK(parse_scalars("-1e-3, 4.5e2") == std::vector<double>{-1e-3, 450});
  CHECK(parse_scalars("").empty());
  CHECK(code_of([] { parse_scalars("1 two 3"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_scalars("1.2.3"); }) == ErrorCode::ParseError);
}

TEST_CASE("eight and seven scalar forms") {
  const auto a = parse_pose("1 0 0 0 0 0.5 1 1.5");
  CHECK((a.translation() - Vec3(1, 2, 3)).norm() < 1e-15);
  const auto b = parse_pose("1, 2, 3, 1, 0, 0, 0");
  CHECK((b.vec() - a.vec()).norm() < 1e-15);
  const auto c = parse_pose("0 0 0 0.7071067811865476 0 0 0.7071067811865476");
  CHECK(same_pose_distance(c, UnitDualQuaternion::from_axis_angle(Vec3::UnitZ(), std::numbers::pi / 2)) < 1e-15);
  // Slightly off-unit input is projected back.
  const auto d = parse_pose("1.0000001 0 0 0 0 0 0 0");
  CHECK(std::abs(d.primary().norm() - 1.0) < 1e-15);
  CHECK(code_of([] { parse_pose("2 0 0 0 0 0 0 0"); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { parse_pose("1 0 0 0 0 0"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_pose("0 0 0 0 0 0 0"); }) == ErrorCode::InvalidInput);
}

TEST_CASE("formatting round-trips exactly") {
  Rng rng(61);
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_pose(rng, 3.0);
    CHECK(parse_pose(format_pose(x)).vec() == x.vec());
    const double v = uniform(rng, -1e6, 1e6);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("pose files") {
  Rng rng(62);
  std::vector<UnitDualQuaternion> poses;
  for (int i = 0; i < 25; ++i) poses.push_back(random_pose(rng));
  const auto path = std::filesystem::temp_directory_path() / "screwplan_pose_io.txt";
  write_pose_file(path, poses, "unit test");
  const auto back = read_pose_file(path);
  REQUIRE(back.size() == poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) CHECK(back[i].vec() == poses[i].vec());
  const std::string text = read_text_file(path);
  CHECK(text.rfind("# pw px py pz dw dx dy dz\n# unit test\n", 0) == 0);

  CHECK(parse_pose_lines("# header\n\n1 0 0 0 0 0 0 0\n  # indented comment\n0 0 1 1 0 0 0\n").size() == 2);
  CHECK(code_of([] { parse_pose_lines("1 0 0 0 0 0 0 0\n1 0 0\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { read_pose_file("/nonexistent/screwplan/poses.txt"); }) == ErrorCode::Io);
}

TEST_CASE("joint files") {
  const auto rows = parse_joint_lines("# q1 q2\n0 1\n0.5, -0.5\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][1] == -0.5);
  CHECK(code_of([] { parse_joint_lines("0 1\n0 1 2\n"); }) != ErrorCode::Io);
  CHECK(code_of([] { read_joint_file("/nonexistent/screwplan/joints.txt"); }) == ErrorCode::Io);
}
