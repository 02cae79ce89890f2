#include "screwplan/dq.hpp"
#include "screwplan/error.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <numbers>

using namespace screwplan;
using namespace screwplan::testing;

namespace {

constexpr double kPi = std::numbers::pi;

Vec8 vec_of(const Quaternion& a, const Quaternion& b) {
  Vec8 v;
  v << a.w, a.x, a.y, a.z, b.w, b.x, b.y, b.z;
  return v;
}

// Hamilton product written out by components.
Quaternion hamilton(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z, a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x, a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

// Screw motion built from matrices: rotate by theta about the line through c
// with direction l, then translate d along l.
UnitDualQuaternion screw_from_matrices(const Vec3& l, const Vec3& c, double theta, double d) {
  const Eigen::AngleAxisd aa(theta, l);
  const Eigen::Matrix3d r = aa.toRotationMatrix();
  const Vec3 p = c - r * c + d * l;
  const Eigen::Quaterniond q(r);
  return UnitDualQuaternion::from_rotation_translation(Quaternion{q.w(), q.x(), q.y(), q.z()}.normalized(), p);
}

}  // namespace

TEST_CASE("quaternion products are associative and conjugation reverses them") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Quaternion a = random_quaternion(rng), b = random_quaternion(rng), c = random_quaternion(rng);
    CHECK(((a * b) * c - a * (b * c)).norm() < 1e-12);
    CHECK(((a * b).conj() - b.conj() * a.conj()).norm() < 1e-12);
    CHECK(((a * b) - hamilton(a, b)).norm() < 1e-12);
  }
}

TEST_CASE("dual quaternion product follows eps^2 = 0") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const DualQuaternion x = random_dq(rng), y = random_dq(rng);
    const DualQuaternion z = x * y;
    const Quaternion p = hamilton(x.primary, y.primary);
    const Quaternion d = hamilton(x.primary, y.dual) + hamilton(x.dual, y.primary);
    CHECK((z.vec() - vec_of(p, d)).norm() < 1e-12);
  }
}

TEST_CASE("vec round-trips exactly") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const DualQuaternion x = random_dq(rng);
    CHECK(DualQuaternion::from_vec(x.vec()).vec() == x.vec());
  }
}

TEST_CASE("from_rotation_translation") {
  SUBCASE("identity") {
    const auto x = UnitDualQuaternion::from_rotation_translation(Quaternion::identity(), Vec3::Zero());
    CHECK((x.vec() - DualQuaternion::identity().vec()).norm() == 0.0);
  }
  SUBCASE("pure translation") {
    const auto x = UnitDualQuaternion::from_rotation_translation(Quaternion::identity(), {1, 2, 3});
    Vec8 expected;
    expected << 1, 0, 0, 0, 0, 0.5, 1, 1.5;
    CHECK((x.vec() - expected).norm() < 1e-15);
  }
  SUBCASE("quarter turn about z") {
    const auto x = UnitDualQuaternion::from_rotation_translation(Quaternion::from_axis_angle(Vec3::UnitZ(), kPi / 2),
                                                                 Vec3::Zero());
    Vec8 expected;
    expected << std::cos(kPi / 4), 0, 0, std::sin(kPi / 4), 0, 0, 0, 0;
    CHECK((x.vec() - expected).norm() < 1e-15);
  }
  SUBCASE("non-unit rotation is rejected") {
    CHECK_THROWS_AS(UnitDualQuaternion::from_rotation_translation({1.1, 0, 0, 0}, Vec3::Zero()), Error);
    try {
      UnitDualQuaternion::from_rotation_translation({0.5, 0, 0, 0}, Vec3::Zero());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidInput);
    }
  }
  SUBCASE("unit conditions and inverse") {
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_pose(rng, 5.0);
      CHECK(std::abs(x.primary().norm() - 1.0) < 1e-9);
      CHECK(std::abs(x.primary().dot(x.dual())) < 1e-9);
      CHECK(((x * x.conj()).vec() - DualQuaternion::identity().vec()).norm() < 1e-9);
    }
  }
}

TEST_CASE("translation") {
  CHECK(UnitDualQuaternion{}.translation().norm() == 0.0);
  const auto x = UnitDualQuaternion::checked({{1, 0, 0, 0}, {0, 0.5, 1, 1.5}});
  CHECK((x.translation() - Vec3(1, 2, 3)).norm() < 1e-15);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Quaternion r = random_rotation(rng);
    const Vec3 p = random_vec3(rng, 3.0);
    const auto y = UnitDualQuaternion::from_rotation_translation(r, p);
    CHECK((y.translation() - p).norm() < 1e-12);
  }
}

TEST_CASE("products match homogeneous matrices") {
  Rng rng(6);
  for (int i = 0; i < 500; ++i) {
    const Quaternion ra = random_rotation(rng), rb = random_rotation(rng);
    const Vec3 pa = random_vec3(rng, 2.0), pb = random_vec3(rng, 2.0);
    const auto a = UnitDualQuaternion::from_rotation_translation(ra, pa);
    const auto b = UnitDualQuaternion::from_rotation_translation(rb, pb);
    const Eigen::Matrix4d expected = homogeneous(ra, pa) * homogeneous(rb, pb);
    CHECK((homogeneous(a * b) - expected).norm() < 1e-12);
    const Vec3 v = random_vec3(rng);
    CHECK((a.transform_point(v) - (expected.topLeftCorner<3, 3>() * Vec3::Zero() +
                                   homogeneous(ra, pa).topLeftCorner<3, 3>() * v + pa))
              .norm() < 1e-12);
  }
}

TEST_CASE("log and exp") {
  SUBCASE("identity") {
    CHECK(log(UnitDualQuaternion{}).vec().norm() == 0.0);
    CHECK((exp(DualQuaternion::zero()).vec() - DualQuaternion::identity().vec()).norm() == 0.0);
  }
  SUBCASE("pure translation") {
    const auto y = log(UnitDualQuaternion::from_translation({2, 0, 0}));
    CHECK(y.primary.norm() < 1e-15);
    CHECK((y.dual.vec3() - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK(std::abs(y.dual.w) < 1e-15);
    const auto x = exp(DualQuaternion::pure(Vec3::Zero(), {1, 0, 0}));
    CHECK((x.translation() - Vec3(2, 0, 0)).norm() < 1e-15);
    CHECK(std::abs(x.primary().w - 1.0) < 1e-15);
  }
  SUBCASE("pure rotation") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
      const Vec3 n = random_unit3(rng);
      const double theta = uniform(rng, 0.0, kPi);
      const auto x = UnitDualQuaternion::from_axis_angle(n, theta);
      const auto y = log(x);
      CHECK((y.primary.vec3() - 0.5 * theta * n).norm() < 1e-12);
      CHECK(y.dual.norm() < 1e-12);
      CHECK(same_pose_distance(exp(y), x) < 1e-12);
    }
  }
  SUBCASE("exp rejects non-pure input") {
    CHECK_THROWS_AS(exp(DualQuaternion{{0.5, 0, 0, 0}, {}}), Error);
    CHECK_THROWS_AS(exp(DualQuaternion{{}, {0.5, 0, 0, 0}}), Error);
  }
  SUBCASE("round trip on random poses and edge angles") {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_pose(rng, 2.0);
      CHECK(same_pose_distance(exp(log(x)), x) < 1e-9);
    }
    for (double theta : {0.0, 1e-12, 1e-9, 1e-6, 1e-3, 1.0, kPi - 1e-3, kPi - 1e-6}) {
      for (int i = 0; i < 50; ++i) {
        const auto x = UnitDualQuaternion::from_rotation_translation(
            Quaternion::from_axis_angle(random_unit3(rng), theta), random_vec3(rng, 2.0));
        CHECK(same_pose_distance(exp(log(x)), x) < 1e-9);
      }
    }
  }
  SUBCASE("log inverts exp inside the principal range") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
      const Vec3 a = random_unit3(rng) * uniform(rng, 0.0, kPi / 2 - 1e-3);
      const Vec3 b = random_vec3(rng, 2.0);
      const DualQuaternion y = DualQuaternion::pure(a, b);
      CHECK((log(exp(y)).vec() - y.vec()).norm() < 1e-9);
    }
  }
  SUBCASE("sign representative does not matter") {
    Rng rng(10);
    for (int i = 0; i < 100; ++i) {
      const auto x = random_pose(rng);
      CHECK((log(x).vec() - log(-x).vec()).norm() < 1e-12);
    }
  }
}

TEST_CASE("pow") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto x = random_pose(rng);
    CHECK(same_pose_distance(pow(x, 0.0), UnitDualQuaternion{}) < 1e-12);
    CHECK(same_pose_distance(pow(x, 1.0), x) < 1e-9);
    CHECK(same_pose_distance(pow(x, 0.5) * pow(x, 0.5), x) < 1e-9);
  }
  SUBCASE("half of a quarter turn matches slerp") {
    const auto x = UnitDualQuaternion::from_axis_angle(Vec3::UnitZ(), kPi / 2);
    const auto h = pow(x, 0.5);
    const Eigen::Quaterniond s =
        Eigen::Quaterniond::Identity().slerp(0.5, Eigen::Quaterniond(Eigen::AngleAxisd(kPi / 2, Vec3::UnitZ())));
    const Vec8 expected = vec_of({s.w(), s.x(), s.y(), s.z()}, {});
    CHECK((h.vec() - expected).norm() < 1e-12);
    CHECK((h.vec() - UnitDualQuaternion::from_axis_angle(Vec3::UnitZ(), kPi / 4).vec()).norm() < 1e-12);
  }
}

TEST_CASE("sclerp") {
  Rng rng(12);
  SUBCASE("endpoints") {
    for (int i = 0; i < 1000; ++i) {
      const auto a = random_pose(rng), b = random_pose(rng);
      CHECK(same_pose_distance(sclerp(a, b, 0.0), a) < 1e-9);
      CHECK(same_pose_distance(sclerp(a, b, 1.0), b) < 1e-9);
    }
  }
  SUBCASE("pure translation is linear") {
    const auto x = sclerp(UnitDualQuaternion{}, UnitDualQuaternion::from_translation({4, 0, 0}), 0.25);
    CHECK((x.translation() - Vec3(1, 0, 0)).norm() < 1e-12);
    CHECK(std::abs(x.primary().w - 1.0) < 1e-15);
  }
  SUBCASE("left invariance") {
    for (int i = 0; i < 500; ++i) {
      const auto a = random_pose(rng), b = random_pose(rng), g = random_pose(rng, 3.0);
      const double t = uniform(rng, 0.0, 1.0);
      CHECK(same_pose_distance(sclerp(g * a, g * b, t), g * sclerp(a, b, t)) < 1e-9);
    }
  }
  SUBCASE("double cover") {
    for (int i = 0; i < 500; ++i) {
      const auto a = random_pose(rng), b = random_pose(rng);
      const double t = uniform(rng, 0.0, 1.0);
      CHECK(same_pose_distance(sclerp(a, b, t), sclerp(a, -b, t)) < 1e-9);
    }
  }
  SUBCASE("constant screw axis") {
    for (int i = 0; i < 200; ++i) {
      const auto a = random_pose(rng), b = random_pose(rng);
      const ScrewParameters ref = screw_parameters(a.conj() * b);
      for (int k = 1; k <= 9; ++k) {
        const ScrewParameters s = screw_parameters(a.conj() * sclerp(a, b, 0.1 * k));
        CHECK(axis_angle_between(s.axis, ref.axis) < 1e-8);
        CHECK((s.moment - ref.moment).norm() < 1e-8);
        CHECK(std::abs(s.angle - 0.1 * k * ref.angle) < 1e-8);
      }
    }
  }
}

TEST_CASE("screw parameters") {
  Rng rng(13);
  SUBCASE("matrix-built screws") {
    for (int i = 0; i < 500; ++i) {
      const Vec3 l = random_unit3(rng);
      const Vec3 c = random_vec3(rng, 2.0);
      const double theta = uniform(rng, 0.01, kPi - 0.01);
      const double d = uniform(rng, -1.0, 1.0);
      const auto x = screw_from_matrices(l, c, theta, d);
      const ScrewParameters s = screw_parameters(x);
      CHECK((s.axis - l).norm() < 1e-9);
      CHECK(std::abs(s.angle - theta) < 1e-9);
      CHECK(std::abs(s.translation - d) < 1e-9);
      CHECK((s.moment - c.cross(l)).norm() < 1e-8);
      CHECK(std::abs(s.axis.dot(s.moment)) < 1e-12);
      CHECK(same_pose_distance(from_screw(s), x) < 1e-9);
    }
  }
  SUBCASE("identity and pure translation") {
    const ScrewParameters id = screw_parameters(UnitDualQuaternion{});
    CHECK(id.axis == Vec3::UnitZ());
    CHECK(id.angle == 0.0);
    CHECK(id.translation == 0.0);
    const ScrewParameters t = screw_parameters(UnitDualQuaternion::from_translation({0, 3, 4}));
    CHECK((t.axis - Vec3(0, 0.6, 0.8)).norm() < 1e-12);
    CHECK(std::abs(t.translation - 5.0) < 1e-12);
    CHECK(t.moment.norm() == 0.0);
  }
}

TEST_CASE("hamilton operators") {
  Rng rng(14);
  CHECK((hamilton_minus(DualQuaternion::identity()) - Mat8::Identity()).norm() == 0.0);
  CHECK((hamilton_plus(DualQuaternion::identity()) - Mat8::Identity()).norm() == 0.0);
  for (int i = 0; i < 1000; ++i) {
    const DualQuaternion a = random_dq(rng), x = random_dq(rng), y = random_dq(rng);
    CHECK(((a * x).vec() - hamilton_minus(x) * a.vec()).norm() < 1e-12);
    CHECK(((x * a).vec() - hamilton_plus(x) * a.vec()).norm() < 1e-12);
    CHECK((hamilton_minus(x * y) - hamilton_minus(y) * hamilton_minus(x)).norm() < 1e-12);
    CHECK((hamilton_plus(x * y) - hamilton_plus(x) * hamilton_plus(y)).norm() < 1e-12);
  }
}

TEST_CASE("c8") {
  Rng rng(15);
  CHECK((c8() * c8() - Mat8::Identity()).norm() == 0.0);
  CHECK((c8() * DualQuaternion::identity().vec() - DualQuaternion::identity().vec()).norm() == 0.0);
  for (int i = 0; i < 100; ++i) {
    const DualQuaternion x = random_dq(rng);
    CHECK((x.conj().vec() - c8() * x.vec()).norm() == 0.0);
  }
}

TEST_CASE("normalization and pose distance") {
  Rng rng(16);
  for (int i = 0; i < 200; ++i) {
    const auto x = random_pose(rng);
    DualQuaternion noisy = x.value();
    noisy.primary *= 1.001;
    noisy.dual += Quaternion{1e-4, 0, 0, 0};
    const auto y = UnitDualQuaternion::normalized(noisy);
    CHECK(std::abs(y.primary().norm() - 1.0) < 1e-12);
    CHECK(std::abs(y.primary().dot(y.dual())) < 1e-12);
    CHECK(pose_distance(x, -x) == 0.0);
    CHECK(pose_distance(x, x) == 0.0);
  }
  CHECK_THROWS_AS(UnitDualQuaternion::checked({{1, 0, 0, 0}, {0.1, 0, 0, 0}}), Error);
}
