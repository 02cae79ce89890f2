#pragma once

// Quaternion and unit dual quaternion algebra.
//
// A rigid pose is the unit dual quaternion x = r + 1/2 eps p r, where r is a
// unit rotation quaternion and p the translation as a pure quaternion. The
// tangent space at the identity uses half-angle screw coordinates, so
// exp(phi/2 n) reproduces r = cos(phi/2) + sin(phi/2) n.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <iosfwd>

namespace screwplan {

using Vec3 = Eigen::Vector3d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// Numeric thresholds of the pose algebra. The defaults are used everywhere
/// unless a caller passes its own set.
struct DqTolerances {
  /// Accepted violation of |P| = 1 and <P, D> = 0.
  double unit_norm = 1e-9;
  /// Half angles below this use series expansions of the sinc factors.
  double small_angle = 1e-6;
};

inline constexpr DqTolerances kDefaultDqTolerances{};

struct Quaternion {
  double w = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Quaternion() = default;
  constexpr Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
  Quaternion(double w_, const Vec3& v) : w(w_), x(v.x()), y(v.y()), z(v.z()) {}

  static constexpr Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static Quaternion pure(const Vec3& v) { return {0.0, v}; }
  /// Rotation by `angle` radians about `axis` (normalized internally).
  static Quaternion from_axis_angle(const Vec3& axis, double angle);

  Vec3 vec3() const { return {x, y, z}; }
  Eigen::Vector4d coeffs() const { return {w, x, y, z}; }

  Quaternion conj() const { return {w, -x, -y, -z}; }
  double dot(const Quaternion& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  double squared_norm() const { return dot(*this); }
  double norm() const;
  Quaternion normalized() const;

  /// Rotates v by this (unit) quaternion: q v q*.
  Vec3 rotate(const Vec3& v) const;

  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  Quaternion& operator+=(const Quaternion& o);
  Quaternion& operator-=(const Quaternion& o);
  Quaternion& operator*=(double s);
};

Quaternion operator+(Quaternion a, const Quaternion& b);
Quaternion operator-(Quaternion a, const Quaternion& b);
Quaternion operator*(const Quaternion& a, const Quaternion& b);
Quaternion operator*(Quaternion a, double s);
Quaternion operator*(double s, Quaternion a);

/// General dual quaternion primary + eps dual, with eps^2 = 0. Tangent-space
/// elements (outputs of log) are plain dual quaternions, not poses.
struct DualQuaternion {
  Quaternion primary;
  Quaternion dual;

  static DualQuaternion zero() { return {}; }
  static DualQuaternion identity() { return {Quaternion::identity(), Quaternion{}}; }
  /// Pure dual vector a + eps b, both parts pure quaternions.
  static DualQuaternion pure(const Vec3& a, const Vec3& b) {
    return {Quaternion::pure(a), Quaternion::pure(b)};
  }
  static DualQuaternion from_vec(const Vec8& v);

  DualQuaternion conj() const { return {primary.conj(), dual.conj()}; }
  Vec8 vec() const;

  DualQuaternion operator-() const { return {-primary, -dual}; }
};

DualQuaternion operator+(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion operator-(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion operator*(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion operator*(const DualQuaternion& a, double s);
DualQuaternion operator*(double s, const DualQuaternion& a);

std::ostream& operator<<(std::ostream& os, const Quaternion& q);
std::ostream& operator<<(std::ostream& os, const DualQuaternion& dq);

/// A rigid-body pose. Always satisfies the unit conditions within
/// DqTolerances::unit_norm; q and -q denote the same pose.
class UnitDualQuaternion {
 public:
  /// Identity pose.
  UnitDualQuaternion() : value_(DualQuaternion::identity()) {}

  /// x = r + 1/2 eps p r. Throws InvalidInput if |r| deviates from one.
  static UnitDualQuaternion from_rotation_translation(const Quaternion& r, const Vec3& p,
                                                      const DqTolerances& tol = kDefaultDqTolerances);
  static UnitDualQuaternion from_translation(const Vec3& p);
  static UnitDualQuaternion from_rotation(const Quaternion& r,
                                          const DqTolerances& tol = kDefaultDqTolerances);
  static UnitDualQuaternion from_axis_angle(const Vec3& axis, double angle);

  /// Wraps `dq` after verifying the unit conditions; throws InvalidInput otherwise.
  static UnitDualQuaternion checked(const DualQuaternion& dq,
                                    const DqTolerances& tol = kDefaultDqTolerances);
  /// Projects an arbitrary non-degenerate dual quaternion onto the unit set.
  static UnitDualQuaternion normalized(const DualQuaternion& dq);
  static UnitDualQuaternion from_vec(const Vec8& v, const DqTolerances& tol = kDefaultDqTolerances) {
    return checked(DualQuaternion::from_vec(v), tol);
  }

  const DualQuaternion& value() const { return value_; }
  const Quaternion& primary() const { return value_.primary; }
  const Quaternion& dual() const { return value_.dual; }
  Vec8 vec() const { return value_.vec(); }

  Quaternion rotation() const { return value_.primary; }
  /// p = 2 D P*.
  Vec3 translation() const;

  /// Conjugate, which is also the group inverse.
  UnitDualQuaternion conj() const { return UnitDualQuaternion(value_.conj()); }
  UnitDualQuaternion operator-() const { return UnitDualQuaternion(-value_); }
  /// Re-projects onto the unit set to remove accumulated round-off.
  UnitDualQuaternion renormalized() const { return normalized(value_); }

  Vec3 transform_point(const Vec3& v) const;

  friend UnitDualQuaternion operator*(const UnitDualQuaternion& a, const UnitDualQuaternion& b) {
    return UnitDualQuaternion(a.value_ * b.value_);
  }

 private:
  explicit UnitDualQuaternion(const DualQuaternion& dq) : value_(dq) {}

  friend UnitDualQuaternion exp(const DualQuaternion& y);

  DualQuaternion value_;
};

std::ostream& operator<<(std::ostream& os, const UnitDualQuaternion& x);

/// Sign representative with non-negative primary scalar (shorter screw).
UnitDualQuaternion shortest(const UnitDualQuaternion& x);

/// Logarithm at the identity: returns (theta/2) l + eps((d/2) l + (theta/2) m)
/// for the screw with axis direction l, moment m, angle theta and pitch
/// translation d. The input is sign-normalized first.
DualQuaternion log(const UnitDualQuaternion& x, const DqTolerances& tol = kDefaultDqTolerances);

/// Exponential at the identity of a pure dual vector. Throws InvalidInput if
/// either part carries a scalar component.
UnitDualQuaternion exp(const DualQuaternion& y);

/// exp(t log(x)); keeps the screw axis of x for every t.
UnitDualQuaternion pow(const UnitDualQuaternion& x, double t);

/// Screw linear interpolation x1 (x1* x2)^t along the shorter screw.
UnitDualQuaternion sclerp(const UnitDualQuaternion& x1, const UnitDualQuaternion& x2, double t);

/// Euclidean distance of coefficient vectors after aligning the sign of `b`
/// with `a`. Zero iff both denote the same pose.
double pose_distance(const UnitDualQuaternion& a, const UnitDualQuaternion& b);

/// Screw decomposition of a pose. For the identity the axis is +z and all
/// other quantities are zero; for a pure translation the axis is the unit
/// translation direction and the moment is zero.
struct ScrewParameters {
  Vec3 axis = Vec3::UnitZ();
  Vec3 moment = Vec3::Zero();
  double angle = 0.0;
  double translation = 0.0;
};

ScrewParameters screw_parameters(const UnitDualQuaternion& x,
                                 const DqTolerances& tol = kDefaultDqTolerances);
UnitDualQuaternion from_screw(const ScrewParameters& s);

/// vec(x a) = H+(x) vec(a).
Mat8 hamilton_plus(const DualQuaternion& x);
/// vec(a x) = H-(x) vec(a).
Mat8 hamilton_minus(const DualQuaternion& x);
/// diag(1,-1,-1,-1,1,-1,-1,-1), so that vec(x*) = C8 vec(x).
const Mat8& c8();

Eigen::Matrix4d hamilton_plus4(const Quaternion& q);
Eigen::Matrix4d hamilton_minus4(const Quaternion& q);

}  // namespace screwplan
