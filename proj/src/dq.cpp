#include "screwplan/dq.hpp"

#include "screwplan/error.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace screwplan {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::InconsistentLimits: return "inconsistent_limits";
    case ErrorCode::PathTooShort: return "path_too_short";
    case ErrorCode::NonConvergence: return "non_convergence";
    case ErrorCode::DegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::AvoidanceFailure: return "avoidance_failure";
    case ErrorCode::Unreachable: return "unreachable";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Quaternion

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) {
    throw Error(ErrorCode::InvalidInput, "rotation axis has zero length");
  }
  const double h = 0.5 * angle;
  return {std::cos(h), (std::sin(h) / n) * axis};
}

double Quaternion::norm() const { return std::sqrt(squared_norm()); }

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (n == 0.0) {
    throw Error(ErrorCode::InvalidInput, "cannot normalize a zero quaternion");
  }
  return *this * (1.0 / n);
}

Vec3 Quaternion::rotate(const Vec3& v) const {
  // v + 2 w (u x v) + 2 u x (u x v)
  const Vec3 u = vec3();
  const Vec3 t = 2.0 * u.cross(v);
  return v + w * t + u.cross(t);
}

Quaternion& Quaternion::operator+=(const Quaternion& o) {
  w += o.w;
  x += o.x;
  y += o.y;
  z += o.z;
  return *this;
}

Quaternion& Quaternion::operator-=(const Quaternion& o) {
  w -= o.w;
  x -= o.x;
  y -= o.y;
  z -= o.z;
  return *this;
}

Quaternion& Quaternion::operator*=(double s) {
  w *= s;
  x *= s;
  y *= s;
  z *= s;
  return *this;
}

Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
Quaternion operator*(Quaternion a, double s) { return a *= s; }
Quaternion operator*(double s, Quaternion a) { return a *= s; }

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
  return os << "(" << q.w << ", " << q.x << ", " << q.y << ", " << q.z << ")";
}

// ---------------------------------------------------------------------------
// DualQuaternion

DualQuaternion DualQuaternion::from_vec(const Vec8& v) {
  return {{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]}};
}

Vec8 DualQuaternion::vec() const {
  Vec8 v;
  v << primary.w, primary.x, primary.y, primary.z, dual.w, dual.x, dual.y, dual.z;
  return v;
}

DualQuaternion operator+(const DualQuaternion& a, const DualQuaternion& b) {
  return {a.primary + b.primary, a.dual + b.dual};
}

DualQuaternion operator-(const DualQuaternion& a, const DualQuaternion& b) {
  return {a.primary - b.primary, a.dual - b.dual};
}

DualQuaternion operator*(const DualQuaternion& a, const DualQuaternion& b) {
  return {a.primary * b.primary, a.primary * b.dual + a.dual * b.primary};
}

DualQuaternion operator*(const DualQuaternion& a, double s) { return {a.primary * s, a.dual * s}; }
DualQuaternion operator*(double s, const DualQuaternion& a) { return a * s; }

std::ostream& operator<<(std::ostream& os, const DualQuaternion& dq) {
  return os << dq.primary << " + e" << dq.dual;
}

// ---------------------------------------------------------------------------
// UnitDualQuaternion

UnitDualQuaternion UnitDualQuaternion::from_rotation_translation(const Quaternion& r, const Vec3& p,
                                                                 const DqTolerances& tol) {
  if (std::abs(r.norm() - 1.0) > tol.unit_norm) {
    std::ostringstream msg;
    msg << "rotation quaternion is not unit (norm " << std::setprecision(17) << r.norm() << ")";
    throw Error(ErrorCode::InvalidInput, msg.str());
  }
  return UnitDualQuaternion(DualQuaternion{r, 0.5 * (Quaternion::pure(p) * r)});
}

UnitDualQuaternion UnitDualQuaternion::from_translation(const Vec3& p) {
  return UnitDualQuaternion(DualQuaternion{Quaternion::identity(), Quaternion::pure(0.5 * p)});
}

UnitDualQuaternion UnitDualQuaternion::from_rotation(const Quaternion& r, const DqTolerances& tol) {
  return from_rotation_translation(r, Vec3::Zero(), tol);
}

UnitDualQuaternion UnitDualQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  return UnitDualQuaternion(DualQuaternion{Quaternion::from_axis_angle(axis, angle), Quaternion{}});
}

UnitDualQuaternion UnitDualQuaternion::checked(const DualQuaternion& dq, const DqTolerances& tol) {
  const double n = dq.primary.norm();
  const double orth = dq.primary.dot(dq.dual);
  if (std::abs(n - 1.0) > tol.unit_norm || std::abs(orth) > tol.unit_norm) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "dual quaternion is not unit (|P| = " << n << ", <P,D> = " << orth
        << ")";
    throw Error(ErrorCode::InvalidInput, msg.str());
  }
  return UnitDualQuaternion(dq);
}

UnitDualQuaternion UnitDualQuaternion::normalized(const DualQuaternion& dq) {
  const double n = dq.primary.norm();
  if (n == 0.0) {
    throw Error(ErrorCode::InvalidInput, "cannot normalize a dual quaternion with zero primary part");
  }
  const Quaternion p = dq.primary * (1.0 / n);
  // Remove the component of the dual part along the primary part.
  const Quaternion d = (dq.dual * (1.0 / n)) - p * p.dot(dq.dual * (1.0 / n));
  return UnitDualQuaternion(DualQuaternion{p, d});
}

Vec3 UnitDualQuaternion::translation() const {
  return (2.0 * (value_.dual * value_.primary.conj())).vec3();
}

Vec3 UnitDualQuaternion::transform_point(const Vec3& v) const {
  return value_.primary.rotate(v) + translation();
}

std::ostream& operator<<(std::ostream& os, const UnitDualQuaternion& x) { return os << x.value(); }

UnitDualQuaternion shortest(const UnitDualQuaternion& x) { return x.primary().w < 0.0 ? -x : x; }

// ---------------------------------------------------------------------------
// exp / log

namespace {

// sin(phi) / phi
double sinc(double phi, double small) {
  if (std::abs(phi) < small) {
    const double p2 = phi * phi;
    return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
  }
  return std::sin(phi) / phi;
}

// (cos(phi) - sin(phi)/phi) / phi^2. Direct evaluation cancels badly well
// above the sinc threshold, so the series takes over below 1e-2.
double cos_sinc_ratio(double phi) {
  if (std::abs(phi) < 1e-2) {
    const double p2 = phi * phi;
    return -1.0 / 3.0 + p2 / 30.0 - p2 * p2 / 840.0;
  }
  return (std::cos(phi) - std::sin(phi) / phi) / (phi * phi);
}

bool is_pure(const Quaternion& q) {
  return std::abs(q.w) <= 1e-12 * (1.0 + q.norm());
}

}  // namespace

UnitDualQuaternion exp(const DualQuaternion& y) {
  if (!is_pure(y.primary) || !is_pure(y.dual)) {
    throw Error(ErrorCode::InvalidInput, "exp expects a pure dual vector");
  }
  // Dual-number extension of the quaternion exponential. With phi = |a|:
  //   P = cos(phi) + sinc(phi) a
  //   D = -<a,b> sinc(phi) + sinc(phi) b + <a,b> k(phi) a,  k = (cos - sinc)/phi^2
  const Vec3 a = y.primary.vec3();
  const Vec3 b = y.dual.vec3();
  const double phi = a.norm();
  const double s = sinc(phi, kDefaultDqTolerances.small_angle);
  const double ab = a.dot(b);
  const Quaternion p{std::cos(phi), s * a};
  const Quaternion d{-ab * s, s * b + (ab * cos_sinc_ratio(phi)) * a};
  return UnitDualQuaternion(DualQuaternion{p, d});
}

DualQuaternion log(const UnitDualQuaternion& x_in, const DqTolerances& tol) {
  const UnitDualQuaternion x = shortest(x_in);
  const Quaternion& p = x.primary();
  const Quaternion& d = x.dual();
  const Vec3 v = p.vec3();
  const double phi = std::atan2(v.norm(), p.w);  // half rotation angle in [0, pi/2]
  const double s = sinc(phi, tol.small_angle);
  const Vec3 a = v / s;
  const double ab = -d.w / s;
  const Vec3 b = (d.vec3() - (ab * cos_sinc_ratio(phi)) * a) / s;
  return DualQuaternion::pure(a, b);
}

UnitDualQuaternion pow(const UnitDualQuaternion& x, double t) { return exp(t * log(x)); }

UnitDualQuaternion sclerp(const UnitDualQuaternion& x1, const UnitDualQuaternion& x2, double t) {
  return x1 * pow(x1.conj() * x2, t);
}

double pose_distance(const UnitDualQuaternion& a, const UnitDualQuaternion& b) {
  const Vec8 va = a.vec();
  const Vec8 vb = b.vec();
  return va.dot(vb) < 0.0 ? (va + vb).norm() : (va - vb).norm();
}

// ---------------------------------------------------------------------------
// Screw parameters

ScrewParameters screw_parameters(const UnitDualQuaternion& x, const DqTolerances& tol) {
  const DualQuaternion y = log(x, tol);
  const Vec3 a = y.primary.vec3();
  const Vec3 b = y.dual.vec3();
  ScrewParameters s;
  const double half_angle = a.norm();
  if (half_angle > 0.0) {
    s.axis = a / half_angle;
    s.angle = 2.0 * half_angle;
    const double along = b.dot(s.axis);
    s.translation = 2.0 * along;
    s.moment = (b - along * s.axis) / half_angle;
  } else if (b.norm() > 0.0) {
    s.axis = b.normalized();
    s.translation = 2.0 * b.norm();
  }
  return s;
}

UnitDualQuaternion from_screw(const ScrewParameters& s) {
  const Vec3 l = s.axis.normalized();
  return exp(DualQuaternion::pure(0.5 * s.angle * l, 0.5 * s.translation * l + 0.5 * s.angle * s.moment));
}

// ---------------------------------------------------------------------------
// Hamilton operators

Eigen::Matrix4d hamilton_plus4(const Quaternion& q) {
  Eigen::Matrix4d h;
  h << q.w, -q.x, -q.y, -q.z,
       q.x,  q.w, -q.z,  q.y,
       q.y,  q.z,  q.w, -q.x,
       q.z, -q.y,  q.x,  q.w;
  return h;
}

Eigen::Matrix4d hamilton_minus4(const Quaternion& q) {
  Eigen::Matrix4d h;
  h << q.w, -q.x, -q.y, -q.z,
       q.x,  q.w,  q.z, -q.y,
       q.y, -q.z,  q.w,  q.x,
       q.z,  q.y, -q.x,  q.w;
  return h;
}

Mat8 hamilton_plus(const DualQuaternion& x) {
  Mat8 h = Mat8::Zero();
  h.topLeftCorner<4, 4>() = hamilton_plus4(x.primary);
  h.bottomLeftCorner<4, 4>() = hamilton_plus4(x.dual);
  h.bottomRightCorner<4, 4>() = hamilton_plus4(x.primary);
  return h;
}

Mat8 hamilton_minus(const DualQuaternion& x) {
  Mat8 h = Mat8::Zero();
  h.topLeftCorner<4, 4>() = hamilton_minus4(x.primary);
  h.bottomLeftCorner<4, 4>() = hamilton_minus4(x.dual);
  h.bottomRightCorner<4, 4>() = hamilton_minus4(x.primary);
  return h;
}

const Mat8& c8() {
  static const Mat8 m = [] {
    Vec8 d;
    d << 1, -1, -1, -1, 1, -1, -1, -1;
    return Mat8(d.asDiagonal());
  }();
  return m;
}

}  // namespace screwplan
