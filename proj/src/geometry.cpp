#include "stitch/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace stitch {

namespace {

bool all_finite(const Vec3& v) { return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z()); }

Mat3 skew(const Vec3& k) {
  Mat3 m;
  m << 0.0, -k.z(), k.y(),
       k.z(), 0.0, -k.x(),
       -k.y(), k.x(), 0.0;
  return m;
}

// Half-turn about a unit axis: 2 a a^T - I.
Mat3 half_turn(const Vec3& a) { return 2.0 * a * a.transpose() - Mat3::Identity(); }

int least_aligned_axis(const Vec3& n) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(n[i]) < std::abs(n[best])) best = i;
  }
  return best;
}

Vec3 perpendicular_to(const Vec3& n) {
  Vec3 e = Vec3::Zero();
  e[least_aligned_axis(n)] = 1.0;
  return (e - e.dot(n) * n).normalized();
}

}  // namespace

UnitVector3::UnitVector3(const Vec3& v) : v_(v) {
  if (!all_finite(v) || std::abs(v.norm() - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << "expected a unit vector, got (" << v.x() << ", " << v.y() << ", " << v.z() << ") with norm " << v.norm();
    throw InvalidAxis(os.str());
  }
}

UnitVector3 UnitVector3::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!all_finite(v) || !(n > 0.0)) throw InvalidAxis("cannot normalize a zero or non-finite vector");
  return UnitVector3(Tag{}, v / n);
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho_err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho_err <= kOrthoTolerance) || std::abs(rotation.determinant() - 1.0) > kOrthoTolerance) {
    throw std::invalid_argument("rotation matrix is not a proper rotation");
  }
  if (!all_finite(translation)) throw std::invalid_argument("translation must be finite");
}

UnitVector3 RigidTransform::apply(const UnitVector3& u) const { return UnitVector3::normalized(rotation_ * u.vec()); }

Circle3D RigidTransform::apply(const Circle3D& c) const { return Circle3D{apply(c.center), apply(c.normal), c.radius}; }

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return unchecked(rt, -(rt * translation_));
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return unchecked(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_);
}

RigidTransform rotation_about_axis(const UnitVector3& axis, double angle) {
  const Mat3 k = skew(axis.vec());
  const Mat3 r = Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
  return RigidTransform::unchecked(r, Vec3::Zero());
}

RigidTransform rotation_about_axis(const Vec3& axis, double angle) { return rotation_about_axis(UnitVector3(axis), angle); }

RigidTransform rotation_about_point(const UnitVector3& axis, double angle, const Point3& pivot) {
  const Mat3 r = rotation_about_axis(axis, angle).rotation();
  return RigidTransform::unchecked(r, pivot - r * pivot);
}

RigidTransform align_vectors(const UnitVector3& from, const UnitVector3& to) {
  const Vec3& a = from.vec();
  const Vec3& b = to.vec();
  const double c = a.dot(b);
  if (1.0 + c < 1e-4) {
    // Flip `a` onto -a exactly, then close the small remaining gap.
    const Mat3 flip = half_turn(perpendicular_to(a));
    const Vec3 neg = -a;
    const Vec3 h = (neg + b).normalized();
    const Mat3 rest = half_turn(h) * half_turn(neg);
    return RigidTransform::unchecked(rest * flip, Vec3::Zero());
  }
  // Product of two half-turns: about `a`, then about the bisector of a and b.
  const Vec3 h = (a + b).normalized();
  return RigidTransform::unchecked(half_turn(h) * half_turn(a), Vec3::Zero());
}

Point3 project_point_to_plane(const Point3& p, const Plane& plane) {
  return p - plane.signed_distance(p) * plane.normal.vec();
}

std::pair<UnitVector3, UnitVector3> plane_basis(const Plane& plane) {
  const Vec3& n = plane.normal.vec();
  const Vec3 u = perpendicular_to(n);
  const Vec3 v = n.cross(u);
  return {UnitVector3::normalized(u), UnitVector3::normalized(v)};
}

double angle_between(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

double axial_angle_between(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), std::abs(a.dot(b))); }

}  // namespace stitch
