#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>
#include <utility>

namespace stitch {

/// World-frame position in meters.
using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

class InvalidAxis : public std::invalid_argument {
 public:
  explicit InvalidAxis(const std::string& what) : std::invalid_argument(what) {}
};

/// Direction with Euclidean norm 1 (within 1e-9). Construction enforces the
/// invariant, so every function taking a UnitVector3 can rely on it.
class UnitVector3 {
 public:
  static constexpr double kNormTolerance = 1e-9;

  UnitVector3() : v_(0.0, 0.0, 1.0) {}

  /// Accepts only vectors that are already unit length; throws InvalidAxis otherwise.
  explicit UnitVector3(const Vec3& v);
  UnitVector3(double x, double y, double z) : UnitVector3(Vec3(x, y, z)) {}

  /// Normalizes `v`; throws InvalidAxis for zero or non-finite input.
  static UnitVector3 normalized(const Vec3& v);

  static UnitVector3 unit_x() { return UnitVector3(Vec3::UnitX()); }
  static UnitVector3 unit_y() { return UnitVector3(Vec3::UnitY()); }
  static UnitVector3 unit_z() { return UnitVector3(Vec3::UnitZ()); }

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  double dot(const UnitVector3& o) const { return v_.dot(o.v_); }
  UnitVector3 operator-() const { return UnitVector3(Tag{}, -v_); }

  bool operator==(const UnitVector3& o) const { return v_ == o.v_; }

 private:
  struct Tag {};
  UnitVector3(Tag, const Vec3& v) : v_(v) {}
  Vec3 v_;
};

/// {p : normal . p = offset}
struct Plane {
  UnitVector3 normal;
  double offset = 0.0;

  double signed_distance(const Point3& p) const { return normal.vec().dot(p) - offset; }
  Point3 origin() const { return offset * normal.vec(); }
};

class RigidTransform;

struct Circle3D {
  Point3 center = Point3::Zero();
  UnitVector3 normal;
  double radius = 1.0;

  Plane plane() const { return Plane{normal, normal.vec().dot(center)}; }
};

/// Proper rigid motion p -> R p + t.
class RigidTransform {
 public:
  static constexpr double kOrthoTolerance = 1e-9;

  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  /// Throws std::invalid_argument unless `rotation` is orthonormal with det +1.
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Vec3& t) { return unchecked(Mat3::Identity(), t); }
  /// Skips the orthonormality check; for rotations built from Rodrigues products.
  static RigidTransform unchecked(const Mat3& r, const Vec3& t) {
    RigidTransform out;
    out.rotation_ = r;
    out.translation_ = t;
    return out;
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_vector(const Vec3& v) const { return rotation_ * v; }
  UnitVector3 apply(const UnitVector3& u) const;
  Circle3D apply(const Circle3D& c) const;

  RigidTransform inverse() const;
  /// (a * b)(p) == a(b(p))
  RigidTransform operator*(const RigidTransform& rhs) const;

  bool operator==(const RigidTransform& o) const {
    return rotation_ == o.rotation_ && translation_ == o.translation_;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// Pure rotation by Rodrigues' formula, right-handed about `axis`.
RigidTransform rotation_about_axis(const UnitVector3& axis, double angle);
/// Validating overload for raw vectors; throws InvalidAxis if `axis` is not unit.
RigidTransform rotation_about_axis(const Vec3& axis, double angle);

/// Rotation about the line through `pivot` along `axis`; `pivot` is a fixed point.
RigidTransform rotation_about_point(const UnitVector3& axis, double angle, const Point3& pivot);

/// Minimal-angle rotation taking `from` onto `to`.
///
/// Exactly antiparallel inputs rotate by pi about the component of the coordinate
/// axis least aligned with `from` that is perpendicular to `from`. Near-antiparallel
/// inputs (1 + from.to < 1e-4) go through that half-turn first and then the small
/// residual rotation, so the result stays accurate where the cross product vanishes.
RigidTransform align_vectors(const UnitVector3& from, const UnitVector3& to);

Point3 project_point_to_plane(const Point3& p, const Plane& plane);

/// Orthonormal in-plane basis (u, v) with u x v == normal.
/// u is the normalized projection of the global axis least aligned with the normal
/// (lowest index on ties).
std::pair<UnitVector3, UnitVector3> plane_basis(const Plane& plane);

/// Unsigned angle between two directions, accurate near 0 and pi.
double angle_between(const Vec3& a, const Vec3& b);

/// Angle between two lines (directions modulo sign), in [0, pi/2].
double axial_angle_between(const Vec3& a, const Vec3& b);

}  // namespace stitch
