#pragma once

// Slow, independent reference implementations used to check the library.

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>

#include "stitch/geometry.hpp"

namespace oracle {

using stitch::Point3;
using stitch::Vec3;

/// Exhaustive O(n^2) farthest pair; lexicographically first pair (i < j) on ties.
std::pair<std::size_t, std::size_t> farthest_pair(std::span<const Point3> points);

/// Orthogonal least-squares plane through all points (SVD of the centered points).
struct PlaneLs {
  Vec3 normal;
  Point3 centroid;
};
PlaneLs svd_plane(std::span<const Point3> points);

/// Fixed-radius circle in 3D fitted by a trimmed least-squares criterion.
///
/// The plane is the best trimmed SVD plane over every point triple, polished by
/// concentration steps. The center is found by a hierarchical grid search in
/// that plane minimizing the sum of the `keep` smallest squared radial residuals.
struct CircleLs {
  Point3 center;
  Vec3 normal;
  double cost = 0.0;
};
CircleLs trimmed_circle(std::span<const Point3> points, double radius, std::size_t keep);

/// 4x4 homogeneous matrix of a rigid transform, and point application through it.
Eigen::Matrix4d homogeneous(const stitch::RigidTransform& t);
Point3 apply_homogeneous(const Eigen::Matrix4d& m, const Point3& p);

/// Cinch length on a dyadic grid: parameters are integer multiples of 2^-scale,
/// so the exact value is (a - (i - 1) * b) * 2^-scale, computed in integers.
struct DyadicBeta {
  std::int64_t numerator = 0;  // a - (i - 1) * b
  double value = 0.0;          // numerator * 2^-scale, exact
};
DyadicBeta dyadic_beta(std::int64_t a, std::int64_t b, int i, int scale);

}  // namespace oracle
