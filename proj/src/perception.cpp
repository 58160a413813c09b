#include "stitch/perception.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "stitch/rng.hpp"

namespace stitch {

namespace {

bool finite(const Point3& p) { return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z()); }

void require_finite(std::span<const Point3> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!finite(points[i])) {
      std::ostringstream os;
      os << "point " << i << " is not finite";
      throw std::invalid_argument(os.str());
    }
  }
}

// Draws k distinct indices in [0, n) by rejection.
template <std::size_t K>
std::array<std::size_t, K> sample_distinct(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::array<std::size_t, K> out{};
  for (std::size_t k = 0; k < K; ++k) {
    bool fresh = false;
    while (!fresh) {
      out[k] = pick(rng);
      fresh = std::find(out.begin(), out.begin() + k, out[k]) == out.begin() + k;
    }
  }
  return out;
}

struct Score {
  std::size_t count = 0;
  double total = std::numeric_limits<double>::infinity();

  bool better_than(const Score& o) const { return count > o.count || (count == o.count && total < o.total); }
};

Plane orient_like(const Vec3& n, const Point3& through, const Vec3& reference) {
  const Vec3 m = n.dot(reference) < 0.0 ? Vec3(-n) : n;
  const UnitVector3 u = UnitVector3::normalized(m);
  return Plane{u, u.vec().dot(through)};
}

// Orthogonal least squares: centroid and the smallest-eigenvalue direction.
Plane least_squares_plane(std::span<const Point3> points, const std::vector<std::size_t>& idx, const Vec3& reference) {
  Point3 centroid = Point3::Zero();
  for (std::size_t i : idx) centroid += points[i];
  centroid /= static_cast<double>(idx.size());
  Mat3 cov = Mat3::Zero();
  for (std::size_t i : idx) {
    const Vec3 d = points[i] - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  return orient_like(es.eigenvectors().col(0), centroid, reference);
}

std::vector<std::size_t> plane_inliers(std::span<const Point3> points, const Plane& plane, double threshold,
                                       double* sum_sq = nullptr) {
  std::vector<std::size_t> out;
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = std::abs(plane.signed_distance(points[i]));
    if (d <= threshold) {
      out.push_back(i);
      acc += d * d;
    }
  }
  if (sum_sq) *sum_sq = acc;
  return out;
}

std::vector<std::size_t> circle_inliers(std::span<const Vec2> points, const Vec2& center, double radius,
                                        double threshold, double* sum_sq = nullptr) {
  std::vector<std::size_t> out;
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = std::abs((points[i] - center).norm() - radius);
    if (d <= threshold) {
      out.push_back(i);
      acc += d * d;
    }
  }
  if (sum_sq) *sum_sq = acc;
  return out;
}

// Gauss-Newton on sum (|p - c| - r)^2 with r fixed.
Vec2 refine_center(std::span<const Vec2> points, const std::vector<std::size_t>& idx, Vec2 center, double radius) {
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Vec2 jtr = Vec2::Zero();
    for (std::size_t i : idx) {
      const Vec2 d = points[i] - center;
      const double dist = d.norm();
      if (dist <= 0.0) continue;
      const Vec2 j = -d / dist;
      jtj += j * j.transpose();
      jtr += j * (dist - radius);
    }
    if (std::abs(jtj.determinant()) < 1e-300) break;
    const Vec2 step = -jtj.ldlt().solve(jtr);
    if (!std::isfinite(step.x()) || !std::isfinite(step.y())) break;
    center += step;
    if (step.norm() <= 1e-15 * std::max(1.0, radius)) break;
  }
  return center;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

double rms_of(double sum_sq, std::size_t n) { return n == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(n)); }

std::vector<ArcInterval> merged(std::vector<ArcInterval> hidden, double span) {
  for (auto& h : hidden) {
    h.begin = std::clamp(h.begin, 0.0, span);
    h.end = std::clamp(h.end, 0.0, span);
  }
  std::erase_if(hidden, [](const ArcInterval& h) { return !(h.end > h.begin); });
  std::sort(hidden.begin(), hidden.end(), [](const ArcInterval& a, const ArcInterval& b) { return a.begin < b.begin; });
  std::vector<ArcInterval> out;
  for (const auto& h : hidden) {
    if (!out.empty() && h.begin <= out.back().end) {
      out.back().end = std::max(out.back().end, h.end);
    } else {
      out.push_back(h);
    }
  }
  return out;
}

}  // namespace

void NeedleSpec::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("needle radius must be positive");
  if (!(arc_span > 0.0) || arc_span > 2.0 * kPi) throw std::invalid_argument("needle arc_span must be in (0, 2*pi]");
}

void RansacParams::validate() const {
  if (iterations < 1) throw std::invalid_argument("ransac iterations must be >= 1");
  if (!(inlier_threshold > 0.0)) throw std::invalid_argument("ransac inlier_threshold must be > 0");
  if (min_inliers < 3) throw std::invalid_argument("ransac min_inliers must be >= 3");
}

EstimatorParams EstimatorParams::with_seed(std::uint64_t seed) {
  EstimatorParams p;
  p.plane.seed = seed;
  p.circle.seed = seed + 1;
  return p;
}

void NoiseModel::validate() const {
  if (!(gaussian_sigma >= 0.0)) throw std::invalid_argument("noise gaussian_sigma must be >= 0");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) throw std::invalid_argument("noise outlier_fraction must be in [0,1)");
  if (!(dropout_fraction >= 0.0 && dropout_fraction < 1.0)) throw std::invalid_argument("noise dropout_fraction must be in [0,1)");
  if (!(occlusion_arc >= 0.0)) throw std::invalid_argument("noise occlusion_arc must be >= 0");
  if ((outlier_box.array() < 0.0).any()) throw std::invalid_argument("noise outlier_box extents must be >= 0");
}

const char* to_string(EstimationStage s) {
  switch (s) {
    case EstimationStage::plane: return "plane";
    case EstimationStage::circle: return "circle";
    case EstimationStage::endpoints: return "endpoints";
  }
  return "?";
}

const char* to_string(EstimationFailure f) {
  switch (f) {
    case EstimationFailure::degenerate_input: return "DegenerateInput";
    case EstimationFailure::no_consensus: return "NoConsensus";
  }
  return "?";
}

EstimationError::EstimationError(EstimationStage stage, EstimationFailure kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at " + to_string(stage) + " stage: " + detail),
      stage_(stage),
      kind_(kind) {}

Point3 needle_arc_point(const NeedlePose& pose, double t) {
  const Vec3& n = pose.circle.normal.vec();
  Vec3 x = pose.swage - pose.circle.center;
  x = (x - x.dot(n) * n).normalized();
  const Vec3 w = n.cross(x);
  return pose.circle.center + pose.circle.radius * (std::cos(t) * x + std::sin(t) * w);
}

NeedlePose make_needle_pose(const Point3& center, const UnitVector3& normal, const Vec3& swage_direction,
                            const NeedleSpec& spec) {
  const Vec3& n = normal.vec();
  const Vec3 x = UnitVector3::normalized(swage_direction - swage_direction.dot(n) * n).vec();
  NeedlePose pose;
  pose.circle = Circle3D{center, normal, spec.radius};
  pose.swage = center + spec.radius * x;
  pose.tip = needle_arc_point(pose, spec.arc_span);
  return pose;
}

RigidTransform needle_frame(const NeedlePose& pose) {
  const Vec3& n = pose.circle.normal.vec();
  Vec3 x = pose.swage - pose.circle.center;
  x = UnitVector3::normalized(x - x.dot(n) * n).vec();
  Mat3 r;
  r.col(0) = x;
  r.col(1) = n.cross(x);
  r.col(2) = n;
  return RigidTransform::unchecked(r, pose.circle.center);
}

NeedlePose transform_pose(const RigidTransform& t, const NeedlePose& pose) {
  return NeedlePose{t.apply(pose.circle), t.apply(pose.tip), t.apply(pose.swage)};
}

double arc_span_of(const NeedlePose& pose) {
  const RigidTransform f = needle_frame(pose);
  const Vec3 q = f.rotation().transpose() * (pose.tip - pose.circle.center);
  double a = std::atan2(q.y(), q.x());
  if (a <= 0.0) a += 2.0 * kPi;
  return a;
}

std::vector<ArcInterval> occlusion_intervals(const NoiseModel& noise, const NeedleSpec& spec) {
  if (!(noise.occlusion_arc > 0.0)) return {};
  const double mid = noise.occlusion_center * spec.arc_span;
  return {ArcInterval{mid - 0.5 * noise.occlusion_arc, mid + 0.5 * noise.occlusion_arc}};
}

PointCloud synth_needle_cloud(const NeedlePose& pose, const NeedleSpec& spec, const NoiseModel& noise, int n_points,
                              std::uint64_t seed) {
  const auto hidden = occlusion_intervals(noise, spec);
  return synth_needle_cloud(pose, spec, noise, n_points, seed, hidden);
}

PointCloud synth_needle_cloud(const NeedlePose& pose, const NeedleSpec& spec, const NoiseModel& noise, int n_points,
                              std::uint64_t seed, std::span<const ArcInterval> hidden) {
  spec.validate();
  noise.validate();
  if (n_points < 1) throw std::invalid_argument("n_points must be >= 1");
  Rng rng = make_rng(seed, 0x5157);

  const double span = spec.arc_span;
  const auto gaps = merged(std::vector<ArcInterval>(hidden.begin(), hidden.end()), span);
  std::vector<ArcInterval> visible;
  double cursor = 0.0;
  for (const auto& g : gaps) {
    if (g.begin > cursor) visible.push_back({cursor, g.begin});
    cursor = std::max(cursor, g.end);
  }
  if (cursor < span) visible.push_back({cursor, span});
  double visible_len = 0.0;
  for (const auto& v : visible) visible_len += v.end - v.begin;

  const int n_outliers = static_cast<int>(std::lround(noise.outlier_fraction * n_points));
  const int n_inliers = n_points - n_outliers;

  std::vector<Point3> inliers;
  if (visible_len > 0.0 && n_inliers > 0) {
    inliers.reserve(static_cast<std::size_t>(n_inliers));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < n_inliers; ++k) {
      double s = n_inliers == 1 ? 0.5 * visible_len : visible_len * static_cast<double>(k) / (n_inliers - 1);
      double t = visible.back().end;
      for (const auto& v : visible) {
        const double len = v.end - v.begin;
        if (s <= len) {
          t = v.begin + s;
          break;
        }
        s -= len;
      }
      Point3 p = needle_arc_point(pose, t);
      if (noise.gaussian_sigma > 0.0) {
        p += noise.gaussian_sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
      }
      inliers.push_back(p);
    }
    const auto n_drop = static_cast<std::size_t>(std::lround(noise.dropout_fraction * static_cast<double>(inliers.size())));
    for (std::size_t d = 0; d < n_drop && !inliers.empty(); ++d) {
      std::uniform_int_distribution<std::size_t> pick(0, inliers.size() - 1);
      inliers.erase(inliers.begin() + static_cast<std::ptrdiff_t>(pick(rng)));
    }
  }

  PointCloud cloud;
  cloud.points = std::move(inliers);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  for (int k = 0; k < n_outliers; ++k) {
    const Vec3 r(unit(rng), unit(rng), unit(rng));
    cloud.points.push_back(pose.circle.center + r.cwiseProduct(noise.outlier_box));
  }
  std::shuffle(cloud.points.begin(), cloud.points.end(), rng);
  return cloud;
}

PlaneFit fit_plane_ransac(std::span<const Point3> points, const RansacParams& params) {
  params.validate();
  require_finite(points);
  if (points.size() < 3) {
    throw EstimationError(EstimationStage::plane, EstimationFailure::degenerate_input,
                          "need at least 3 points, got " + std::to_string(points.size()));
  }
  Rng rng = make_rng(params.seed, 0x91a4e);
  const double thr = params.inlier_threshold;

  Score best;
  Vec3 best_normal = Vec3::Zero();
  Point3 best_anchor = Point3::Zero();
  bool any_valid = false;
  for (int it = 0; it < params.iterations; ++it) {
    const auto s = sample_distinct<3>(rng, points.size());
    const Vec3 e1 = points[s[1]] - points[s[0]];
    const Vec3 e2 = points[s[2]] - points[s[0]];
    const Vec3 c = e1.cross(e2);
    const double cn = c.norm();
    if (!(cn > 1e-12 * e1.norm() * e2.norm()) || cn == 0.0) continue;
    any_valid = true;
    const Vec3 n = c / cn;
    const double off = n.dot(points[s[0]]);
    Score score{0, 0.0};
    for (const auto& p : points) {
      const double d = std::abs(n.dot(p) - off);
      if (d <= thr) {
        ++score.count;
        score.total += d;
      }
    }
    if (score.better_than(best)) {
      best = score;
      best_normal = n;
      best_anchor = points[s[0]];
    }
  }
  if (!any_valid) {
    throw EstimationError(EstimationStage::plane, EstimationFailure::degenerate_input,
                          "every sampled triple was collinear");
  }
  if (best.count < static_cast<std::size_t>(params.min_inliers)) {
    throw EstimationError(EstimationStage::plane, EstimationFailure::no_consensus,
                          "best plane has " + std::to_string(best.count) + " inliers, need " +
                              std::to_string(params.min_inliers));
  }

  const Plane hypothesis = orient_like(best_normal, best_anchor, best_normal);
  auto inliers = plane_inliers(points, hypothesis, thr);
  Plane plane = hypothesis;
  for (int round = 0; round < 3; ++round) {
    plane = least_squares_plane(points, inliers, best_normal);
    auto next = plane_inliers(points, plane, thr);
    if (next.size() < static_cast<std::size_t>(params.min_inliers) || next.size() < 3) break;
    if (next == inliers) break;
    inliers = std::move(next);
  }
  double sum_sq = 0.0;
  for (std::size_t i : inliers) sum_sq += std::pow(plane.signed_distance(points[i]), 2);
  const double rms = rms_of(sum_sq, inliers.size());
  return PlaneFit{plane, std::move(inliers), rms};
}

CircleFit2D fit_circle_fixed_radius(std::span<const Vec2> points, double radius, const RansacParams& params) {
  params.validate();
  if (!(radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
  if (points.size() < 2) {
    throw EstimationError(EstimationStage::circle, EstimationFailure::degenerate_input,
                          "need at least 2 points, got " + std::to_string(points.size()));
  }
  Rng rng = make_rng(params.seed, 0xc1c1e);
  const double thr = params.inlier_threshold;

  Score best;
  Vec2 best_center = Vec2::Zero();
  for (int it = 0; it < params.iterations; ++it) {
    const auto s = sample_distinct<2>(rng, points.size());
    const Vec2& p = points[s[0]];
    const Vec2& q = points[s[1]];
    const Vec2 d = q - p;
    const double len = d.norm();
    if (!(len > 0.0) || len > 2.0 * radius) continue;
    const double h = std::sqrt(std::max(0.0, radius * radius - 0.25 * len * len));
    const Vec2 mid = 0.5 * (p + q);
    const Vec2 perp(-d.y() / len, d.x() / len);
    for (const double sign : {1.0, -1.0}) {
      const Vec2 c = mid + sign * h * perp;
      Score score{0, 0.0};
      for (const auto& x : points) {
        const double r = std::abs((x - c).norm() - radius);
        if (r <= thr) {
          ++score.count;
          score.total += r;
        }
      }
      if (score.better_than(best)) {
        best = score;
        best_center = c;
      }
    }
  }
  if (best.count < static_cast<std::size_t>(params.min_inliers)) {
    throw EstimationError(EstimationStage::circle, EstimationFailure::no_consensus,
                          "best circle has " + std::to_string(best.count) + " inliers, need " +
                              std::to_string(params.min_inliers));
  }

  auto inliers = circle_inliers(points, best_center, radius, thr);
  Vec2 center = best_center;
  for (int round = 0; round < 3; ++round) {
    center = refine_center(points, inliers, center, radius);
    auto next = circle_inliers(points, center, radius, thr);
    if (next.size() < static_cast<std::size_t>(params.min_inliers) || next == inliers) break;
    inliers = std::move(next);
  }
  double sum_sq = 0.0;
  for (std::size_t i : inliers) sum_sq += std::pow((points[i] - center).norm() - radius, 2);
  const double rms = rms_of(sum_sq, inliers.size());
  return CircleFit2D{center, std::move(inliers), rms};
}

Point3 snap_to_circle(const Point3& p, const Circle3D& circle) {
  const Point3 in_plane = project_point_to_plane(p, circle.plane());
  Vec3 radial = in_plane - circle.center;
  const double n = radial.norm();
  if (!(n > 0.0)) {
    auto [u, v] = plane_basis(circle.plane());
    radial = u.vec();
  } else {
    radial /= n;
  }
  return circle.center + circle.radius * radial;
}

EndpointPair extract_endpoints(std::span<const Point3> points, const Circle3D& circle) {
  if (points.size() < 2) {
    throw EstimationError(EstimationStage::endpoints, EstimationFailure::degenerate_input,
                          "need at least 2 inlier points, got " + std::to_string(points.size()));
  }
  // Triangle-inequality pruning around the centroid: |pi - pj| <= ri + max_r.
  Point3 centroid = Point3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  std::vector<double> reach(points.size());
  double max_reach = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    reach[i] = (points[i] - centroid).norm();
    max_reach = std::max(max_reach, reach[i]);
  }

  double best = -1.0;
  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double bound = reach[i] + max_reach;
    if (best >= 0.0 && (bound * bound) * (1.0 + 1e-12) < best) continue;
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d2 = (points[i] - points[j]).squaredNorm();
      if (d2 > best) {
        best = d2;
        bi = i;
        bj = j;
      }
    }
  }
  return EndpointPair{snap_to_circle(points[bi], circle), snap_to_circle(points[bj], circle), bi, bj};
}

PoseEstimate estimate_needle_pose(const PointCloud& cloud, const NeedleSpec& spec, const EstimatorParams& params) {
  spec.validate();
  const std::span<const Point3> pts(cloud.points);
  const PlaneFit plane_fit = fit_plane_ransac(pts, params.plane);
  Plane plane = plane_fit.plane;

  auto to_plane_coords = [&](const Plane& pl, const std::vector<std::size_t>& idx) {
    const auto [u, v] = plane_basis(pl);
    const Point3 origin = pl.origin();
    std::vector<Vec2> coords;
    coords.reserve(idx.size());
    for (std::size_t i : idx) {
      const Vec3 d = project_point_to_plane(pts[i], pl) - origin;
      coords.emplace_back(d.dot(u.vec()), d.dot(v.vec()));
    }
    return coords;
  };
  auto back_project = [](const Plane& pl, const Vec2& c) {
    const auto [u, v] = plane_basis(pl);
    return Point3(pl.origin() + c.x() * u.vec() + c.y() * v.vec());
  };
  auto in_plane_coords = [](const Plane& pl, const Point3& p) {
    const auto [u, v] = plane_basis(pl);
    const Vec3 d = project_point_to_plane(p, pl) - pl.origin();
    return Vec2(d.dot(u.vec()), d.dot(v.vec()));
  };

  const CircleFit2D circle_fit = fit_circle_fixed_radius(to_plane_coords(plane, plane_fit.inliers), spec.radius,
                                                         params.circle);
  Point3 center = back_project(plane, circle_fit.center);

  // Joint refinement over every point near the fitted circle, not only the
  // nested RANSAC inliers: refit the plane, then the fixed-radius center in it.
  auto near_circle = [&](double plane_band, double radial_band) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::abs(plane.signed_distance(pts[i])) > plane_band) continue;
      const double radial = (project_point_to_plane(pts[i], plane) - center).norm() - spec.radius;
      if (std::abs(radial) <= radial_band) idx.push_back(i);
    }
    return idx;
  };
  for (int round = 0; round < params.refine_rounds; ++round) {
    const auto band = near_circle(params.refine_band_scale * params.plane.inlier_threshold,
                                  params.refine_band_scale * params.circle.inlier_threshold);
    if (band.size() < static_cast<std::size_t>(params.circle.min_inliers)) break;
    const Plane refit = least_squares_plane(pts, band, plane.normal.vec());
    const Vec2 start = in_plane_coords(refit, center);
    const Vec2 c2 = refine_center(to_plane_coords(refit, band), iota_indices(band.size()), start, spec.radius);
    const Point3 next_center = back_project(refit, c2);
    const double moved = (next_center - center).norm() + (refit.normal.vec() - plane.normal.vec()).norm();
    plane = refit;
    center = next_center;
    if (moved < 1e-12) break;
  }

  const auto inliers = near_circle(params.endpoint_band_scale * params.plane.inlier_threshold,
                                   params.endpoint_band_scale * params.circle.inlier_threshold);
  if (inliers.size() < 2) {
    throw EstimationError(EstimationStage::endpoints, EstimationFailure::degenerate_input,
                          "fewer than 2 points remain near the refined circle");
  }

  Circle3D circle;
  circle.center = center;
  circle.radius = spec.radius;
  const Vec3& n = plane.normal.vec();
  const bool flip = n.y() < 0.0 || (n.y() == 0.0 && (n.z() < 0.0 || (n.z() == 0.0 && n.x() < 0.0)));
  circle.normal = flip ? -plane.normal : plane.normal;

  // Endpoints are picked among the inliers placed on the fitted circle, where
  // the farthest pair is decided by arc position rather than radial noise.
  std::vector<Point3> on_circle;
  on_circle.reserve(inliers.size());
  double sum_sq = 0.0;
  for (std::size_t i : inliers) {
    on_circle.push_back(snap_to_circle(pts[i], circle));
    sum_sq += (pts[i] - on_circle.back()).squaredNorm();
  }
  const EndpointPair ends = extract_endpoints(on_circle, circle);

  PoseEstimate out;
  out.pose.circle = circle;
  out.pose.tip = ends.first;
  out.pose.swage = ends.second;
  out.diagnostics.cloud_points = cloud.size();
  out.diagnostics.plane_inliers = plane_fit.inliers.size();
  out.diagnostics.circle_inliers = inliers.size();
  out.diagnostics.plane_rms = plane_fit.rms;
  out.diagnostics.circle_rms = rms_of(sum_sq, inliers.size());
  out.diagnostics.first_endpoint_index = inliers[ends.first_index];
  out.diagnostics.second_endpoint_index = inliers[ends.second_index];
  return out;
}

PoseAgreement pose_agreement(const NeedlePose& a, const NeedlePose& b) {
  PoseAgreement out;
  out.center_dist = (a.circle.center - b.circle.center).norm();
  out.normal_angle = axial_angle_between(a.circle.normal.vec(), b.circle.normal.vec());
  const double straight = std::max((a.tip - b.tip).norm(), (a.swage - b.swage).norm());
  const double crossed = std::max((a.tip - b.swage).norm(), (a.swage - b.tip).norm());
  out.endpoint_dist = std::min(straight, crossed);
  return out;
}

}  // namespace stitch
