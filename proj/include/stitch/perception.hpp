#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stitch/geometry.hpp"

namespace stitch {

struct PointCloud {
  std::vector<Point3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Circular needle geometry. Defaults describe a 12 mm half-circle needle.
struct NeedleSpec {
  double radius = 0.012;
  double arc_span = kPi;

  void validate() const;
  bool operator==(const NeedleSpec&) const = default;
};

/// Fitted circle plus the two needle endpoints.
///
/// For poses that describe a physical needle (ground truth, controller beliefs)
/// the body runs counter-clockwise about `circle.normal` from `swage` to `tip`.
/// Poses returned by the estimator carry geometric endpoint order only; the
/// normal there is sign-normalized and does not encode the body side.
struct NeedlePose {
  Circle3D circle;
  Point3 tip = Point3::Zero();
  Point3 swage = Point3::Zero();
};

struct RansacParams {
  int iterations = 500;
  double inlier_threshold = 5e-4;
  int min_inliers = 15;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Defaults for the two estimator stages.
struct EstimatorParams {
  RansacParams plane{500, 5e-4, 15, 0};
  RansacParams circle{500, 4e-4, 15, 0};
  /// Joint plane/center refinement after consensus: points within
  /// refine_band_scale times each stage threshold of the current circle.
  double refine_band_scale = 3.0;
  int refine_rounds = 5;
  /// Final needle inliers (endpoint candidates) lie within this multiple of the thresholds.
  double endpoint_band_scale = 2.0;

  /// Same seed for both stages, offset so their sample streams differ.
  static EstimatorParams with_seed(std::uint64_t seed);
};

struct NoiseModel {
  double gaussian_sigma = 0.0;
  double outlier_fraction = 0.0;
  /// Full edge lengths of the outlier box, centered on the needle circle center.
  Vec3 outlier_box = Vec3(0.06, 0.06, 0.06);
  double dropout_fraction = 0.0;
  /// Contiguous hidden arc length in radians.
  double occlusion_arc = 0.0;
  /// Where the hidden arc is centered, as a fraction of the needle arc from the swage.
  double occlusion_center = 0.5;

  void validate() const;
};

/// Closed interval of arc parameter (radians from the swage) that is not observed.
struct ArcInterval {
  double begin = 0.0;
  double end = 0.0;
};

enum class EstimationStage { plane, circle, endpoints };
enum class EstimationFailure { degenerate_input, no_consensus };

const char* to_string(EstimationStage s);
const char* to_string(EstimationFailure f);

class EstimationError : public std::runtime_error {
 public:
  EstimationError(EstimationStage stage, EstimationFailure kind, const std::string& detail);

  EstimationStage stage() const { return stage_; }
  EstimationFailure kind() const { return kind_; }

 private:
  EstimationStage stage_;
  EstimationFailure kind_;
};

struct PlaneFit {
  Plane plane;
  std::vector<std::size_t> inliers;  // ascending
  double rms = 0.0;
};

struct CircleFit2D {
  Vec2 center = Vec2::Zero();
  std::vector<std::size_t> inliers;  // ascending
  double rms = 0.0;
};

struct EndpointPair {
  Point3 first = Point3::Zero();
  Point3 second = Point3::Zero();
  std::size_t first_index = 0;   // index into the input span, before snapping
  std::size_t second_index = 0;  // first_index < second_index
};

struct EstimateDiagnostics {
  std::size_t cloud_points = 0;
  std::size_t plane_inliers = 0;
  std::size_t circle_inliers = 0;
  double plane_rms = 0.0;
  double circle_rms = 0.0;
  std::size_t first_endpoint_index = 0;
  std::size_t second_endpoint_index = 0;
};

struct PoseEstimate {
  NeedlePose pose;
  EstimateDiagnostics diagnostics;
};

struct PoseAgreement {
  double center_dist = 0.0;
  double normal_angle = 0.0;  // axial, radians
  double endpoint_dist = 0.0;  // worse endpoint under the better pairing
};

/// Point on a physical needle pose at arc parameter `t` radians from the swage.
Point3 needle_arc_point(const NeedlePose& pose, double t);

/// Physical pose from its circle and the direction from the center to the swage.
NeedlePose make_needle_pose(const Point3& center, const UnitVector3& normal, const Vec3& swage_direction,
                            const NeedleSpec& spec);

/// Frame of a physical pose: origin at the center, +z the normal, +x toward the swage.
RigidTransform needle_frame(const NeedlePose& pose);

NeedlePose transform_pose(const RigidTransform& t, const NeedlePose& pose);

/// Arc angle from swage to tip about the normal, in (0, 2*pi].
double arc_span_of(const NeedlePose& pose);

/// Hidden intervals implied by `noise.occlusion_arc` and `noise.occlusion_center`.
std::vector<ArcInterval> occlusion_intervals(const NoiseModel& noise, const NeedleSpec& spec);

/// Synthetic segmented needle cloud. Points are spaced evenly along the visible
/// arc (both ends of the arc included when visible), perturbed by isotropic
/// Gaussian noise, thinned by dropout and mixed with uniform box outliers.
/// Output order is shuffled. Deterministic in `seed`.
PointCloud synth_needle_cloud(const NeedlePose& pose, const NeedleSpec& spec, const NoiseModel& noise, int n_points,
                              std::uint64_t seed);

/// As above with explicit hidden arc intervals; `noise.occlusion_arc` is ignored.
PointCloud synth_needle_cloud(const NeedlePose& pose, const NeedleSpec& spec, const NoiseModel& noise, int n_points,
                              std::uint64_t seed, std::span<const ArcInterval> hidden);

PlaneFit fit_plane_ransac(std::span<const Point3> points, const RansacParams& params);
inline PlaneFit fit_plane_ransac(const PointCloud& cloud, const RansacParams& params) {
  return fit_plane_ransac(std::span<const Point3>(cloud.points), params);
}

CircleFit2D fit_circle_fixed_radius(std::span<const Vec2> points, double radius, const RansacParams& params);

/// Farthest pair of points (lowest index pair on ties), each snapped onto `circle`.
EndpointPair extract_endpoints(std::span<const Point3> points, const Circle3D& circle);

PoseEstimate estimate_needle_pose(const PointCloud& cloud, const NeedleSpec& spec, const EstimatorParams& params);

PoseAgreement pose_agreement(const NeedlePose& a, const NeedlePose& b);

/// Snaps `p` onto `circle`: into its plane, then radially out to the radius.
Point3 snap_to_circle(const Point3& p, const Circle3D& circle);

}  // namespace stitch
