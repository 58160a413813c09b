#pragma once

#include <iosfwd>
#include <string>

#include "stitch/parse_error.hpp"
#include "stitch/perception.hpp"

namespace stitch {

/// Text clouds: one `x,y,z` point per line in meters, `#` comments, LF or CRLF.
PointCloud read_point_cloud(std::istream& in, const std::string& source = "<stream>");
PointCloud read_point_cloud_file(const std::string& path);
void write_point_cloud(std::ostream& out, const PointCloud& cloud, const std::string& comment = "");
void write_point_cloud_file(const std::string& path, const PointCloud& cloud, const std::string& comment = "");

/// Pose record as a single JSON object (center, normal, radius, tip, swage, diagnostics).
std::string format_pose_record(const PoseEstimate& estimate);
PoseEstimate parse_pose_record(const std::string& text);

}  // namespace stitch
