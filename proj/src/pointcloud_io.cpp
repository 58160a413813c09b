#include "stitch/pointcloud_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace stitch {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view field, const std::string& source, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(source, line, "invalid number '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(source, line, "non-finite coordinate");
  return value;
}

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

PointCloud read_point_cloud(std::istream& in, const std::string& source) {
  PointCloud cloud;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError(source, line_no, "expected 'x,y,z'");
    }
    cloud.points.emplace_back(parse_double(line.substr(0, c1), source, line_no),
                              parse_double(line.substr(c1 + 1, c2 - c1 - 1), source, line_no),
                              parse_double(line.substr(c2 + 1), source, line_no));
  }
  if (in.bad()) throw ParseError(source, line_no, "read error");
  return cloud;
}

PointCloud read_point_cloud_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open point cloud file '" + path + "'");
  return read_point_cloud(in, path);
}

void write_point_cloud(std::ostream& out, const PointCloud& cloud, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << std::setprecision(17);
  for (const auto& p : cloud.points) out << p.x() << ',' << p.y() << ',' << p.z() << '\n';
}

void write_point_cloud_file(const std::string& path, const PointCloud& cloud, const std::string& comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write point cloud file '" + path + "'");
  write_point_cloud(out, cloud, comment);
  if (!out) throw std::runtime_error("error while writing '" + path + "'");
}

std::string format_pose_record(const PoseEstimate& estimate) {
  const auto& p = estimate.pose;
  const auto& d = estimate.diagnostics;
  nlohmann::ordered_json j;
  j["center"] = vec_json(p.circle.center);
  j["normal"] = vec_json(p.circle.normal.vec());
  j["radius"] = p.circle.radius;
  j["tip"] = vec_json(p.tip);
  j["swage"] = vec_json(p.swage);
  j["diagnostics"] = {
      {"cloud_points", d.cloud_points},
      {"plane_inliers", d.plane_inliers},
      {"circle_inliers", d.circle_inliers},
      {"plane_rms", d.plane_rms},
      {"circle_rms", d.circle_rms},
      {"endpoint_indices", {d.first_endpoint_index, d.second_endpoint_index}},
  };
  return j.dump(2);
}

PoseEstimate parse_pose_record(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  PoseEstimate e;
  e.pose.circle.center = json_vec(j.at("center"));
  e.pose.circle.normal = UnitVector3::normalized(json_vec(j.at("normal")));
  e.pose.circle.radius = j.at("radius").get<double>();
  e.pose.tip = json_vec(j.at("tip"));
  e.pose.swage = json_vec(j.at("swage"));
  const auto& d = j.at("diagnostics");
  e.diagnostics.cloud_points = d.at("cloud_points").get<std::size_t>();
  e.diagnostics.plane_inliers = d.at("plane_inliers").get<std::size_t>();
  e.diagnostics.circle_inliers = d.at("circle_inliers").get<std::size_t>();
  e.diagnostics.plane_rms = d.at("plane_rms").get<double>();
  e.diagnostics.circle_rms = d.at("circle_rms").get<double>();
  e.diagnostics.first_endpoint_index = d.at("endpoint_indices").at(0).get<std::size_t>();
  e.diagnostics.second_endpoint_index = d.at("endpoint_indices").at(1).get<std::size_t>();
  return e;
}

}  // namespace stitch
