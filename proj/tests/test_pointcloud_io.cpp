#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "stitch/pointcloud_io.hpp"

using namespace stitch;

TEST(PointCloudIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  PointCloud cloud;
  for (int k = 0; k < 500; ++k) cloud.points.emplace_back(u(rng), u(rng), u(rng));
  std::stringstream s;
  write_point_cloud(s, cloud, "synthetic");
  const PointCloud back = read_point_cloud(s);
  EXPECT_EQ(back.points, cloud.points);
}

TEST(PointCloudIo, CommentsBlankLinesAndCrlf) {
  std::istringstream in("# header\r\n\r\n1,2,3\r\n  4 , 5 ,6  \n# trailing\n");
  const PointCloud cloud = read_point_cloud(in);
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud.points[0], Point3(1, 2, 3));
  EXPECT_EQ(cloud.points[1], Point3(4, 5, 6));
}

TEST(PointCloudIo, ErrorsNameTheLine) {
  const char* bad[] = {"1,2,3\n1,2\n", "1,2,3\n1,2,3,4\n", "1,2,3\n1,x,3\n", "1,2,3\n1,2,inf\n", "1,2,3\n1,,3\n"};
  for (const char* text : bad) {
    std::istringstream in(text);
    try {
      read_point_cloud(in, "cloud.txt");
      FAIL() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u);
      EXPECT_EQ(std::string(e.what()).rfind("cloud.txt:2: ", 0), 0u) << e.what();
    }
  }
}

TEST(PointCloudIo, MissingFile) { EXPECT_THROW(read_point_cloud_file("/nonexistent/cloud.txt"), std::runtime_error); }

TEST(PoseRecord, RoundTrip) {
  PoseEstimate e;
  e.pose.circle.center = Point3(0.001, -0.002, 0.003);
  e.pose.circle.normal = UnitVector3::normalized(Vec3(0.1, 0.9, 0.2));
  e.pose.circle.radius = 0.012;
  e.pose.tip = Point3(0.01, 0.02, 0.03);
  e.pose.swage = Point3(-0.01, 0.0, 0.004);
  e.diagnostics = EstimateDiagnostics{200, 150, 140, 1e-4, 2e-4, 7, 91};
  const PoseEstimate back = parse_pose_record(format_pose_record(e));
  EXPECT_EQ(back.pose.circle.center, e.pose.circle.center);
  EXPECT_LT((back.pose.circle.normal.vec() - e.pose.circle.normal.vec()).norm(), 1e-15);
  EXPECT_EQ(back.pose.tip, e.pose.tip);
  EXPECT_EQ(back.pose.swage, e.pose.swage);
  EXPECT_EQ(back.diagnostics.first_endpoint_index, 7u);
  EXPECT_EQ(back.diagnostics.second_endpoint_index, 91u);
  EXPECT_EQ(back.diagnostics.circle_rms, 2e-4);
}
