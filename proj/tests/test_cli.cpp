#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "stitch/config.hpp"
#include "stitch/log_io.hpp"
#include "stitch/pointcloud_io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(STITCH_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("stitch_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const char* name) const { return (dir / name).string(); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run_cli("").status, 1);
  EXPECT_EQ(run_cli("bogus").status, 1);
  EXPECT_EQ(run_cli("simulate --preset robot").status, 1);
  EXPECT_EQ(run_cli("simulate --trials 0").status, 1);
  EXPECT_EQ(run_cli("report --logs " + path("missing.jsonl")).status, 2);
  EXPECT_EQ(run_cli("estimate " + path("missing.txt")).status, 2);
  EXPECT_EQ(run_cli("--help").status, 0);
}

TEST_F(Cli, SynthThenEstimate) {
  const auto cloud = path("cloud.txt");
  ASSERT_EQ(run_cli("synth --seed 3 --points 200 --sigma 0.0002 --outliers 0.1 -o " + cloud).status, 0);
  EXPECT_EQ(stitch::read_point_cloud_file(cloud).size(), 200u);
  const CliResult est = run_cli("estimate --seed 1 " + cloud);
  ASSERT_EQ(est.status, 0);
  const auto record = stitch::parse_pose_record(est.out);
  EXPECT_NEAR(record.pose.circle.radius, 0.012, 1e-12);
  EXPECT_EQ(run_cli("estimate --seed 1 " + cloud).out, est.out);

  std::ofstream(path("bad.txt")) << "1,2,3\n4,5\n";
  EXPECT_EQ(run_cli("estimate " + path("bad.txt")).status, 2);
}

TEST_F(Cli, SimulateIsDeterministic) {
  const std::string args = "simulate -c " + std::string(STITCH_DEFAULT_CONFIG) + " --trials 8 --seed 11 ";
  const CliResult a = run_cli(args + "-o " + path("a.jsonl"));
  const CliResult b = run_cli(args + "--jobs 3 -o " + path("b.jsonl"));
  ASSERT_EQ(a.status, 0);
  ASSERT_EQ(b.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(slurp(path("a.jsonl")).empty());
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
  EXPECT_EQ(stitch::read_logs_file(path("a.jsonl")).size(), 8u);
}

TEST_F(Cli, ReportFormats) {
  ASSERT_EQ(run_cli("simulate --preset sensing_only --trials 4 -o " + path("s.jsonl")).status, 0);
  ASSERT_EQ(run_cli("simulate --preset stitch --trials 4 -o " + path("t.jsonl")).status, 0);
  const std::string logs = "report --logs " + path("s.jsonl") + " " + path("t.jsonl");
  const CliResult csv = run_cli(logs + " --format csv");
  ASSERT_EQ(csv.status, 0);
  std::istringstream lines(csv.out);
  std::string header, first, second, extra;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_FALSE(std::getline(lines, extra));
  EXPECT_EQ(header.rfind("method,", 0), 0u);
  EXPECT_EQ(first.rfind("Sensing Only,", 0), 0u);
  EXPECT_EQ(second.rfind("STITCH,", 0), 0u);

  const CliResult table = run_cli(logs);
  ASSERT_EQ(table.status, 0);
  EXPECT_NE(table.out.find("Mean Sutures to Failure"), std::string::npos);
  const CliResult hist = run_cli(logs + " --format histogram");
  ASSERT_EQ(hist.status, 0);
  EXPECT_EQ(hist.out.rfind("method,sutures,trials", 0), 0u);
  EXPECT_EQ(run_cli(logs + " --format xml").status, 1);
}

TEST_F(Cli, ConfigDumpRoundTrips) {
  const CliResult dump = run_cli("config -c " + std::string(STITCH_DEFAULT_CONFIG));
  ASSERT_EQ(dump.status, 0);
  EXPECT_EQ(stitch::config_to_json(stitch::parse_config(dump.out)), dump.out);
  std::ofstream(path("bad.json")) << R"({"controller": {"max_retry": 2}})";
  EXPECT_EQ(run_cli("config -c " + path("bad.json")).status, 1);
}
