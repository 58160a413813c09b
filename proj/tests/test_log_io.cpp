#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "stitch/log_io.hpp"

using namespace stitch;

namespace {

TrialLog random_trial(std::mt19937_64& rng, int id, int n_events) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> state(0, 7);
  std::uniform_int_distribution<int> type(0, 10);
  std::uniform_int_distribution<int> kind(0, 3);
  TrialLog t;
  t.id = id;
  t.seed = rng();
  t.preset = Preset::stitch_human;
  t.status = TrialStatus::failed;
  t.failure = ErrorKind::E;
  t.sutures_completed = 3;
  t.target_sutures = 6;
  t.duration = 1234.5 * u(rng);
  for (int k = 0; k < n_events; ++k) {
    Event e;
    e.time = u(rng) * 1e3;
    e.suture = k % 6 + 1;
    e.type = static_cast<EventType>(type(rng));
    e.state = static_cast<PipelineState>(state(rng));
    if (k % 2) e.to = static_cast<PipelineState>(state(rng));
    if (k % 5 == 0) e.error = static_cast<ErrorKind>(kind(rng));
    e.retries = k % 6;
    e.intervention = k % 7 == 0;
    e.thread_length = u(rng);
    e.thread_pulled = u(rng);
    e.jitter = u(rng) * 1e-3;
    e.progress = u(rng) * 1e-2;
    e.detail = k % 3 ? "right move_to" : "";
    t.events.push_back(e);
  }
  return t;
}

}  // namespace

TEST(LogIo, EmptyRoundTrip) {
  std::stringstream s;
  write_logs(s, std::vector<TrialLog>{});
  EXPECT_TRUE(read_logs(s).empty());
}

TEST(LogIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  std::vector<TrialLog> logs{random_trial(rng, 0, 1000), random_trial(rng, 1, 0), random_trial(rng, 2, 17)};
  logs[1].status = TrialStatus::wound_closed;
  logs[1].failure.reset();
  std::stringstream s;
  write_logs(s, logs);
  EXPECT_EQ(read_logs(s), logs);
}

TEST(LogIo, TruncationIsReported) {
  std::mt19937_64 rng(6);
  const std::vector<TrialLog> logs{random_trial(rng, 0, 10)};
  std::stringstream s;
  write_logs(s, logs);
  std::string text = s.str();
  std::vector<std::string> lines;
  std::istringstream split(text);
  for (std::string line; std::getline(split, line);) lines.push_back(line);
  ASSERT_GT(lines.size(), 5u);

  std::string dropped;
  for (std::size_t k = 0; k + 3 < lines.size(); ++k) dropped += lines[k] + "\n";
  std::istringstream short_in(dropped);
  EXPECT_THROW(read_logs(short_in, "run.jsonl"), ParseError);

  std::string cut = text.substr(0, text.size() - 20);
  std::istringstream cut_in(cut);
  try {
    read_logs(cut_in, "run.jsonl");
    FAIL() << "truncated record accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), lines.size());
    EXPECT_NE(std::string(e.what()).find("run.jsonl:"), std::string::npos);
  }
}

TEST(LogIo, MalformedRecord) {
  std::istringstream in("{\"format\":\"bogus\"}\n");
  EXPECT_THROW(read_logs(in), ParseError);
  std::istringstream garbage("not json\n");
  EXPECT_THROW(read_logs(garbage), ParseError);
}
