#include "stitch/log_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace stitch {

namespace {

using nlohmann::ordered_json;

constexpr const char* kFormat = "stitch-trial-log";
constexpr int kVersion = 1;

ordered_json trial_json(const TrialLog& t) {
  ordered_json j;
  j["record"] = "trial";
  j["id"] = t.id;
  j["seed"] = t.seed;
  j["preset"] = to_string(t.preset);
  j["status"] = to_string(t.status);
  j["failure"] = t.failure ? ordered_json(to_string(*t.failure)) : ordered_json(nullptr);
  j["sutures_completed"] = t.sutures_completed;
  j["target_sutures"] = t.target_sutures;
  j["duration"] = t.duration;
  j["events"] = t.events.size();
  return j;
}

ordered_json event_json(int trial, const Event& e) {
  ordered_json j;
  j["record"] = "event";
  j["trial"] = trial;
  j["time"] = e.time;
  j["suture"] = e.suture;
  j["type"] = to_string(e.type);
  j["state"] = to_string(e.state);
  j["to"] = e.to ? ordered_json(to_string(*e.to)) : ordered_json(nullptr);
  j["retries"] = e.retries;
  j["error"] = e.error ? ordered_json(to_string(*e.error)) : ordered_json(nullptr);
  j["intervention"] = e.intervention;
  j["thread_length"] = e.thread_length;
  j["thread_pulled"] = e.thread_pulled;
  j["jitter"] = e.jitter;
  j["progress"] = e.progress;
  j["detail"] = e.detail;
  return j;
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  nlohmann::json next(const char* expected) {
    std::string line;
    if (!std::getline(in_, line)) fail(line_ + 1, std::string("unexpected end of file, expected a ") + expected + " record");
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(line_, std::string("malformed record: ") + e.what());
    }
    if (!j.is_object() || !j.contains("record") || j["record"] != expected) {
      fail(line_, std::string("expected a ") + expected + " record");
    }
    return j;
  }

  bool at_end() {
    std::string rest;
    while (std::getline(in_, rest)) {
      ++line_;
      if (rest.find_first_not_of(" \t\r") != std::string::npos) return false;
    }
    return true;
  }

  [[noreturn]] void fail(std::size_t line, const std::string& what) const { throw ParseError(source_, line, what); }
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

template <typename T>
T field(const nlohmann::json& j, const char* key, const LineReader& r) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    r.fail(r.line(), std::string("bad field '") + key + "': " + e.what());
  }
}

template <typename T, typename Parse>
std::optional<T> optional_enum(const nlohmann::json& j, const char* key, const LineReader& r, Parse parse) {
  if (!j.contains(key)) r.fail(r.line(), std::string("missing field '") + key + "'");
  if (j.at(key).is_null()) return std::nullopt;
  try {
    return parse(field<std::string>(j, key, r));
  } catch (const std::invalid_argument& e) {
    r.fail(r.line(), e.what());
  }
}

template <typename T, typename Parse>
T required_enum(const nlohmann::json& j, const char* key, const LineReader& r, Parse parse) {
  try {
    return parse(field<std::string>(j, key, r));
  } catch (const std::invalid_argument& e) {
    r.fail(r.line(), e.what());
  }
}

}  // namespace

void write_logs(std::ostream& out, std::span<const TrialLog> logs) {
  std::size_t n_events = 0;
  for (const auto& t : logs) n_events += t.events.size();
  ordered_json header;
  header["record"] = "header";
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["trials"] = logs.size();
  header["events"] = n_events;
  out << header.dump() << '\n';
  for (const auto& t : logs) {
    out << trial_json(t).dump() << '\n';
    for (const auto& e : t.events) out << event_json(t.id, e).dump() << '\n';
  }
}

void write_logs_file(const std::string& path, std::span<const TrialLog> logs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write log file '" + path + "'");
  write_logs(out, logs);
  if (!out) throw std::runtime_error("error while writing '" + path + "'");
}

std::vector<TrialLog> read_logs(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  const auto header = r.next("header");
  if (field<std::string>(header, "format", r) != kFormat) r.fail(r.line(), "not a trial log");
  if (field<int>(header, "version", r) != kVersion) r.fail(r.line(), "unsupported log version");
  const auto n_trials = field<std::size_t>(header, "trials", r);
  const auto n_total_events = field<std::size_t>(header, "events", r);
  std::size_t seen_events = 0;

  std::vector<TrialLog> logs;
  logs.reserve(n_trials);
  for (std::size_t k = 0; k < n_trials; ++k) {
    const auto j = r.next("trial");
    TrialLog t;
    t.id = field<int>(j, "id", r);
    t.seed = field<std::uint64_t>(j, "seed", r);
    t.preset = required_enum<Preset>(j, "preset", r, [](const std::string& s) {
      try {
        return parse_preset(s);
      } catch (const ConfigError& e) {
        throw std::invalid_argument(e.what());
      }
    });
    t.status = required_enum<TrialStatus>(j, "status", r, parse_trial_status);
    t.failure = optional_enum<ErrorKind>(j, "failure", r, parse_error_kind);
    t.sutures_completed = field<int>(j, "sutures_completed", r);
    t.target_sutures = field<int>(j, "target_sutures", r);
    t.duration = field<double>(j, "duration", r);
    const auto n_events = field<std::size_t>(j, "events", r);
    t.events.reserve(n_events);
    for (std::size_t i = 0; i < n_events; ++i) {
      const auto ej = r.next("event");
      if (field<int>(ej, "trial", r) != t.id) r.fail(r.line(), "event belongs to a different trial");
      Event e;
      e.time = field<double>(ej, "time", r);
      e.suture = field<int>(ej, "suture", r);
      e.type = required_enum<EventType>(ej, "type", r, parse_event_type);
      e.state = required_enum<PipelineState>(ej, "state", r, parse_pipeline_state);
      e.to = optional_enum<PipelineState>(ej, "to", r, parse_pipeline_state);
      e.retries = field<int>(ej, "retries", r);
      e.error = optional_enum<ErrorKind>(ej, "error", r, parse_error_kind);
      e.intervention = field<bool>(ej, "intervention", r);
      e.thread_length = field<double>(ej, "thread_length", r);
      e.thread_pulled = field<double>(ej, "thread_pulled", r);
      e.jitter = field<double>(ej, "jitter", r);
      e.progress = field<double>(ej, "progress", r);
      e.detail = field<std::string>(ej, "detail", r);
      t.events.push_back(std::move(e));
      ++seen_events;
    }
    logs.push_back(std::move(t));
  }
  if (!r.at_end()) r.fail(r.line(), "unexpected data after the last record");
  if (seen_events != n_total_events) r.fail(1, "header event count does not match the records");
  return logs;
}

std::vector<TrialLog> read_logs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log file '" + path + "'");
  return read_logs(in, path);
}

}  // namespace stitch
