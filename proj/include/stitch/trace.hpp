#pragma once

#include <optional>
#include <string>
#include <vector>

namespace stitch {

enum class PipelineState { Insertion, Sweep, Extraction, Cinch, Handover, PoseCorrection, Done, Failed };

/// Insertion, extraction, handover and thread-management errors.
enum class ErrorKind { I, E, H, T };

enum class EventType {
  attempt_start,  // a suture attempt begins (first try or after an intervention)
  transition,
  retry,
  observation,
  perception_failure,
  motion,
  grasp,
  cinch,
  error,
  intervention,
  suture_done,
};

const char* to_string(PipelineState s);
const char* to_string(ErrorKind k);
const char* to_string(EventType t);
PipelineState parse_pipeline_state(const std::string& s);
ErrorKind parse_error_kind(const std::string& s);
EventType parse_event_type(const std::string& s);

struct Event {
  double time = 0.0;
  int suture = 0;
  EventType type = EventType::transition;
  /// Primitive the event belongs to; the source state for transitions.
  PipelineState state = PipelineState::Insertion;
  /// Target state, for transitions and retries.
  std::optional<PipelineState> to;
  int retries = 0;
  std::optional<ErrorKind> error;
  bool intervention = false;
  /// Thread pulled by this event (cinch) and the running total after it.
  double thread_length = 0.0;
  double thread_pulled = 0.0;
  /// Lateral approach offset of a handover attempt (meters).
  double jitter = 0.0;
  /// Matched endpoint displacement measured after an extraction attempt (meters).
  double progress = 0.0;
  std::string detail;

  bool operator==(const Event&) const = default;
};

using EventTrace = std::vector<Event>;

}  // namespace stitch
