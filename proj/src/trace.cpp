#include "stitch/trace.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace stitch {

namespace {

constexpr std::array<std::pair<PipelineState, const char*>, 8> kStates{{
    {PipelineState::Insertion, "Insertion"},
    {PipelineState::Sweep, "Sweep"},
    {PipelineState::Extraction, "Extraction"},
    {PipelineState::Cinch, "Cinch"},
    {PipelineState::Handover, "Handover"},
    {PipelineState::PoseCorrection, "PoseCorrection"},
    {PipelineState::Done, "Done"},
    {PipelineState::Failed, "Failed"},
}};

constexpr std::array<std::pair<ErrorKind, const char*>, 4> kErrors{{
    {ErrorKind::I, "I"},
    {ErrorKind::E, "E"},
    {ErrorKind::H, "H"},
    {ErrorKind::T, "T"},
}};

constexpr std::array<std::pair<EventType, const char*>, 11> kTypes{{
    {EventType::attempt_start, "attempt_start"},
    {EventType::transition, "transition"},
    {EventType::retry, "retry"},
    {EventType::observation, "observation"},
    {EventType::perception_failure, "perception_failure"},
    {EventType::motion, "motion"},
    {EventType::grasp, "grasp"},
    {EventType::cinch, "cinch"},
    {EventType::error, "error"},
    {EventType::intervention, "intervention"},
    {EventType::suture_done, "suture_done"},
}};

template <typename E, std::size_t N>
const char* name_of(const std::array<std::pair<E, const char*>, N>& table, E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
E value_of(const std::array<std::pair<E, const char*>, N>& table, const std::string& s, const char* what) {
  for (const auto& [v, name] : table) {
    if (s == name) return v;
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

const char* to_string(PipelineState s) { return name_of(kStates, s); }
const char* to_string(ErrorKind k) { return name_of(kErrors, k); }
const char* to_string(EventType t) { return name_of(kTypes, t); }

PipelineState parse_pipeline_state(const std::string& s) { return value_of(kStates, s, "pipeline state"); }
ErrorKind parse_error_kind(const std::string& s) { return value_of(kErrors, s, "error kind"); }
EventType parse_event_type(const std::string& s) { return value_of(kTypes, s, "event type"); }

}  // namespace stitch
