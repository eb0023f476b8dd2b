#include "moose/protocol/events.hpp"

#include "moose/error.hpp"

namespace moose::protocol {

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::Init: return "Init";
    case EventKind::BlueprintSet: return "BlueprintSet";
    case EventKind::ExploreRound: return "ExploreRound";
    case EventKind::FeedbackApplied: return "FeedbackApplied";
    case EventKind::Routed: return "Routed";
    case EventKind::RefineRun: return "RefineRun";
    case EventKind::SelfRanked: return "SelfRanked";
  }
  return "?";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::Init, EventKind::BlueprintSet, EventKind::ExploreRound, EventKind::FeedbackApplied,
                 EventKind::Routed, EventKind::RefineRun, EventKind::SelfRanked})
    if (to_string(k) == s) return k;
  throw Error(Errc::InvalidTrace, "unknown event kind '" + std::string(s) + "'");
}

void to_json(Json& j, EventKind k) { j = std::string(to_string(k)); }
void from_json(const Json& j, EventKind& k) { k = event_kind_from_string(j.get<std::string>()); }

void to_json(Json& j, const ProtocolEvent& e) {
  j = Json{{"id", e.id}, {"kind", e.kind}, {"payload", e.payload}, {"timestamp", e.timestamp}};
}

void from_json(const Json& j, ProtocolEvent& e) {
  e.id = j.at("id").get<EventId>();
  e.kind = j.at("kind").get<EventKind>();
  e.payload = j.at("payload");
  e.timestamp = j.at("timestamp").get<std::int64_t>();
}

}  // namespace moose::protocol
