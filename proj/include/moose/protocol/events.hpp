#pragma once

#include <cstdint>
#include <string_view>

#include "moose/core/ids.hpp"
#include "moose/core/json.hpp"

namespace moose::protocol {

enum class EventKind { Init, BlueprintSet, ExploreRound, FeedbackApplied, Routed, RefineRun, SelfRanked };

std::string_view to_string(EventKind k) noexcept;
EventKind event_kind_from_string(std::string_view s);

/// One entry of the session log. Payloads record engine outputs so the log alone rebuilds state:
///   Init            {root_id}
///   BlueprintSet    {text}
///   ExploreRound    {at, selected[], nodes[]}
///   FeedbackApplied {node, node_stage, text}
///   Routed          {node, from, target}
///   RefineRun       {at, start_score, outcome{final_node, steps_used, per_level_trace[]}, nodes[], error}
///   SelfRanked      {ranking[{node, scores, error}]}
struct ProtocolEvent {
  EventId id;
  EventKind kind;
  Json payload;
  std::int64_t timestamp = 0;

  friend bool operator==(const ProtocolEvent&, const ProtocolEvent&) = default;
};

void to_json(Json& j, EventKind k);
void from_json(const Json& j, EventKind& k);
void to_json(Json& j, const ProtocolEvent& e);
void from_json(const Json& j, ProtocolEvent& e);

}  // namespace moose::protocol
