#pragma once

#include <optional>
#include <string>
#include <vector>

#include "moose/protocol/events.hpp"

namespace moose::protocol {

struct TraceViolation {
  std::size_t index;
  std::string rule;
};

/// Checks that a log is a word of the protocol grammar
///   Init . BlueprintSet? . (ExploreRound | RefineRun | FeedbackApplied | Routed | SelfRanked)*
/// with exploration only in the exploratory stage, refinement only in the fine-grained stage,
/// no same-stage routes, and signals only on nodes the log has created. Works on the log alone.
std::optional<TraceViolation> validate_trace(const std::vector<ProtocolEvent>& events);

}  // namespace moose::protocol
