#include "moose/protocol/trace.hpp"

#include <map>

#include "moose/core/types.hpp"

namespace moose::protocol {

namespace {

struct Checker {
  std::map<NodeId, Stage> own;     // stage each known node was created in
  std::map<NodeId, Stage> routed;  // latest route target per node

  bool known(const NodeId& n) const { return own.contains(n); }
  Stage effective(const NodeId& n) const {
    auto it = routed.find(n);
    return it != routed.end() ? it->second : own.at(n);
  }
};

}  // namespace

std::optional<TraceViolation> validate_trace(const std::vector<ProtocolEvent>& events) {
  if (events.empty()) return TraceViolation{0, "log is empty; expected Init"};

  Checker c;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const auto& p = e.payload;
    auto fail = [i](std::string rule) { return TraceViolation{i, std::move(rule)}; };
    if (i > 0 && !(events[i - 1].id < e.id)) return fail("event ids must strictly increase");

    try {
      switch (e.kind) {
        case EventKind::Init:
          if (i != 0) return fail("Init may only open the log");
          c.own[p.at("root_id").get<NodeId>()] = Stage::Exploratory;
          break;
        case EventKind::BlueprintSet:
          if (i != 1) return fail("BlueprintSet may only directly follow Init");
          break;
        default:
          if (i == 0) return fail("log must start with Init");
          break;
      }

      switch (e.kind) {
        case EventKind::Init:
        case EventKind::BlueprintSet:
          break;

        case EventKind::ExploreRound: {
          const auto at = p.at("at").get<NodeId>();
          if (!c.known(at)) return fail("ExploreRound at unknown node");
          if (c.effective(at) != Stage::Exploratory) return fail("ExploreRound while stage is FineGrained");
          for (const auto& n : p.at("nodes")) c.own[n.at("id").get<NodeId>()] = Stage::Exploratory;
          break;
        }

        case EventKind::RefineRun: {
          const auto at = p.at("at").get<NodeId>();
          if (!c.known(at)) return fail("RefineRun at unknown node");
          if (c.effective(at) != Stage::FineGrained)
            return fail("RefineRun before a Routed(->FineGrained) of its node");
          for (const auto& n : p.at("nodes")) c.own[n.at("id").get<NodeId>()] = Stage::FineGrained;
          break;
        }

        case EventKind::FeedbackApplied: {
          const auto node = p.at("node").get<NodeId>();
          if (!c.known(node)) return fail("FeedbackApplied on unknown node");
          if (trim(p.at("text").get<std::string>()).empty()) return fail("FeedbackApplied with empty text");
          break;
        }

        case EventKind::Routed: {
          const auto node = p.at("node").get<NodeId>();
          if (!c.known(node)) return fail("Routed on unknown node");
          const auto target = p.at("target").get<Stage>();
          if (c.effective(node) == target) return fail("Routed to the node's current stage");
          c.routed[node] = target;
          break;
        }

        case EventKind::SelfRanked:
          for (const auto& r : p.at("ranking"))
            if (!c.known(r.at("node").get<NodeId>())) return fail("SelfRanked over unknown node");
          break;
      }
    } catch (const std::exception& ex) {
      return fail(std::string("malformed payload: ") + ex.what());
    }
  }
  return std::nullopt;
}

}  // namespace moose::protocol
