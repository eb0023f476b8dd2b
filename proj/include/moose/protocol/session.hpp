#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moose/core/tree.hpp"
#include "moose/explore/engine.hpp"
#include "moose/protocol/events.hpp"
#include "moose/refine/engine.hpp"

namespace moose::protocol {

/// Immutable snapshot of one discovery session. Every state is a left fold of its event log over
/// the base inputs; live operations and replay share the same fold step.
class SessionState {
public:
  const SessionId& id() const noexcept { return id_; }
  const ResearchContext& base_context() const noexcept { return base_; }
  const std::string& corpus_ref() const noexcept { return corpus_ref_; }
  const SearchTree& tree() const noexcept { return tree_; }
  const std::vector<ProtocolEvent>& events() const noexcept { return events_; }

  /// A node's own stage, overridden by the target of the latest route applied to it.
  Stage effective_stage(const NodeId& node) const;
  Stage stage_of_active() const { return effective_stage(tree_.active()); }

  /// Empty session shell: only base inputs, no events. Apply an Init event next.
  static SessionState shell(SessionId id, ResearchContext base, std::string corpus_ref);

  /// Validates `event` against the current state and returns the successor state.
  /// Throws Error with the rule that was broken (UnknownNode, SameStageRoute, StageMismatch, ...).
  SessionState apply(const ProtocolEvent& event) const;

private:
  SessionId id_;
  ResearchContext base_;
  std::string corpus_ref_;
  SearchTree tree_;
  std::vector<ProtocolEvent> events_;
  std::map<NodeId, Stage> routed_;
};

// --- guiding signals and engine invocations -------------------------------------------------

/// f_init: the blueprint (when given) is recorded as BlueprintSet and rendered into the root.
SessionState init_session(const std::string& question, const std::optional<std::string>& survey,
                          const std::optional<std::string>& blueprint, const InspirationCorpus& corpus,
                          IdGenerator& ids);

/// f_dir: widens the context of `node` (and of descendants created later) with the node's text
/// and the critique; the node becomes active. Regeneration happens on the next engine call.
SessionState apply_feedback(const SessionState& session, const NodeId& node, const std::string& feedback,
                            IdGenerator& ids);

/// f_route: moves `node` into `target` for subsequent engine calls and activates it.
SessionState route(const SessionState& session, const NodeId& node, Stage target, IdGenerator& ids);

/// Base context plus, in event order, every feedback addition whose scope covers `node`.
ResearchContext context_for(const SessionState& session, const NodeId& node);

/// context_for(node) widened with the exploration summary of the routed seed (b_exp).
ResearchContext refinement_context(const SessionState& session, const NodeId& node,
                                   const InspirationCorpus* corpus = nullptr);

struct ExploreStep {
  SessionState session;
  std::vector<NodeId> new_nodes;
};

/// One exploration round at `at` (default: the active node), recorded as ExploreRound.
ExploreStep explore(const SessionState& session, llm::LlmGateway& gateway, const InspirationCorpus& corpus,
                    const explore::ExploreConfig& cfg, IdGenerator& ids, std::optional<NodeId> at = std::nullopt);

struct RefineStep {
  SessionState session;
  refine::RefineOutcome outcome;
  refine::RunLog log;
  std::optional<Error> error;  // set when the run was interrupted; partial nodes are kept
};

/// Hierarchical refinement at `at` (default: the active node), recorded as RefineRun.
RefineStep refine(const SessionState& session, llm::LlmGateway& gateway, const refine::RefineConfig& cfg,
                  IdGenerator& ids, std::optional<NodeId> at = std::nullopt,
                  const InspirationCorpus* corpus = nullptr);

struct RankedEntry {
  NodeId node;
  std::optional<EvaluationScore> scores;  // nullopt when scoring failed
  std::string error;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

struct RankStep {
  SessionState session;
  std::vector<RankedEntry> ranking;
};

/// Scores each candidate under its own context; average descending, ties by id, failures last.
RankStep self_rank(const SessionState& session, llm::LlmGateway& gateway, const std::vector<NodeId>& candidates,
                   IdGenerator& ids, const std::vector<std::string>& criteria = default_criteria());

// --- persistence -----------------------------------------------------------------------------

/// {session_id, base{context, corpus}, events[], tree, stage_of_active}
Json export_session(const SessionState& session);
std::string export_bytes(const SessionState& session);

/// Rebuilds a session from base inputs + events alone.
SessionState replay(const Json& exported);

/// Parses, validates the trace, replays, and requires the re-export to be byte-identical.
/// Throws Error{CorruptSession}.
SessionState restore(std::string_view bytes);

}  // namespace moose::protocol
