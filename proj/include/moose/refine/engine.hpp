#pragma once

#include <optional>
#include <string>
#include <vector>

#include "moose/core/tree.hpp"
#include "moose/error.hpp"
#include "moose/llm/gateway.hpp"

namespace moose::refine {

struct LevelDescriptor {
  std::string name;
  std::string description;  // shown to the model
};

std::vector<LevelDescriptor> default_levels();

struct RefineConfig {
  std::vector<LevelDescriptor> levels = default_levels();
  std::size_t proposals_per_step = 2;
  std::size_t patience = 2;
  std::size_t max_steps_per_level = 20;
  std::vector<std::string> criteria = default_criteria();

  void validate() const;
};

struct LevelTrace {
  std::uint32_t level = 0;
  double best_average = 0.0;
  std::size_t steps = 0;

  friend bool operator==(const LevelTrace&, const LevelTrace&) = default;
};

struct RefineOutcome {
  NodeId final_node;
  std::size_t steps_used = 0;  // proposal calls, summed over levels
  std::vector<LevelTrace> per_level_trace;

  friend bool operator==(const RefineOutcome&, const RefineOutcome&) = default;
};

/// Audit record per scored candidate: {step, level, candidate_digest, average, accepted}.
struct RunLogRecord {
  std::size_t step = 0;  // 1-based proposal call index within the run
  std::uint32_t level = 0;
  std::string candidate_digest;
  double average = 0.0;
  bool accepted = false;

  friend bool operator==(const RunLogRecord&, const RunLogRecord&) = default;
};

/// Append-only, rendered as one JSON object per line.
class RunLog {
public:
  void append(RunLogRecord r) { records_.push_back(std::move(r)); }
  const std::vector<RunLogRecord>& records() const noexcept { return records_; }
  std::string to_jsonl() const;

private:
  std::vector<RunLogRecord> records_;
};

/// Per-criterion scores parsed from the scorer; the average is computed here, not by the model.
/// Unparsable output gets repair calls; any out-of-range value is rejected outright.
EvaluationScore score_hypothesis(llm::LlmGateway& gateway, const ResearchContext& context, std::string_view text,
                                 const std::vector<std::string>& criteria = default_criteria());

/// One proposal call producing a revision of `current` aimed at `level`.
std::string propose_refinement(llm::LlmGateway& gateway, const ResearchContext& context,
                               const HypothesisNode& current, std::uint32_t level, const RefineConfig& cfg);

struct LevelResult {
  SearchTree tree;
  NodeId best;
  double best_average = 0.0;
  std::size_t steps = 0;
  std::vector<NodeId> accepted;
  std::optional<EvaluationScore> start_score;  // set when this call scored the start node
};

/// Greedy hill climb at one level: each iteration proposes `proposals_per_step` candidates and
/// attaches the best one if it strictly beats the running best. Stops after `patience`
/// consecutive non-improving iterations or `max_steps_per_level` iterations.
LevelResult refine_level(llm::LlmGateway& gateway, const SearchTree& tree, const ResearchContext& context,
                         const NodeId& start, std::uint32_t level, const RefineConfig& cfg, IdGenerator& ids,
                         const EventId& created_by, RunLog* log = nullptr,
                         std::optional<double> start_average = std::nullopt);

struct HierarchicalResult {
  SearchTree tree;
  RefineOutcome outcome;
  std::vector<NodeId> accepted;  // attach order
  std::optional<EvaluationScore> start_score;
};

/// Levels run strictly coarse to fine; each level starts from the previous level's best.
/// On failure throws RefineError carrying everything attached so far.
HierarchicalResult refine_hierarchical(llm::LlmGateway& gateway, const SearchTree& tree,
                                       const ResearchContext& context, const NodeId& start, const RefineConfig& cfg,
                                       IdGenerator& ids, const EventId& created_by, RunLog* log = nullptr);

class RefineError : public Error {
public:
  RefineError(const Error& cause, HierarchicalResult partial)
      : Error(cause.code(), std::string("refinement interrupted: ") + cause.what()), partial_(std::move(partial)) {}

  const HierarchicalResult& partial() const noexcept { return partial_; }

private:
  HierarchicalResult partial_;
};

}  // namespace moose::refine
