#pragma once

#include <optional>
#include <string>
#include <vector>

#include "moose/eval/dataset.hpp"
#include "moose/eval/oracle.hpp"
#include "moose/explore/engine.hpp"
#include "moose/protocol/session.hpp"
#include "moose/refine/engine.hpp"

namespace moose::eval {

enum class Ranking { None, SelfRank, OracleRank };

std::string_view to_string(Ranking r) noexcept;

/// One composition of exploration, ranking, routing, refinement and feedback.
struct PipelineSpec {
  std::string name;
  bool use_blueprint = false;
  Ranking ranking = Ranking::None;  // how the routed node is picked
  std::size_t feedback_rounds = 0;
  FeedbackStrength feedback_strength = FeedbackStrength::Standard;
  bool run_refinement = false;
  bool run_exploration = true;

  /// Stage that continues after each feedback round.
  Stage continuation() const noexcept { return run_refinement ? Stage::FineGrained : Stage::Exploratory; }
  void validate() const;
};

struct PipelineRow {
  PipelineSpec spec;
  std::string description;  // composition in "MC + ... + MC2" notation
};

/// The fifteen benchmark compositions, in table order.
const std::vector<PipelineRow>& benchmark_pipelines();
const PipelineRow& find_pipeline(std::string_view name);

/// Stage labels implied by a composition string. "MC" expands to `explore_rounds` Explore labels;
/// "initial blueprint" is hoisted to the front because the blueprint is fixed at init.
std::vector<std::string> reference_stage_sequence(std::string_view description, std::size_t explore_rounds);

/// Question plus the first two sentences of the survey.
std::string derive_blueprint(const GroundTruthEntry& entry);

struct RunReport {
  std::string entry_id;
  std::string pipeline;
  double recall = 0.0;
  std::size_t search_steps = 0;            // proposal calls of the final refinement run
  std::size_t total_refinement_steps = 0;  // proposal calls over the whole run
  std::vector<std::string> stage_sequence;
  std::string session_digest;
  std::string final_node;
  std::string final_hypothesis;
  bool complete = true;
  std::string error;
};

void to_json(Json& j, const RunReport& r);
void from_json(const Json& j, RunReport& r);

struct PipelineConfigs {
  explore::ExploreConfig explore;
  refine::RefineConfig refine;
  OracleMode oracle_mode = OracleMode::Deterministic;
};

struct RunResult {
  RunReport report;
  std::optional<protocol::SessionState> session;
  std::vector<std::string> feedback;  // every accepted oracle critique, in order
  std::uint64_t gateway_propose_calls = 0;
};

/// Executes `spec` on one dataset entry. Failures inside the run yield a report flagged
/// incomplete rather than an exception.
RunResult run_pipeline(const PipelineSpec& spec, const GroundTruthEntry& entry, const InspirationCorpus& corpus,
                       const PipelineConfigs& configs, llm::LlmGateway& gateway, IdGenerator& ids);

/// Session events as stage labels (oracle rankings excluded, since they live outside the session).
std::vector<std::string> session_stage_labels(const protocol::SessionState& session);

}  // namespace moose::eval
