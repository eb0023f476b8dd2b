#pragma once

#include <set>
#include <vector>

#include "moose/core/tree.hpp"
#include "moose/llm/gateway.hpp"

namespace moose::explore {

struct ExploreConfig {
  std::size_t beam_width = 3;      // inspirations selected per round
  std::size_t shortlist_size = 15;  // lexical pre-filter size
  std::size_t max_rounds = 2;       // rounds per autonomous exploration stage

  void validate() const;
};

/// Deterministic lexical pre-filter: distinct content-token overlap between (question + current
/// hypothesis) and (title + abstract), descending; ties by id. `exclude` entries never appear.
std::vector<InspirationId> shortlist(const ResearchContext& context, const HypothesisNode& current,
                                     const InspirationCorpus& corpus, std::size_t n,
                                     const std::set<InspirationId>& exclude = {});

/// Picks up to beam_width distinct ids (clamped to the pool), in the selector's order.
std::vector<InspirationId> select_inspirations(llm::LlmGateway& gateway, const ResearchContext& context,
                                               const HypothesisNode& current, const InspirationCorpus& corpus,
                                               const ExploreConfig& cfg,
                                               const std::set<InspirationId>& exclude = {});

/// One transition h_{j-1} --i_j--> h_j. The result is not attached to any tree.
/// `routed_seed` admits a fine-grained parent that was routed back to exploration.
HypothesisNode expand_with_inspiration(llm::LlmGateway& gateway, const ResearchContext& context,
                                       const HypothesisNode& parent, const Inspiration& insp, NodeId id,
                                       EventId created_by, bool routed_seed = false);

struct RoundResult {
  SearchTree tree;
  std::vector<NodeId> new_nodes;  // selector order
  std::vector<InspirationId> selected;
};

/// Selects, expands and attaches one child per inspiration under tree.active. Active is unchanged.
/// `stage_of_active` overrides the active node's own stage (routed seeds); it must be Exploratory.
RoundResult explore_round(llm::LlmGateway& gateway, const SearchTree& tree, const ResearchContext& context,
                          const InspirationCorpus& corpus, const ExploreConfig& cfg, IdGenerator& ids,
                          const EventId& created_by, std::optional<Stage> stage_of_active = std::nullopt);

}  // namespace moose::explore
