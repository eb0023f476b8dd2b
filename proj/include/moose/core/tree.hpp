#pragma once

#include <map>
#include <vector>

#include "moose/core/types.hpp"

namespace moose {

/// Immutable-by-convention search tree; every operation returns a new value.
class SearchTree {
public:
  const NodeId& root() const noexcept { return root_; }
  const NodeId& active() const noexcept { return active_; }
  const std::map<NodeId, HypothesisNode>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool contains(const NodeId& id) const { return nodes_.contains(id); }
  /// Throws Error{UnknownNode}.
  const HypothesisNode& node(const NodeId& id) const;

  /// Children in id (creation) order.
  std::vector<NodeId> children(const NodeId& id) const;
  std::vector<NodeId> leaves() const;
  bool is_ancestor(const NodeId& ancestor, const NodeId& node) const;

  SearchTree with_active(const NodeId& id) const;
  SearchTree with_scores(const NodeId& id, EvaluationScore scores) const;

  /// Checks root uniqueness, parent existence, acyclicity, and active membership.
  bool well_formed() const;

  friend bool operator==(const SearchTree&, const SearchTree&) = default;

private:
  friend SearchTree new_tree(const ResearchContext&, NodeId, EventId);
  friend SearchTree attach_child(const SearchTree&, const NodeId&, HypothesisNode);

  NodeId root_;
  NodeId active_;
  std::map<NodeId, HypothesisNode> nodes_;
};

/// Text of the synthetic root: the question, plus the blueprint when present.
std::string render_seed(const ResearchContext& background);

SearchTree new_tree(const ResearchContext& background, NodeId root_id, EventId created_by);

/// Validates `node` against its parent: step index continuity and stage-specific fields.
SearchTree attach_child(const SearchTree& tree, const NodeId& parent, HypothesisNode node);

/// Root first, `node` last.
std::vector<NodeId> path_to_root(const SearchTree& tree, const NodeId& node);

/// Step index a new child of `parent` at `stage` must carry.
std::uint32_t next_step_index(const HypothesisNode& parent, Stage stage) noexcept;

}  // namespace moose
