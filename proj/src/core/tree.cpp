#include "moose/core/tree.hpp"

#include <algorithm>
#include <set>

#include "moose/error.hpp"

namespace moose {

const HypothesisNode& SearchTree::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(Errc::UnknownNode, "node '" + id.value + "' not in tree");
  return it->second;
}

std::vector<NodeId> SearchTree::children(const NodeId& id) const {
  std::vector<NodeId> out;
  for (const auto& [nid, n] : nodes_)
    if (n.parent && *n.parent == id) out.push_back(nid);
  return out;
}

std::vector<NodeId> SearchTree::leaves() const {
  std::set<NodeId> parents;
  for (const auto& [_, n] : nodes_)
    if (n.parent) parents.insert(*n.parent);
  std::vector<NodeId> out;
  for (const auto& [nid, _] : nodes_)
    if (!parents.contains(nid)) out.push_back(nid);
  return out;
}

bool SearchTree::is_ancestor(const NodeId& ancestor, const NodeId& id) const {
  const HypothesisNode* cur = &node(id);
  while (cur->parent) {
    if (*cur->parent == ancestor) return true;
    cur = &node(*cur->parent);
  }
  return false;
}

SearchTree SearchTree::with_active(const NodeId& id) const {
  node(id);
  SearchTree out = *this;
  out.active_ = id;
  return out;
}

SearchTree SearchTree::with_scores(const NodeId& id, EvaluationScore scores) const {
  if (!scores.consistent()) throw Error(Errc::InvalidScore, "inconsistent score for " + id.value);
  SearchTree out = *this;
  auto it = out.nodes_.find(id);
  if (it == out.nodes_.end()) throw Error(Errc::UnknownNode, "node '" + id.value + "' not in tree");
  it->second.scores = std::move(scores);
  return out;
}

bool SearchTree::well_formed() const {
  if (!nodes_.contains(root_) || !nodes_.contains(active_)) return false;
  std::size_t roots = 0;
  for (const auto& [id, n] : nodes_) {
    if (!n.parent) {
      ++roots;
      if (id != root_) return false;
      continue;
    }
    if (!nodes_.contains(*n.parent)) return false;
    // Walk up; a cycle would revisit more than size() nodes.
    std::size_t hops = 0;
    const HypothesisNode* cur = &n;
    while (cur->parent) {
      if (++hops > nodes_.size()) return false;
      cur = &nodes_.at(*cur->parent);
    }
  }
  return roots == 1;
}

std::string render_seed(const ResearchContext& background) {
  std::string out = "Research question: " + trim(background.question);
  if (background.blueprint && !trim(*background.blueprint).empty())
    out += "\nBlueprint: " + trim(*background.blueprint);
  return out;
}

SearchTree new_tree(const ResearchContext& background, NodeId root_id, EventId created_by) {
  background.validate();
  HypothesisNode root;
  root.id = root_id;
  root.stage = Stage::Exploratory;
  root.step_index = 0;
  root.text = render_seed(background);
  root.created_by_event = std::move(created_by);

  SearchTree t;
  t.root_ = root_id;
  t.active_ = root_id;
  t.nodes_.emplace(root_id, std::move(root));
  return t;
}

std::uint32_t next_step_index(const HypothesisNode& parent, Stage stage) noexcept {
  return parent.stage == stage ? parent.step_index + 1 : 1;
}

SearchTree attach_child(const SearchTree& tree, const NodeId& parent, HypothesisNode node) {
  auto pit = tree.nodes_.find(parent);
  if (pit == tree.nodes_.end())
    throw Error(Errc::UnknownParent, "parent '" + parent.value + "' not in tree");
  if (node.id.empty() || tree.nodes_.contains(node.id))
    throw Error(Errc::DuplicateNode, "node id '" + node.id.value + "' missing or already used");
  if (node.parent && *node.parent != parent)
    throw Error(Errc::UnknownParent, "node parent field disagrees with attach target");
  node.parent = parent;

  const HypothesisNode& p = pit->second;
  if (node.step_index != next_step_index(p, node.stage))
    throw Error(Errc::StepIndexViolation,
                "expected step_index " + std::to_string(next_step_index(p, node.stage)) + ", got " +
                    std::to_string(node.step_index));
  if (node.stage == Stage::Exploratory) {
    if (!node.inspiration_used || node.abstraction_level)
      throw Error(Errc::StageFieldViolation, "exploratory node needs inspiration and no level");
  } else {
    if (!node.abstraction_level || node.inspiration_used)
      throw Error(Errc::StageFieldViolation, "fine-grained node needs level and no inspiration");
  }
  if (node.scores && !node.scores->consistent())
    throw Error(Errc::InvalidScore, "inconsistent score on node '" + node.id.value + "'");

  SearchTree out = tree;
  out.nodes_.emplace(node.id, std::move(node));
  return out;
}

std::vector<NodeId> path_to_root(const SearchTree& tree, const NodeId& id) {
  std::vector<NodeId> path;
  const HypothesisNode* cur = &tree.node(id);
  path.push_back(cur->id);
  while (cur->parent) {
    cur = &tree.node(*cur->parent);
    path.push_back(cur->id);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace moose
