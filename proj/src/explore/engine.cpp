#include "moose/explore/engine.hpp"

#include <algorithm>
#include <future>

#include "moose/core/text.hpp"
#include "moose/error.hpp"

namespace moose::explore {

using llm::GenerationRequest;
using llm::TemplateId;

void ExploreConfig::validate() const {
  if (beam_width == 0 || shortlist_size == 0 || max_rounds == 0)
    throw Error(Errc::InvalidConfig, "explore config values must be positive");
}

std::vector<InspirationId> shortlist(const ResearchContext& context, const HypothesisNode& current,
                                     const InspirationCorpus& corpus, std::size_t n,
                                     const std::set<InspirationId>& exclude) {
  const auto query = text::content_tokens(context.question + " " + current.text);
  std::vector<std::pair<std::size_t, InspirationId>> scored;
  for (const auto& e : corpus.entries()) {
    if (exclude.contains(e.id)) continue;
    std::size_t overlap = 0;
    for (const auto& t : text::content_tokens(e.title + " " + e.abstract)) overlap += query.contains(t) ? 1 : 0;
    scored.emplace_back(overlap, e.id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<InspirationId> out;
  for (std::size_t i = 0; i < scored.size() && i < n; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<InspirationId> select_inspirations(llm::LlmGateway& gateway, const ResearchContext& context,
                                               const HypothesisNode& current, const InspirationCorpus& corpus,
                                               const ExploreConfig& cfg,
                                               const std::set<InspirationId>& exclude) {
  cfg.validate();
  if (corpus.empty()) throw Error(Errc::EmptyCorpus, "inspiration corpus is empty");

  const auto pool = shortlist(context, current, corpus, cfg.shortlist_size, exclude);
  if (pool.empty())
    throw Error(Errc::InspirationsExhausted, "every inspiration was already used under " + current.id.value);
  const std::size_t beam = std::min(cfg.beam_width, pool.size());
  if (pool.size() <= beam) return pool;

  std::string candidates;
  for (const auto& id : pool) {
    const auto* e = corpus.find(id);
    candidates += id.value + ": " + e->title + " - " + e->abstract + "\n";
  }
  auto request = GenerationRequest::make(TemplateId::SelectInspiration,
                                         {{"question", context.question},
                                          {"context", render_context(context)},
                                          {"hypothesis", current.text},
                                          {"candidates", candidates},
                                          {"count", std::to_string(beam)}});

  const std::set<InspirationId> allowed(pool.begin(), pool.end());
  auto parse = [&](const std::string& raw) {
    auto field = llm::find_field(raw, "ids");
    if (!field) throw ParseError("missing field 'ids'", raw);
    std::vector<InspirationId> chosen;
    for (auto& tok : llm::split_id_list(*field)) {
      InspirationId id(tok);
      if (!allowed.contains(id)) continue;
      if (std::find(chosen.begin(), chosen.end(), id) != chosen.end()) continue;
      chosen.push_back(std::move(id));
      if (chosen.size() == beam) break;
    }
    if (chosen.empty()) throw ParseError("no valid inspiration id named", raw);
    return chosen;
  };

  std::vector<InspirationId> chosen;
  try {
    chosen = gateway.complete_with_repairs(std::move(request), parse);
  } catch (const ParseError& e) {
    throw Error(Errc::SelectionParseFailure, e.what());
  }
  // Top up from the lexical order when the selector named fewer than the beam.
  for (const auto& id : pool) {
    if (chosen.size() >= beam) break;
    if (std::find(chosen.begin(), chosen.end(), id) == chosen.end()) chosen.push_back(id);
  }
  return chosen;
}

HypothesisNode expand_with_inspiration(llm::LlmGateway& gateway, const ResearchContext& context,
                                       const HypothesisNode& parent, const Inspiration& insp, NodeId id,
                                       EventId created_by, bool routed_seed) {
  if (parent.stage != Stage::Exploratory && !routed_seed)
    throw Error(Errc::StageMismatch, "cannot expand fine-grained node " + parent.id.value);

  const auto result = gateway.complete(GenerationRequest::make(TemplateId::GenerateHypothesis,
                                                               {{"question", context.question},
                                                                {"context", render_context(context)},
                                                                {"hypothesis", parent.text},
                                                                {"inspiration_title", insp.title},
                                                                {"inspiration_abstract", insp.abstract}}));
  HypothesisNode child;
  child.id = std::move(id);
  child.parent = parent.id;
  child.stage = Stage::Exploratory;
  child.text = llm::find_field(result.text, "hypothesis").value_or(trim(result.text));
  child.step_index = next_step_index(parent, Stage::Exploratory);
  child.inspiration_used = insp.id;
  child.created_by_event = std::move(created_by);
  return child;
}

RoundResult explore_round(llm::LlmGateway& gateway, const SearchTree& tree, const ResearchContext& context,
                          const InspirationCorpus& corpus, const ExploreConfig& cfg, IdGenerator& ids,
                          const EventId& created_by, std::optional<Stage> stage_of_active) {
  const auto& parent = tree.node(tree.active());
  const Stage stage = stage_of_active.value_or(parent.stage);
  if (stage != Stage::Exploratory)
    throw Error(Errc::StageMismatch, "active node " + parent.id.value + " is not in the exploratory stage");

  std::set<InspirationId> used;
  for (const auto& c : tree.children(parent.id)) {
    const auto& n = tree.node(c);
    if (n.inspiration_used) used.insert(*n.inspiration_used);
  }

  RoundResult out{tree, {}, select_inspirations(gateway, context, parent, corpus, cfg, used)};
  std::vector<NodeId> new_ids;
  for (std::size_t i = 0; i < out.selected.size(); ++i) new_ids.push_back(ids.next_node());

  const bool routed = parent.stage != Stage::Exploratory;
  std::vector<HypothesisNode> children;
  if (gateway.deterministic()) {
    for (std::size_t i = 0; i < out.selected.size(); ++i)
      children.push_back(expand_with_inspiration(gateway, context, parent, *corpus.find(out.selected[i]),
                                                 new_ids[i], created_by, routed));
  } else {
    std::vector<std::future<HypothesisNode>> pending;
    for (std::size_t i = 0; i < out.selected.size(); ++i)
      pending.push_back(std::async(std::launch::async, [&, i] {
        return expand_with_inspiration(gateway, context, parent, *corpus.find(out.selected[i]), new_ids[i],
                                       created_by, routed);
      }));
    for (auto& f : pending) children.push_back(f.get());
  }

  for (auto& c : children) {
    out.new_nodes.push_back(c.id);
    out.tree = attach_child(out.tree, parent.id, std::move(c));
  }
  return out;
}

}  // namespace moose::explore
