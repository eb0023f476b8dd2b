#include "moose/protocol/session.hpp"

#include <algorithm>

#include "moose/protocol/trace.hpp"

namespace moose::protocol {

namespace {

Json outcome_json(const refine::RefineOutcome& o) {
  Json trace = Json::array();
  for (const auto& t : o.per_level_trace)
    trace.push_back(Json{{"level", t.level}, {"best_average", t.best_average}, {"steps", t.steps}});
  return Json{{"final_node", o.final_node}, {"steps_used", o.steps_used}, {"per_level_trace", trace}};
}

ProtocolEvent make_event(IdGenerator& ids, EventKind kind, Json payload = Json::object()) {
  ProtocolEvent e;
  e.id = ids.next_event();
  e.kind = kind;
  e.payload = std::move(payload);
  e.timestamp = ids.timestamp();
  return e;
}

}  // namespace

Stage SessionState::effective_stage(const NodeId& node) const {
  auto it = routed_.find(node);
  return it != routed_.end() ? it->second : tree_.node(node).stage;
}

SessionState SessionState::shell(SessionId id, ResearchContext base, std::string corpus_ref) {
  base.validate();
  SessionState s;
  s.id_ = std::move(id);
  s.base_ = std::move(base);
  s.corpus_ref_ = std::move(corpus_ref);
  return s;
}

SessionState SessionState::apply(const ProtocolEvent& event) const {
  SessionState next = *this;
  const auto& p = event.payload;
  if (!events_.empty() && !(events_.back().id < event.id))
    throw Error(Errc::InvalidTrace, "event ids must strictly increase at " + event.id.value);
  if (events_.empty() != (event.kind == EventKind::Init))
    throw Error(Errc::InvalidTrace, "Init must be the first and only the first event");

  try {
    switch (event.kind) {
      case EventKind::Init:
        next.tree_ = new_tree(base_, p.at("root_id").get<NodeId>(), event.id);
        break;

      case EventKind::BlueprintSet: {
        if (events_.size() != 1) throw Error(Errc::BlueprintImmutable, "blueprint may only be set at init");
        if (!base_.blueprint || *base_.blueprint != p.at("text").get<std::string>())
          throw Error(Errc::InvalidTrace, "BlueprintSet disagrees with the base inputs");
        break;
      }

      case EventKind::ExploreRound: {
        const auto at = p.at("at").get<NodeId>();
        if (effective_stage(at) != Stage::Exploratory)
          throw Error(Errc::StageMismatch, "exploration at " + at.value + " outside the exploratory stage");
        for (const auto& nj : p.at("nodes")) {
          auto n = nj.get<HypothesisNode>();
          if (n.created_by_event != event.id || n.parent != at)
            throw Error(Errc::InvalidTrace, "explored node " + n.id.value + " does not belong to this round");
          next.tree_ = attach_child(next.tree_, at, std::move(n));
        }
        next.tree_ = next.tree_.with_active(at);
        break;
      }

      case EventKind::RefineRun: {
        const auto at = p.at("at").get<NodeId>();
        if (effective_stage(at) != Stage::FineGrained)
          throw Error(Errc::StageMismatch, "refinement at " + at.value + " before routing to FineGrained");
        for (const auto& nj : p.at("nodes")) {
          auto n = nj.get<HypothesisNode>();
          if (n.created_by_event != event.id || !n.parent || n.stage != Stage::FineGrained)
            throw Error(Errc::InvalidTrace, "refined node " + n.id.value + " does not belong to this run");
          const auto parent = *n.parent;
          next.tree_ = attach_child(next.tree_, parent, std::move(n));
        }
        next.tree_ = next.tree_.with_active(p.at("outcome").at("final_node").get<NodeId>());
        break;
      }

      case EventKind::FeedbackApplied: {
        const auto node = p.at("node").get<NodeId>();
        if (trim(p.at("text").get<std::string>()).empty()) throw Error(Errc::EmptyFeedback, "empty feedback");
        if (p.at("node_stage").get<Stage>() != effective_stage(node))
          throw Error(Errc::InvalidTrace, "feedback stage disagrees with node " + node.value);
        next.tree_ = next.tree_.with_active(node);
        break;
      }

      case EventKind::Routed: {
        const auto node = p.at("node").get<NodeId>();
        const auto target = p.at("target").get<Stage>();
        const auto from = effective_stage(node);
        if (target == from) throw Error(Errc::SameStageRoute, "node " + node.value + " is already " + std::string(to_string(from)));
        if (p.at("from").get<Stage>() != from) throw Error(Errc::InvalidTrace, "route source stage mismatch");
        next.routed_[node] = target;
        next.tree_ = next.tree_.with_active(node);
        break;
      }

      case EventKind::SelfRanked:
        for (const auto& r : p.at("ranking")) {
          const auto node = r.at("node").get<NodeId>();
          tree_.node(node);
          if (!r.at("scores").is_null()) next.tree_ = next.tree_.with_scores(node, r.at("scores").get<EvaluationScore>());
        }
        break;
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidTrace, std::string(to_string(event.kind)) + " payload: " + e.what());
  }

  next.events_.push_back(event);
  return next;
}

SessionState init_session(const std::string& question, const std::optional<std::string>& survey,
                          const std::optional<std::string>& blueprint, const InspirationCorpus& corpus,
                          IdGenerator& ids) {
  ResearchContext base{question, survey, blueprint, {}};
  if (base.blueprint && trim(*base.blueprint).empty()) base.blueprint.reset();
  base.validate();
  if (corpus.empty()) throw Error(Errc::CorpusInvalid, "corpus '" + corpus.name() + "' has no entries");

  auto s = SessionState::shell(ids.next_session(), base, corpus.name());
  auto init = make_event(ids, EventKind::Init);
  init.payload["root_id"] = ids.next_node();
  s = s.apply(init);
  if (base.blueprint) s = s.apply(make_event(ids, EventKind::BlueprintSet, Json{{"text", *base.blueprint}}));
  return s;
}

SessionState apply_feedback(const SessionState& session, const NodeId& node, const std::string& feedback,
                            IdGenerator& ids) {
  if (trim(feedback).empty()) throw Error(Errc::EmptyFeedback, "feedback text is blank");
  const Stage stage = session.effective_stage(node);  // throws UnknownNode
  return session.apply(
      make_event(ids, EventKind::FeedbackApplied, Json{{"node", node}, {"node_stage", stage}, {"text", feedback}}));
}

SessionState route(const SessionState& session, const NodeId& node, Stage target, IdGenerator& ids) {
  const Stage from = session.effective_stage(node);
  if (from == target)
    throw Error(Errc::SameStageRoute, "node " + node.value + " is already " + std::string(to_string(target)));
  return session.apply(make_event(ids, EventKind::Routed, Json{{"node", node}, {"from", from}, {"target", target}}));
}

ResearchContext context_for(const SessionState& session, const NodeId& node) {
  const auto& tree = session.tree();
  const auto& target = tree.node(node);
  ResearchContext ctx = session.base_context();
  for (const auto& e : session.events()) {
    if (e.kind != EventKind::FeedbackApplied) continue;
    const auto at = e.payload.at("node").get<NodeId>();
    const bool covers = at == node || (tree.is_ancestor(at, node) && e.id < target.created_by_event);
    if (!covers) continue;
    ctx.additions.push_back({ContextAddition::Kind::PriorHypothesis, tree.node(at).text, at});
    ctx.additions.push_back({ContextAddition::Kind::Feedback, e.payload.at("text").get<std::string>(), at});
  }
  return ctx;
}

ResearchContext refinement_context(const SessionState& session, const NodeId& node,
                                   const InspirationCorpus* corpus) {
  ResearchContext ctx = context_for(session, node);
  const auto& tree = session.tree();
  // The seed is the nearest ancestor-or-self that is an exploratory node.
  NodeId seed = node;
  while (tree.node(seed).stage == Stage::FineGrained && tree.node(seed).parent) seed = *tree.node(seed).parent;

  std::string summary;
  for (const auto& id : path_to_root(tree, seed)) {
    const auto& n = tree.node(id);
    if (!n.inspiration_used) continue;
    const Inspiration* insp = corpus ? corpus->find(*n.inspiration_used) : nullptr;
    summary += "\n- " + (insp ? insp->title : n.inspiration_used->value);
  }
  std::string text = summary.empty() ? "" : "Exploration path inspirations:" + summary + "\n";
  text += "Selected coarse hypothesis: " + tree.node(seed).text;
  ctx.additions.push_back({ContextAddition::Kind::PriorHypothesis, std::move(text), seed});
  return ctx;
}

ExploreStep explore(const SessionState& session, llm::LlmGateway& gateway, const InspirationCorpus& corpus,
                    const explore::ExploreConfig& cfg, IdGenerator& ids, std::optional<NodeId> at) {
  const NodeId where = at.value_or(session.tree().active());
  if (session.effective_stage(where) != Stage::Exploratory)
    throw Error(Errc::StageMismatch, "node " + where.value + " is not in the exploratory stage");

  const auto ctx = context_for(session, where);
  auto event = make_event(ids, EventKind::ExploreRound);
  auto round = explore::explore_round(gateway, session.tree().with_active(where), ctx, corpus, cfg, ids, event.id,
                                      Stage::Exploratory);
  Json nodes = Json::array();
  for (const auto& id : round.new_nodes) nodes.push_back(round.tree.node(id));
  event.payload = Json{{"at", where}, {"selected", round.selected}, {"nodes", nodes}};
  return ExploreStep{session.apply(event), round.new_nodes};
}

RefineStep refine(const SessionState& session, llm::LlmGateway& gateway, const refine::RefineConfig& cfg,
                  IdGenerator& ids, std::optional<NodeId> at, const InspirationCorpus* corpus) {
  const NodeId where = at.value_or(session.tree().active());
  if (session.effective_stage(where) != Stage::FineGrained)
    throw Error(Errc::StageMismatch, "node " + where.value + " has not been routed to FineGrained");
  cfg.validate();

  const auto ctx = refinement_context(session, where, corpus);
  auto event = make_event(ids, EventKind::RefineRun);
  RefineStep step{session, {}, {}, std::nullopt};
  refine::HierarchicalResult result;
  try {
    result = refine::refine_hierarchical(gateway, session.tree(), ctx, where, cfg, ids, event.id, &step.log);
  } catch (const refine::RefineError& e) {
    result = e.partial();
    step.error = Error(e.code(), e.what());
  }
  Json nodes = Json::array();
  for (const auto& id : result.accepted) nodes.push_back(result.tree.node(id));
  event.payload = Json{{"at", where},
                       {"start_score", result.start_score ? Json(*result.start_score) : Json(nullptr)},
                       {"outcome", outcome_json(result.outcome)},
                       {"nodes", nodes},
                       {"error", step.error ? Json(step.error->what()) : Json(nullptr)}};
  step.session = session.apply(event);
  step.outcome = result.outcome;
  return step;
}

RankStep self_rank(const SessionState& session, llm::LlmGateway& gateway, const std::vector<NodeId>& candidates,
                   IdGenerator& ids, const std::vector<std::string>& criteria) {
  if (candidates.empty()) throw Error(Errc::InvalidConfig, "self_rank needs at least one candidate");
  for (const auto& c : candidates) session.tree().node(c);

  std::vector<RankedEntry> ranking;
  for (const auto& c : candidates) {
    RankedEntry r{c, std::nullopt, {}};
    try {
      r.scores = refine::score_hypothesis(gateway, context_for(session, c), session.tree().node(c).text, criteria);
    } catch (const Error& e) {
      if (e.code() != Errc::ScoreUnavailable) throw;
      r.error = e.what();
    }
    ranking.push_back(std::move(r));
  }
  std::stable_sort(ranking.begin(), ranking.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.scores.has_value() != b.scores.has_value()) return a.scores.has_value();
    if (a.scores && a.scores->average != b.scores->average) return a.scores->average > b.scores->average;
    return a.node < b.node;
  });

  Json entries = Json::array();
  for (const auto& r : ranking)
    entries.push_back(Json{{"node", r.node},
                           {"scores", r.scores ? Json(*r.scores) : Json(nullptr)},
                           {"error", r.error.empty() ? Json(nullptr) : Json(r.error)}});
  return RankStep{session.apply(make_event(ids, EventKind::SelfRanked, Json{{"ranking", entries}})),
                  std::move(ranking)};
}

Json export_session(const SessionState& session) {
  return Json{{"session_id", session.id()},
              {"base", Json{{"context", session.base_context()}, {"corpus", session.corpus_ref()}}},
              {"events", session.events()},
              {"tree", export_tree(session.tree())},
              {"stage_of_active", session.stage_of_active()}};
}

std::string export_bytes(const SessionState& session) { return canonical_dump(export_session(session)); }

SessionState replay(const Json& exported) {
  try {
    auto s = SessionState::shell(exported.at("session_id").get<SessionId>(),
                                 exported.at("base").at("context").get<ResearchContext>(),
                                 exported.at("base").at("corpus").get<std::string>());
    for (const auto& ej : exported.at("events")) s = s.apply(ej.get<ProtocolEvent>());
    if (s.events().empty()) throw Error(Errc::CorruptSession, "session has no events");
    if (s.base_context().blueprint &&
        (s.events().size() < 2 || s.events()[1].kind != EventKind::BlueprintSet))
      throw Error(Errc::CorruptSession, "blueprint present without a BlueprintSet event");
    return s;
  } catch (const Json::exception& e) {
    throw Error(Errc::CorruptSession, e.what());
  }
}

SessionState restore(std::string_view bytes) {
  Json j;
  try {
    j = Json::parse(bytes);
  } catch (const Json::exception& e) {
    throw Error(Errc::CorruptSession, std::string("unparsable export: ") + e.what());
  }
  SessionState s;
  try {
    if (auto v = validate_trace(j.at("events").get<std::vector<ProtocolEvent>>()))
      throw Error(Errc::CorruptSession, "invalid trace at event " + std::to_string(v->index) + ": " + v->rule);
    s = replay(j);
  } catch (const Error& e) {
    if (e.code() == Errc::CorruptSession) throw;
    throw Error(Errc::CorruptSession, e.what());
  } catch (const Json::exception& e) {
    throw Error(Errc::CorruptSession, e.what());
  }
  if (export_bytes(s) != bytes) throw Error(Errc::CorruptSession, "replayed session differs from the stored export");
  return s;
}

}  // namespace moose::protocol
