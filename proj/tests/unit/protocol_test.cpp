#include <gtest/gtest.h>

#include "fuzz.hpp"
#include "moose/protocol/session.hpp"
#include "moose/protocol/trace.hpp"
#include "testkit.hpp"

using namespace moose;
using namespace moose::protocol;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Io;
}

struct World {
  IdGenerator ids = testkit::logical_ids();
  InspirationCorpus corpus = testkit::corpus();
  std::shared_ptr<llm::LlmGateway> gw = testkit::gateway_for(testkit::landscape_backend());
  explore::ExploreConfig ecfg;
  refine::RefineConfig rcfg;

  World() {
    rcfg.patience = 1;
    rcfg.proposals_per_step = 1;
  }

  SessionState fresh(std::optional<std::string> blueprint = std::nullopt) {
    return init_session("How can aryl halides be coupled with carboxylic acids?", std::string("survey text"),
                        blueprint, corpus, ids);
  }
  ExploreStep explore_at(const SessionState& s, std::optional<NodeId> at = std::nullopt) {
    return protocol::explore(s, *gw, corpus, ecfg, ids, at);
  }
  RefineStep refine_at(const SessionState& s, std::optional<NodeId> at = std::nullopt) {
    return protocol::refine(s, *gw, rcfg, ids, at, &corpus);
  }
};

std::vector<EventKind> kinds(const SessionState& s) {
  std::vector<EventKind> out;
  for (const auto& e : s.events()) out.push_back(e.kind);
  return out;
}

ProtocolEvent event(const std::string& id, EventKind k, Json payload) {
  return ProtocolEvent{EventId(id), k, std::move(payload), 0};
}

}  // namespace

TEST(Init, Contract) {
  World w;
  const auto s = w.fresh();
  EXPECT_EQ(kinds(s), std::vector<EventKind>{EventKind::Init});
  EXPECT_EQ(s.tree().size(), 1u);
  EXPECT_EQ(s.stage_of_active(), Stage::Exploratory);

  const auto b = w.fresh("blueprint-B");
  EXPECT_EQ(kinds(b), (std::vector<EventKind>{EventKind::Init, EventKind::BlueprintSet}));
  EXPECT_NE(b.tree().node(b.tree().root()).text.find("blueprint-B"), std::string::npos);
  EXPECT_EQ(code_of([&] { init_session("", std::nullopt, std::nullopt, w.corpus, w.ids); }), Errc::EmptyQuestion);
}

TEST(Feedback, AppendsPriorHypothesisAndCritique) {
  World w;
  auto s = w.explore_at(w.fresh()).session;
  const auto n = s.tree().children(s.tree().root())[0];
  s = apply_feedback(s, n, "consider ionic liquids", w.ids);
  auto add = context_for(s, n).additions;
  ASSERT_EQ(add.size(), 2u);
  EXPECT_EQ(add[0].kind, ContextAddition::Kind::PriorHypothesis);
  EXPECT_EQ(add[0].text, s.tree().node(n).text);
  EXPECT_EQ(add[1].kind, ContextAddition::Kind::Feedback);
  EXPECT_EQ(add[1].text, "consider ionic liquids");
  EXPECT_EQ(s.tree().active(), n);

  s = apply_feedback(s, n, "and lower temperature", w.ids);
  add = context_for(s, n).additions;
  ASSERT_EQ(add.size(), 4u);
  EXPECT_EQ(add[1].text, "consider ionic liquids");
  EXPECT_EQ(add[3].text, "and lower temperature");

  EXPECT_EQ(code_of([&] { apply_feedback(s, NodeId("nope"), "x", w.ids); }), Errc::UnknownNode);
  EXPECT_EQ(code_of([&] { apply_feedback(s, n, " ", w.ids); }), Errc::EmptyFeedback);
}

TEST(ContextFor, Scope) {
  World w;
  auto s = w.fresh();
  const auto root = s.tree().root();
  EXPECT_EQ(context_for(s, root), s.base_context());

  s = apply_feedback(s, root, "think about nickel", w.ids);
  s = w.explore_at(s, root).session;
  const auto kids = s.tree().children(root);
  ASSERT_EQ(kids.size(), 3u);
  const auto kid_ctx = context_for(s, kids[0]);
  ASSERT_EQ(kid_ctx.additions.size(), 2u);
  EXPECT_EQ(kid_ctx.additions[1].text, "think about nickel");

  s = apply_feedback(s, kids[0], "sibling-only", w.ids);
  for (const auto& a : context_for(s, kids[1]).additions) EXPECT_NE(a.text, "sibling-only");
  // feedback given after a child exists does not reach back into that child
  s = apply_feedback(s, root, "late note", w.ids);
  for (const auto& a : context_for(s, kids[1]).additions) EXPECT_NE(a.text, "late note");
}

TEST(Route, Rules) {
  World w;
  auto s = w.explore_at(w.fresh()).session;
  const auto leaf = s.tree().children(s.tree().root())[1];
  EXPECT_EQ(code_of([&] { w.refine_at(s, leaf); }), Errc::StageMismatch);
  EXPECT_EQ(code_of([&] { route(s, leaf, Stage::Exploratory, w.ids); }), Errc::SameStageRoute);

  s = route(s, leaf, Stage::FineGrained, w.ids);
  EXPECT_EQ(s.stage_of_active(), Stage::FineGrained);
  auto r = w.refine_at(s);
  ASSERT_FALSE(r.error);
  EXPECT_EQ(kinds(r.session).back(), EventKind::RefineRun);
  const auto fine = r.session.tree().children(leaf);
  ASSERT_FALSE(fine.empty());
  EXPECT_EQ(r.session.tree().node(fine[0]).stage, Stage::FineGrained);
  EXPECT_EQ(r.session.tree().node(fine[0]).step_index, 1u);

  // back to exploration from a fine-grained node: exploratory children restart at step 1
  const auto fg = r.outcome.final_node;
  auto back = route(r.session, fg, Stage::Exploratory, w.ids);
  EXPECT_EQ(code_of([&] { protocol::explore(r.session, *w.gw, w.corpus, w.ecfg, w.ids, fg); }), Errc::StageMismatch);
  auto e = w.explore_at(back, fg);
  ASSERT_EQ(e.new_nodes.size(), 3u);
  for (const auto& n : e.new_nodes) {
    EXPECT_EQ(e.session.tree().node(n).stage, Stage::Exploratory);
    EXPECT_EQ(e.session.tree().node(n).step_index, 1u);
    EXPECT_EQ(*e.session.tree().node(n).parent, fg);
  }
  EXPECT_FALSE(validate_trace(e.session.events()));
}

TEST(SelfRank, OrderAndTies) {
  World w;
  auto s = w.explore_at(w.fresh()).session;
  const auto kids = s.tree().children(s.tree().root());
  // scripted averages: kids[0] 6.0, kids[1] 7.5
  auto gw = testkit::gateway_for(std::make_shared<llm::ScriptedBackend>(std::vector<llm::ScriptedBackend::Entry>{
      {std::nullopt, testkit::score_fields(6.0)}, {std::nullopt, testkit::score_fields(7.5)},
      {std::nullopt, testkit::score_fields(5)}, {std::nullopt, testkit::score_fields(5)},
      {std::nullopt, testkit::score_fields(4)}, {std::nullopt, "«novelty»12«/novelty»"},
      {std::nullopt, "no fields"}, {std::nullopt, "still none"}, {std::nullopt, testkit::score_fields(1)}}));
  auto r = self_rank(s, *gw, {kids[0], kids[1]}, w.ids);
  ASSERT_EQ(r.ranking.size(), 2u);
  EXPECT_EQ(r.ranking[0].node, kids[1]);
  EXPECT_EQ(kinds(r.session).back(), EventKind::SelfRanked);
  EXPECT_DOUBLE_EQ(r.session.tree().node(kids[1]).scores->average, 7.5);

  auto tie = self_rank(s, *gw, {kids[1], kids[0]}, w.ids);
  EXPECT_EQ(tie.ranking[0].node, kids[0]);  // equal averages: id order

  auto single = self_rank(s, *gw, {kids[2]}, w.ids);
  EXPECT_EQ(single.ranking[0].node, kids[2]);

  // an unavailable score sorts last
  auto failing = self_rank(s, *gw, {kids[0], kids[1]}, w.ids);
  EXPECT_EQ(failing.ranking[0].node, kids[1]);
  EXPECT_FALSE(failing.ranking[1].scores);
  EXPECT_FALSE(failing.ranking[1].error.empty());
}

TEST(Trace, SpecExamples) {
  World w;
  auto s = w.explore_at(w.fresh()).session;
  const auto leaf = s.tree().children(s.tree().root())[0];
  s = route(s, leaf, Stage::FineGrained, w.ids);
  auto r = w.refine_at(s);
  s = r.session;
  EXPECT_FALSE(validate_trace(s.events()));  // Init, ExploreRound, Routed, RefineRun

  s = apply_feedback(s, r.outcome.final_node, "tighten conditions", w.ids);
  s = w.refine_at(s, r.outcome.final_node).session;
  const auto fg = s.tree().active();
  s = route(s, fg, Stage::Exploratory, w.ids);
  s = w.explore_at(s, fg).session;
  EXPECT_EQ(kinds(s), (std::vector<EventKind>{EventKind::Init, EventKind::ExploreRound, EventKind::Routed,
                                              EventKind::RefineRun, EventKind::FeedbackApplied, EventKind::RefineRun,
                                              EventKind::Routed, EventKind::ExploreRound}));
  EXPECT_FALSE(validate_trace(s.events()));

  // [Init, RefineRun]
  const auto root = w.fresh();
  std::vector<ProtocolEvent> bad = root.events();
  bad.push_back(event("e9999999999999-999999", EventKind::RefineRun,
                      Json{{"at", root.tree().root()}, {"nodes", Json::array()}, {"outcome", Json{{"final_node", root.tree().root()}}}}));
  auto v = validate_trace(bad);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->index, 1u);
}

TEST(Trace, HandCraftedViolations) {
  World w;
  auto s = w.explore_at(w.fresh()).session;
  const auto leaf = s.tree().children(s.tree().root())[0];
  auto routed = route(s, leaf, Stage::FineGrained, w.ids);
  auto refined = w.refine_at(routed).session;

  // refine before route: drop the Routed event
  auto events = refined.events();
  events.erase(events.begin() + 2);
  auto v = validate_trace(events);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->index, 2u);

  // same-stage route
  events = s.events();
  events.push_back(event("e9999999999999-999999", EventKind::Routed,
                         Json{{"node", leaf}, {"from", Stage::Exploratory}, {"target", Stage::Exploratory}}));
  v = validate_trace(events);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->index, 2u);

  // feedback on a node the log never created
  events = s.events();
  events.push_back(event("e9999999999999-999999", EventKind::FeedbackApplied,
                         Json{{"node", "n-ghost"}, {"node_stage", Stage::Exploratory}, {"text", "x"}}));
  v = validate_trace(events);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->index, 2u);

  // non-increasing ids and a misplaced Init
  events = s.events();
  events.push_back(events.back());
  EXPECT_TRUE(validate_trace(events));
  events = s.events();
  events.push_back(events.front());
  EXPECT_TRUE(validate_trace(events));
}

TEST(Persistence, RoundTripAndTamper) {
  World w;
  auto s = w.explore_at(w.fresh("blueprint")).session;
  const auto leaf = s.tree().children(s.tree().root())[2];
  s = apply_feedback(s, leaf, "be specific", w.ids);
  s = route(s, leaf, Stage::FineGrained, w.ids);
  s = w.refine_at(s).session;

  const auto bytes = export_bytes(s);
  const auto back = restore(bytes);
  EXPECT_EQ(export_bytes(back), bytes);
  EXPECT_EQ(back.tree(), s.tree());

  auto doc = Json::parse(bytes);
  doc["tree"]["nodes"][1]["text"] = "something else";
  EXPECT_EQ(code_of([&] { restore(canonical_dump(doc)); }), Errc::CorruptSession);

  doc = Json::parse(bytes);
  doc["tree"]["active"] = doc["tree"]["root"];
  EXPECT_EQ(code_of([&] { restore(canonical_dump(doc)); }), Errc::CorruptSession);

  doc = Json::parse(bytes);
  doc["events"].erase(doc["events"].begin() + 4);  // the Routed event
  EXPECT_EQ(code_of([&] { restore(canonical_dump(doc)); }), Errc::CorruptSession);

  EXPECT_EQ(code_of([&] { restore("{not json"); }), Errc::CorruptSession);
}

TEST(Persistence, ScriptedRunsAreByteIdentical) {
  auto run = [] {
    World w;
    auto s = w.explore_at(w.fresh()).session;
    s = route(s, s.tree().children(s.tree().root())[0], Stage::FineGrained, w.ids);
    return export_bytes(w.refine_at(s).session);
  };
  EXPECT_EQ(run(), run());
}

TEST(ProtocolFuzz, RandomSequencesFollowTheModel) {
  const auto st = testkit::fuzz_protocol(200, 7);
  EXPECT_EQ(st.failures, 0u) << st.first_failure;
  EXPECT_GT(st.accepted_actions, 200u);
  EXPECT_GT(st.rejected_actions, 20u);
}
