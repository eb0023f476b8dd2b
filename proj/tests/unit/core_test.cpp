#include <gtest/gtest.h>

#include <functional>

#include "moose/core/digest.hpp"
#include "moose/core/json.hpp"
#include "moose/core/text.hpp"
#include "moose/core/tree.hpp"
#include "testkit.hpp"

using namespace moose;

namespace {

ResearchContext ctx(std::string q, std::optional<std::string> blueprint = std::nullopt) {
  ResearchContext c;
  c.question = std::move(q);
  c.blueprint = std::move(blueprint);
  return c;
}

HypothesisNode explorer(const std::string& id, std::uint32_t step, const std::string& insp = "i1") {
  HypothesisNode n;
  n.id = NodeId(id);
  n.stage = Stage::Exploratory;
  n.text = "h-" + id;
  n.step_index = step;
  n.inspiration_used = InspirationId(insp);
  n.created_by_event = EventId("e1");
  return n;
}

HypothesisNode refiner(const std::string& id, std::uint32_t step, std::uint32_t level = 0) {
  HypothesisNode n;
  n.id = NodeId(id);
  n.stage = Stage::FineGrained;
  n.text = "r-" + id;
  n.step_index = step;
  n.abstraction_level = level;
  n.created_by_event = EventId("e1");
  return n;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Io;
}

}  // namespace

TEST(Ids, FormatSortsInIssueOrder) {
  auto ids = testkit::logical_ids(1'700'000'000'000);
  const auto a = ids.next_node();
  const auto b = ids.next_node();
  EXPECT_EQ(a.value, "n1700000000000-000000");
  EXPECT_LT(a, b);
  EXPECT_EQ(ids.next_event().value.substr(0, 1), "e");
}

TEST(Ids, ClockGoingBackwardsStillSorts) {
  struct Backwards : Clock {
    std::int64_t t = 5000;
    std::int64_t now_ms() override { return t -= 10; }
  };
  IdGenerator ids(std::make_shared<Backwards>());
  auto prev = ids.next_node();
  for (int i = 0; i < 50; ++i) {
    auto next = ids.next_node();
    EXPECT_LT(prev, next);
    prev = next;
  }
}

TEST(Ids, ObserveResumesAfterIssuedIds) {
  auto ids = testkit::logical_ids(10);
  ids.observe("n1800000000000-000041");
  const auto n = ids.next_node();
  EXPECT_GT(n, NodeId("n1800000000000-000041"));
  EXPECT_EQ(n.value.substr(n.value.size() - 6), "000042");
}

TEST(Types, ContextValidation) {
  EXPECT_NO_THROW(ctx("Q").validate());
  EXPECT_EQ(code_of([] { ctx("  ").validate(); }), Errc::EmptyQuestion);
}

TEST(Types, ScoreAverageAndRange) {
  const auto s = EvaluationScore::from_criteria({{"plausibility", 8}, {"novelty", 6}, {"specificity", 4}, {"feasibility", 6}});
  EXPECT_DOUBLE_EQ(s.average, 6.0);
  EXPECT_TRUE(s.consistent());
  EXPECT_EQ(code_of([] { EvaluationScore::from_criteria({{"novelty", 11}}); }), Errc::InvalidScore);
  EXPECT_EQ(code_of([] { EvaluationScore::from_criteria({{"novelty", -0.5}}); }), Errc::InvalidScore);
  EXPECT_EQ(code_of([] { EvaluationScore::from_criteria({}); }), Errc::InvalidScore);
  auto bad = s;
  bad.average = 7.0;
  EXPECT_FALSE(bad.consistent());
}

TEST(Types, CorpusRejectsDuplicatesAndEmptyTitles) {
  EXPECT_EQ(code_of([] { InspirationCorpus("c", {{InspirationId("a"), "t", ""}, {InspirationId("a"), "u", ""}}); }),
            Errc::CorpusInvalid);
  EXPECT_EQ(code_of([] { InspirationCorpus("c", {{InspirationId("a"), " ", ""}}); }), Errc::CorpusInvalid);
  InspirationCorpus c("c", {{InspirationId("a"), "t", "x"}});
  ASSERT_NE(c.find(InspirationId("a")), nullptr);
  EXPECT_EQ(c.find(InspirationId("b")), nullptr);
}

TEST(Tree, NewTreeContract) {
  const auto t = new_tree(ctx("Q"), NodeId("n0"), EventId("e0"));
  EXPECT_EQ(t.size(), 1u);
  const auto& root = t.node(t.root());
  EXPECT_EQ(root.step_index, 0u);
  EXPECT_EQ(root.stage, Stage::Exploratory);
  EXPECT_EQ(t.active(), t.root());
  EXPECT_EQ(code_of([] { new_tree(ctx("  "), NodeId("n0"), EventId("e0")); }), Errc::EmptyQuestion);

  const auto b = new_tree(ctx("Q", "focus on electrocatalysis"), NodeId("n0"), EventId("e0"));
  const auto& text = b.node(b.root()).text;
  EXPECT_NE(text.find("Q"), std::string::npos);
  EXPECT_NE(text.find("focus on electrocatalysis"), std::string::npos);
}

TEST(Tree, AttachChildRules) {
  const auto t = new_tree(ctx("Q"), NodeId("n0"), EventId("e0"));
  const auto t1 = attach_child(t, NodeId("n0"), explorer("n1", 1));
  EXPECT_EQ(t1.size(), 2u);
  EXPECT_EQ(*t1.node(NodeId("n1")).parent, NodeId("n0"));

  EXPECT_EQ(code_of([&] { attach_child(t1, NodeId("n1"), explorer("n2", 3)); }), Errc::StepIndexViolation);
  // a stage transition restarts the index at 1
  EXPECT_NO_THROW(attach_child(t1, NodeId("n1"), refiner("n2", 1, 0)));
  EXPECT_EQ(code_of([&] { attach_child(t1, NodeId("n1"), refiner("n2", 2, 0)); }), Errc::StepIndexViolation);
  EXPECT_EQ(code_of([&] { attach_child(t1, NodeId("nx"), explorer("n2", 1)); }), Errc::UnknownParent);
  EXPECT_EQ(code_of([&] { attach_child(t1, NodeId("n0"), explorer("n1", 1)); }), Errc::DuplicateNode);

  auto no_insp = explorer("n2", 2);
  no_insp.inspiration_used.reset();
  EXPECT_EQ(code_of([&] { attach_child(t1, NodeId("n1"), no_insp); }), Errc::StageFieldViolation);
  auto no_level = refiner("n2", 1);
  no_level.abstraction_level.reset();
  EXPECT_EQ(code_of([&] { attach_child(t1, NodeId("n1"), no_level); }), Errc::StageFieldViolation);

  auto bad_score = explorer("n2", 2);
  bad_score.scores = EvaluationScore{{{"novelty", 5.0}}, 9.0};
  EXPECT_EQ(code_of([&] { attach_child(t1, NodeId("n1"), bad_score); }), Errc::InvalidScore);
}

TEST(Tree, PathToRoot) {
  auto t = new_tree(ctx("Q"), NodeId("n0"), EventId("e0"));
  EXPECT_EQ(path_to_root(t, NodeId("n0")), std::vector<NodeId>{NodeId("n0")});
  t = attach_child(t, NodeId("n0"), explorer("n1", 1));
  t = attach_child(t, NodeId("n1"), explorer("n2", 2));
  t = attach_child(t, NodeId("n2"), explorer("n3", 3));
  EXPECT_EQ(path_to_root(t, NodeId("n3")),
            (std::vector<NodeId>{NodeId("n0"), NodeId("n1"), NodeId("n2"), NodeId("n3")}));
  EXPECT_EQ(code_of([&] { path_to_root(t, NodeId("zz")); }), Errc::UnknownNode);
}

// Every tree shape with up to 6 nodes, every stage assignment: structural queries agree with a
// direct reading of the parent array.
TEST(TreeProperty, ExhaustiveSmallTrees) {
  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<std::size_t> parent(n, 0);
    std::function<void(std::size_t)> shapes = [&](std::size_t i) {
      if (i == n) {
        for (unsigned mask = 0; mask < (1u << n); mask += 2) {  // root is always exploratory
          std::vector<Stage> stage(n);
          std::vector<std::uint32_t> step(n, 0);
          for (std::size_t k = 0; k < n; ++k) stage[k] = (mask >> k) & 1 ? Stage::FineGrained : Stage::Exploratory;
          auto id = [](std::size_t k) { return NodeId("n" + std::to_string(k)); };
          auto t = new_tree(ctx("Q"), id(0), EventId("e0"));
          for (std::size_t k = 1; k < n; ++k) {
            step[k] = stage[k] == stage[parent[k]] ? step[parent[k]] + 1 : 1;
            auto node = stage[k] == Stage::Exploratory ? explorer(id(k).value, step[k]) : refiner(id(k).value, step[k]);
            t = attach_child(t, id(parent[k]), node);
          }
          ASSERT_TRUE(t.well_formed());
          ASSERT_EQ(t.size(), n);
          for (std::size_t k = 0; k < n; ++k) {
            // path from a direct walk of the parent array
            std::vector<NodeId> expect;
            for (std::size_t c = k;; c = parent[c]) {
              expect.insert(expect.begin(), id(c));
              if (c == 0) break;
            }
            ASSERT_EQ(path_to_root(t, id(k)), expect);
            bool has_child = false;
            for (std::size_t c = 1; c < n; ++c) has_child |= parent[c] == k;
            const auto leaves = t.leaves();
            ASSERT_EQ(std::find(leaves.begin(), leaves.end(), id(k)) == leaves.end(), has_child);
            for (std::size_t a = 0; a < n; ++a) {
              const bool on_path = std::find(expect.begin(), expect.end() - 1, id(a)) != expect.end() - 1;
              ASSERT_EQ(t.is_ancestor(id(a), id(k)), on_path) << a << "->" << k;
            }
            ASSERT_EQ(t.node(id(k)).step_index, step[k]);
          }
          ++checked;
        }
        return;
      }
      for (std::size_t p = 0; p < i; ++p) {
        parent[i] = p;
        shapes(i + 1);
      }
    };
    shapes(1);
  }
  EXPECT_EQ(checked, 1u + 2u + 2u * 4u + 6u * 8u + 24u * 16u + 120u * 32u);
}

TEST(Json, NodeAndTreeRoundTrip) {
  auto t = new_tree(ctx("Q", "B"), NodeId("n0"), EventId("e0"));
  auto child = refiner("n1", 1, 2);
  child.scores = EvaluationScore::from_criteria({{"novelty", 7}, {"feasibility", 8}});
  t = attach_child(t, NodeId("n0"), child);
  const Json j = t.node(NodeId("n1"));
  EXPECT_EQ(j.get<HypothesisNode>(), t.node(NodeId("n1")));
  const auto doc = export_tree(t);
  EXPECT_EQ(doc.at("nodes").size(), 2u);
  EXPECT_EQ(doc.at("root"), "n0");
  EXPECT_EQ(canonical_dump(doc).back(), '\n');

  ResearchContext c = ctx("Q", "B");
  c.survey = "S";
  c = c.with({ContextAddition::Kind::Feedback, "f", NodeId("n1")});
  EXPECT_EQ(Json(c).get<ResearchContext>(), c);
}

TEST(Text, TokenizeAndNormalize) {
  const auto toks = text::tokenize("Pd-catalysed, C–H  activation!");
  ASSERT_GE(toks.size(), 4u);
  EXPECT_EQ(toks[0].text, "pd");
  EXPECT_EQ(toks[0].begin, 0u);
  EXPECT_EQ(text::normalize("  Hello,   WORLD!! "), "hello world");
  EXPECT_TRUE(text::is_stopword("the"));
  EXPECT_FALSE(text::is_stopword("catalyst"));
  EXPECT_EQ(text::content_tokens("the catalyst and the catalyst"), (std::set<std::string>{"catalyst"}));
}

TEST(Text, AgreesWithOracleTokenizer) {
  for (const std::string s : {"a-b c", "Ünïcode wörds, 42x", "", "...", "Blue-Light Irradiation", "copper(I) salts"})
    EXPECT_EQ(text::words(s), testkit::oracle_words(s)) << s;
}

TEST(Digest, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
