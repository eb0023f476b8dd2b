#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "testkit.hpp"

using namespace moose;
using namespace moose::llm;

namespace {

GenerationRequest refine_request() {
  return GenerationRequest::make(TemplateId::ProposeRefinement, {{"question", "Q"},
                                                                 {"context", "(none)"},
                                                                 {"hypothesis", "H"},
                                                                 {"level", "1"},
                                                                 {"level_descriptor", "d"}});
}

std::shared_ptr<ScriptedBackend> script(std::vector<std::string> texts) {
  std::vector<ScriptedBackend::Entry> entries;
  for (auto& t : texts) entries.push_back({std::nullopt, std::move(t)});
  return std::make_shared<ScriptedBackend>(std::move(entries));
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

class Flaky final : public Backend {
public:
  explicit Flaky(int failures, bool transport = true) : failures_(failures), transport_(transport) {}
  std::string name() const override { return "flaky"; }
  bool deterministic() const override { return true; }
  BackendReply generate(const std::string&, const GenerationRequest&) override {
    ++attempts;
    if (failures_-- > 0) {
      if (transport_) throw TransportError("reset");
      throw Error(Errc::BackendUnavailable, "down");
    }
    return {"ok", 3};
  }
  int attempts = 0;

private:
  int failures_;
  bool transport_;
};

}  // namespace

TEST(Templates, BuiltinsCoverEveryTemplate) {
  const auto set = TemplateSet::builtin();
  for (auto id : kAllTemplates) {
    EXPECT_FALSE(set.text(id).empty()) << to_string(id);
    EXPECT_EQ(template_from_string(to_string(id)), id);
  }
  EXPECT_EQ(set.variables(TemplateId::OracleRank), (std::set<std::string>{"ground_truth", "candidates"}));
  EXPECT_EQ(code_of([] { template_from_string("nope"); }), Errc::UnknownTemplate);
}

TEST(Templates, RenderSubstitutesAndReportsMissing) {
  const auto set = TemplateSet::builtin();
  auto req = refine_request();
  const auto text = set.render(req.template_id, req.variables);
  EXPECT_NE(text.find("Refinement level 1: d"), std::string::npos);
  EXPECT_EQ(text.find('{'), std::string::npos);
  req.variables.erase("hypothesis");
  EXPECT_EQ(code_of([&] { set.render(req.template_id, req.variables); }), Errc::TemplateVariableMissing);
}

TEST(Templates, DirectoryOverridesBuiltin) {
  const auto dir = std::filesystem::temp_directory_path() / "moose_tpl_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "oracle_rank.txt") << "Rank {candidates} vs {ground_truth}";
  const auto set = TemplateSet::load_dir(dir);
  EXPECT_EQ(set.render(TemplateId::OracleRank, {{"candidates", "c"}, {"ground_truth", "g"}}), "Rank c vs g");
  EXPECT_EQ(set.text(TemplateId::ScoreHypothesis), TemplateSet::builtin().text(TemplateId::ScoreHypothesis));
  std::filesystem::remove_all(dir);
}

TEST(Fields, ParseIsOrderInsensitive) {
  const auto m = parse_fields("«hypothesis»H«/hypothesis»«score»7«/score»", {"hypothesis", "score"});
  EXPECT_EQ(m.at("hypothesis"), "H");
  EXPECT_EQ(m.at("score"), "7");
  EXPECT_EQ(parse_fields("«score»7«/score» noise «hypothesis»H«/hypothesis»", {"hypothesis", "score"}), m);
  EXPECT_EQ(code_of([] { parse_fields("«hypothesis»H«/hypothesis»", {"hypothesis", "score"}); }), Errc::ParseFailure);
  try {
    parse_fields("raw text", {"x"});
  } catch (const ParseError& e) {
    EXPECT_EQ(e.raw(), "raw text");
  }
}

TEST(Fields, IdListSplitting) {
  EXPECT_EQ(split_id_list(" \"i7\", [i2]; i7.\n i9 "), (std::vector<std::string>{"i7", "i2", "i7", "i9"}));
  EXPECT_TRUE(split_id_list("  ").empty());
}

TEST(Scripted, SingleEntryThenExhausted) {
  LlmGateway gw(script({"A"}));
  const auto r = gw.complete(refine_request());
  EXPECT_EQ(r.text, "A");
  EXPECT_EQ(r.call_index, 1u);
  EXPECT_EQ(code_of([&] { gw.complete(refine_request()); }), Errc::ScriptExhausted);
}

TEST(Scripted, MatchesTemplateBeforeWildcardOrder) {
  auto backend = std::make_shared<ScriptedBackend>(ScriptedBackend::parse(
      "{\"template\": \"score_hypothesis\", \"text\": \"S\"}\n\n{\"template\": \"*\", \"text\": \"W\"}\n"
      "{\"template\": \"propose_refinement\", \"text\": \"P\"}\n"));
  LlmGateway gw(backend);
  EXPECT_EQ(gw.complete(refine_request()).text, "W");  // first unconsumed entry usable by this template
  EXPECT_EQ(gw.complete(refine_request()).text, "P");
  EXPECT_EQ(backend->remaining(), 1u);
  EXPECT_EQ(backend->prompts().size(), 2u);
  EXPECT_EQ(code_of([] { ScriptedBackend::parse("{\"template\": \"bogus\", \"text\": \"x\"}"); }), Errc::UnknownTemplate);
}

TEST(Gateway, RequestValidation) {
  LlmGateway gw(script({"A", "B"}));
  auto r = refine_request();
  r.temperature = 2.5;
  EXPECT_EQ(code_of([&] { gw.complete(r); }), Errc::InvalidConfig);
  r = refine_request();
  r.max_tokens = 0;
  EXPECT_EQ(code_of([&] { gw.complete(r); }), Errc::InvalidConfig);
  EXPECT_EQ(gw.total_calls(), 0u);
}

TEST(Gateway, RetriesTransportErrors) {
  auto flaky = std::make_shared<Flaky>(2);
  LlmGateway gw(flaky, TemplateSet::builtin(), testkit::fast_gateway());
  EXPECT_EQ(gw.complete(refine_request()).text, "ok");
  EXPECT_EQ(flaky->attempts, 3);
  EXPECT_EQ(gw.total_calls(), 1u);  // retries are not separate calls
  EXPECT_EQ(gw.calls(TemplateId::ProposeRefinement), 1u);
  EXPECT_EQ(gw.tokens_used(), 3u);

  auto dead = std::make_shared<Flaky>(5);
  LlmGateway gw2(dead, TemplateSet::builtin(), testkit::fast_gateway());
  EXPECT_EQ(code_of([&] { gw2.complete(refine_request()); }), Errc::BackendUnavailable);
  EXPECT_EQ(dead->attempts, 3);
}

TEST(Gateway, RepairCallsOnParseError) {
  LlmGateway gw(script({"garbage", "still garbage", "«x»1«/x»"}), TemplateSet::builtin(), testkit::fast_gateway());
  const auto v = gw.complete_with_repairs(refine_request(), [](const std::string& raw) {
    return parse_fields(raw, {"x"}).at("x");
  });
  EXPECT_EQ(v, "1");
  EXPECT_EQ(gw.total_calls(), 3u);

  LlmGateway gw2(script({"a", "b", "c", "«x»1«/x»"}), TemplateSet::builtin(), testkit::fast_gateway());
  EXPECT_EQ(code_of([&] {
              gw2.complete_with_repairs(refine_request(),
                                        [](const std::string& raw) { return parse_fields(raw, {"x"}); });
            }),
            Errc::ParseFailure);
  EXPECT_EQ(gw2.total_calls(), 3u);
}

TEST(Gateway, InFlightLimit) {
  std::atomic<int> live{0}, peak{0};
  auto slow = std::make_shared<testkit::FnBackend>([&](const GenerationRequest&) {
    const int now = ++live;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --live;
    return std::string("x");
  });
  auto opts = testkit::fast_gateway();
  opts.max_in_flight = 2;
  LlmGateway gw(slow, TemplateSet::builtin(), opts);
  std::vector<std::thread> ts;
  for (int i = 0; i < 8; ++i) ts.emplace_back([&] { gw.complete(refine_request()); });
  for (auto& t : ts) t.join();
  EXPECT_EQ(gw.total_calls(), 8u);
  EXPECT_LE(peak.load(), 2);
}

TEST(Gateway, TemperatureDefaults) {
  EXPECT_DOUBLE_EQ(GenerationRequest::make(TemplateId::GenerateHypothesis, {}).temperature, 1.0);
  EXPECT_LT(GenerationRequest::make(TemplateId::ScoreHypothesis, {}).temperature, 0.5);
}
