#include "moose/eval/pipeline.hpp"

#include <algorithm>

#include "moose/core/digest.hpp"
#include "moose/eval/recall.hpp"

namespace moose::eval {

namespace {

constexpr const char* kExplore = "Explore";
constexpr const char* kRefine = "Refine";
constexpr const char* kFeedback = "Feedback";
constexpr const char* kBlueprint = "Blueprint";
constexpr const char* kSelfRank = "SelfRank";
constexpr const char* kOracleRank = "OracleRank";
constexpr const char* kRouteCE = "Route(C→E)";
constexpr const char* kRouteEC = "Route(E→C)";

PipelineRow row(std::string name, std::string description, bool blueprint, Ranking ranking, std::size_t rounds,
                FeedbackStrength strength, bool refine, bool explore = true) {
  return PipelineRow{PipelineSpec{std::move(name), blueprint, ranking, rounds, strength, refine, explore},
                     std::move(description)};
}

// Splits on " + " outside brackets.
std::vector<std::string> split_top(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(' || s[i] == '[') ++depth;
    if (s[i] == ')' || s[i] == ']') --depth;
    if (depth == 0 && s.compare(i, 3, " + ") == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 3;
      i += 2;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

struct Interpreter {
  std::size_t explore_rounds;
  Stage stage = Stage::Exploratory;
  bool blueprint = false;
  std::vector<std::string> seq;

  void term(const std::string& t) {
    if (t.empty()) return;
    if (t.front() == '[') {
      const auto close = t.rfind(']');
      const auto times = std::stoul(t.substr(close + 2));  // "]xN"
      for (unsigned long k = 0; k < times; ++k)
        for (const auto& inner : split_top(std::string_view(t).substr(1, close - 1))) term(inner);
      return;
    }
    if (t.front() == '(') {
      for (const auto& inner : split_top(std::string_view(t).substr(1, t.size() - 2))) term(inner);
      return;
    }
    if (t == "MC") {
      if (stage != Stage::Exploratory) {
        seq.emplace_back(kRouteEC);
        stage = Stage::Exploratory;
      }
      for (std::size_t r = 0; r < explore_rounds; ++r) seq.emplace_back(kExplore);
    } else if (t == "MC2") {
      if (stage != Stage::FineGrained) {
        seq.emplace_back(kRouteCE);
        stage = Stage::FineGrained;
      }
      seq.emplace_back(kRefine);
    } else if (t == "initial blueprint") {
      blueprint = true;
    } else if (t == "self-ranking") {
      seq.emplace_back(kSelfRank);
    } else if (t == "oracle-ranking" || t == "oracle ranking") {
      seq.emplace_back(kOracleRank);
    } else if (t == "feedback" || t == "soft feedback" || t == "strong feedback") {
      seq.emplace_back(kFeedback);
    } else {
      throw Error(Errc::UnknownPipeline, "unrecognised composition term '" + t + "'");
    }
  }
};

std::vector<NodeId> stage_leaves(const protocol::SessionState& s, Stage stage) {
  std::vector<NodeId> out;
  for (const auto& id : s.tree().leaves())
    if (s.tree().node(id).stage == stage) out.push_back(id);
  return out;
}

std::vector<Candidate> candidates_of(const protocol::SessionState& s, const std::vector<NodeId>& ids) {
  std::vector<Candidate> out;
  for (const auto& id : ids) out.emplace_back(id, s.tree().node(id).text);
  return out;
}

}  // namespace

std::string_view to_string(Ranking r) noexcept {
  switch (r) {
    case Ranking::None: return "none";
    case Ranking::SelfRank: return "self";
    case Ranking::OracleRank: return "oracle";
  }
  return "?";
}

void PipelineSpec::validate() const {
  if (name.empty()) throw Error(Errc::InvalidConfig, "pipeline needs a name");
  if (!run_exploration && !run_refinement) throw Error(Errc::InvalidConfig, name + ": nothing to run");
  if (!run_exploration && ranking != Ranking::None)
    throw Error(Errc::InvalidConfig, name + ": ranking needs exploration output");
}

const std::vector<PipelineRow>& benchmark_pipelines() {
  using FS = FeedbackStrength;
  static const std::vector<PipelineRow> rows = [] {
    std::vector<PipelineRow> r;
    r.push_back(row("baseline_MC", "MC", false, Ranking::None, 0, FS::Standard, false));
    r.push_back(row("baseline_MC2", "MC2", false, Ranking::None, 0, FS::Standard, true, false));
    r.push_back(row("MC_with_hint", "MC + initial blueprint", true, Ranking::None, 0, FS::Standard, false));
    r.push_back(row("MC_with_soft_feedback_with_hint",
                    "MC + initial blueprint + (oracle ranking + soft feedback) + MC", true, Ranking::OracleRank, 1,
                    FS::Soft, false));
    r.push_back(row("MC_with_feedback_with_hint", "MC + initial blueprint + (oracle ranking + feedback) + MC", true,
                    Ranking::OracleRank, 1, FS::Standard, false));
    r.push_back(row("MC2_with_MC_input_self_rank", "MC + initial blueprint + (self-ranking) + MC2", true,
                    Ranking::SelfRank, 0, FS::Standard, true));
    r.push_back(row("MC2_with_MC_input_oracle_rank", "MC + initial blueprint + (oracle-ranking) + MC2", true,
                    Ranking::OracleRank, 0, FS::Standard, true));
    const char* suffix[] = {"", "_x2", "_x3", "_x4"};
    for (std::size_t k = 1; k <= 4; ++k)
      r.push_back(row("MC2_with_feedback" + std::string(suffix[k - 1]) + "_oracle_rank",
                      "MC + initial blueprint + (oracle-ranking) + MC2 + [(oracle ranking + feedback) + MC2]x" +
                          std::to_string(k),
                      true, Ranking::OracleRank, k, FS::Standard, true));
    for (std::size_t k = 1; k <= 4; ++k)
      r.push_back(row("MC2_with_strong_feedback" + std::string(suffix[k - 1]) + "_oracle_rank",
                      "MC + initial blueprint + (oracle-ranking) + MC2 + [(oracle ranking + strong feedback) + MC2]x" +
                          std::to_string(k),
                      true, Ranking::OracleRank, k, FS::Strong, true));
    return r;
  }();
  return rows;
}

const PipelineRow& find_pipeline(std::string_view name) {
  for (const auto& r : benchmark_pipelines())
    if (r.spec.name == name) return r;
  throw Error(Errc::UnknownPipeline, "no pipeline named '" + std::string(name) + "'");
}

std::vector<std::string> reference_stage_sequence(std::string_view description, std::size_t explore_rounds) {
  Interpreter in{explore_rounds, Stage::Exploratory, false, {}};
  for (const auto& t : split_top(description)) in.term(t);
  if (in.blueprint) in.seq.insert(in.seq.begin(), kBlueprint);
  return in.seq;
}

std::string derive_blueprint(const GroundTruthEntry& entry) {
  std::string out = trim(entry.question);
  const std::string survey = trim(entry.survey);
  std::size_t pos = 0;
  for (int sentences = 0; sentences < 2 && pos < survey.size(); ++sentences) {
    std::size_t end = pos;
    while (end < survey.size()) {
      const char c = survey[end++];
      if ((c == '.' || c == '!' || c == '?') && (end == survey.size() || std::isspace(static_cast<unsigned char>(survey[end]))))
        break;
    }
    out += " " + trim(std::string_view(survey).substr(pos, end - pos));
    pos = end;
  }
  return trim(out);
}

std::vector<std::string> session_stage_labels(const protocol::SessionState& session) {
  using protocol::EventKind;
  std::vector<std::string> out;
  for (const auto& e : session.events()) {
    switch (e.kind) {
      case EventKind::Init: break;
      case EventKind::BlueprintSet: out.emplace_back(kBlueprint); break;
      case EventKind::ExploreRound: out.emplace_back(kExplore); break;
      case EventKind::RefineRun: out.emplace_back(kRefine); break;
      case EventKind::FeedbackApplied: out.emplace_back(kFeedback); break;
      case EventKind::SelfRanked: out.emplace_back(kSelfRank); break;
      case EventKind::Routed:
        out.emplace_back(e.payload.at("target").get<Stage>() == Stage::FineGrained ? kRouteCE : kRouteEC);
        break;
    }
  }
  return out;
}

void to_json(Json& j, const RunReport& r) {
  j = Json{{"entry_id", r.entry_id},
           {"pipeline", r.pipeline},
           {"recall", r.recall},
           {"search_steps", r.search_steps},
           {"total_refinement_steps", r.total_refinement_steps},
           {"stage_sequence", r.stage_sequence},
           {"session_digest", r.session_digest},
           {"final_node", r.final_node},
           {"final_hypothesis", r.final_hypothesis},
           {"complete", r.complete},
           {"error", r.error}};
}

void from_json(const Json& j, RunReport& r) {
  r.entry_id = j.at("entry_id").get<std::string>();
  r.pipeline = j.at("pipeline").get<std::string>();
  r.recall = j.at("recall").get<double>();
  r.search_steps = j.at("search_steps").get<std::size_t>();
  r.total_refinement_steps = j.value("total_refinement_steps", r.search_steps);
  r.stage_sequence = j.at("stage_sequence").get<std::vector<std::string>>();
  r.session_digest = j.value("session_digest", std::string{});
  r.final_node = j.value("final_node", std::string{});
  r.final_hypothesis = j.value("final_hypothesis", std::string{});
  r.complete = j.value("complete", true);
  r.error = j.value("error", std::string{});
}

RunResult run_pipeline(const PipelineSpec& spec, const GroundTruthEntry& entry, const InspirationCorpus& corpus,
                       const PipelineConfigs& configs, llm::LlmGateway& gateway, IdGenerator& ids) {
  spec.validate();
  RunResult out;
  auto& report = out.report;
  report.entry_id = entry.id;
  report.pipeline = spec.name;

  const auto propose_calls = [&] { return gateway.calls(llm::TemplateId::ProposeRefinement); };
  const auto calls_at_start = propose_calls();
  std::optional<protocol::SessionState> session;
  NodeId final_node;

  // Runs `explore_rounds` exploration rounds, each at the previous round's top-preference node.
  auto run_mc = [&](NodeId at) {
    for (std::size_t r = 0; r < configs.explore.max_rounds; ++r) {
      auto step = protocol::explore(*session, gateway, corpus, configs.explore, ids, at);
      session = std::move(step.session);
      report.stage_sequence.emplace_back(kExplore);
      at = step.new_nodes.front();
    }
    return at;
  };
  auto run_mc2 = [&](const NodeId& at) {
    const auto before = propose_calls();
    auto step = protocol::refine(*session, gateway, configs.refine, ids, at, &corpus);
    session = std::move(step.session);
    report.stage_sequence.emplace_back(kRefine);
    report.search_steps = static_cast<std::size_t>(propose_calls() - before);
    if (step.error) throw *step.error;
    return step.outcome.final_node;
  };
  auto oracle_best = [&](Stage stage, const NodeId& fallback) {
    auto leaves = stage_leaves(*session, stage);
    if (leaves.empty()) leaves.push_back(fallback);
    report.stage_sequence.emplace_back(kOracleRank);
    return oracle_rank(candidates_of(*session, leaves), entry, configs.oracle_mode, &gateway).front();
  };
  auto feedback_on = [&](const NodeId& node) {
    auto text = oracle_feedback(gateway, session->tree().node(node).text, entry, spec.feedback_strength);
    session = protocol::apply_feedback(*session, node, text, ids);
    report.stage_sequence.emplace_back(kFeedback);
    out.feedback.push_back(std::move(text));
  };

  try {
    std::optional<std::string> blueprint;
    if (spec.use_blueprint) blueprint = derive_blueprint(entry);
    std::optional<std::string> survey;
    if (!trim(entry.survey).empty()) survey = entry.survey;
    session = protocol::init_session(entry.question, survey, blueprint, corpus, ids);
    if (blueprint) report.stage_sequence.emplace_back(kBlueprint);
    final_node = session->tree().root();

    if (spec.run_exploration) final_node = run_mc(session->tree().root());

    if (spec.run_refinement) {
      NodeId chosen = final_node;
      if (spec.run_exploration) {
        const auto leaves = stage_leaves(*session, Stage::Exploratory);
        if (spec.ranking == Ranking::SelfRank) {
          auto ranked = protocol::self_rank(*session, gateway, leaves, ids, configs.refine.criteria);
          session = std::move(ranked.session);
          report.stage_sequence.emplace_back(kSelfRank);
          chosen = ranked.ranking.front().node;
        } else if (spec.ranking == Ranking::OracleRank) {
          chosen = oracle_best(Stage::Exploratory, final_node);
        }
      }
      session = protocol::route(*session, chosen, Stage::FineGrained, ids);
      report.stage_sequence.emplace_back(kRouteCE);
      final_node = run_mc2(chosen);
      for (std::size_t r = 0; r < spec.feedback_rounds; ++r) {
        const auto best = oracle_best(Stage::FineGrained, final_node);
        feedback_on(best);
        final_node = run_mc2(best);
      }
    } else {
      for (std::size_t r = 0; r < spec.feedback_rounds; ++r) {
        const auto best = oracle_best(Stage::Exploratory, final_node);
        feedback_on(best);
        final_node = run_mc(best);
      }
    }
  } catch (const Error& e) {
    report.complete = false;
    report.error = e.what();
  }

  report.total_refinement_steps = static_cast<std::size_t>(propose_calls() - calls_at_start);
  out.gateway_propose_calls = propose_calls() - calls_at_start;
  if (session) {
    if (final_node.empty() || !session->tree().contains(final_node)) final_node = session->tree().root();
    report.final_node = final_node.value;
    report.final_hypothesis = session->tree().node(final_node).text;
    report.recall = compute_recall(report.final_hypothesis, entry);
    report.session_digest = sha256_hex(protocol::export_bytes(*session));
    out.session = std::move(session);
  }
  return out;
}

}  // namespace moose::eval
