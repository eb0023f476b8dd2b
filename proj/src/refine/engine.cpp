#include "moose/refine/engine.hpp"

#include <cstdlib>
#include <future>

#include "moose/core/digest.hpp"
#include "moose/core/json.hpp"

namespace moose::refine {

using llm::GenerationRequest;
using llm::TemplateId;

std::vector<LevelDescriptor> default_levels() {
  return {
      {"research-direction",
       "Correct the overall research direction: the central mechanism, the key components and why they "
       "should answer the research question."},
      {"methodology",
       "Specify the methodology: materials or systems, synthesis or modelling routes, and how each "
       "component is realised."},
      {"experimental-detail",
       "Add executable experimental detail: conditions, quantities, controls, measurements and expected "
       "observations."},
  };
}

void RefineConfig::validate() const {
  if (levels.empty()) throw Error(Errc::InvalidConfig, "refinement needs at least one level");
  if (proposals_per_step == 0 || patience == 0 || max_steps_per_level == 0)
    throw Error(Errc::InvalidConfig, "refinement counts must be positive");
  if (patience > max_steps_per_level) throw Error(Errc::InvalidConfig, "patience exceeds max_steps_per_level");
  if (criteria.empty()) throw Error(Errc::InvalidConfig, "no scoring criteria");
}

std::string RunLog::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += Json{{"step", r.step},
                {"level", r.level},
                {"candidate_digest", r.candidate_digest},
                {"average", r.average},
                {"accepted", r.accepted}}
               .dump();
    out += "\n";
  }
  return out;
}

EvaluationScore score_hypothesis(llm::LlmGateway& gateway, const ResearchContext& context, std::string_view text,
                                 const std::vector<std::string>& criteria) {
  if (trim(text).empty()) throw Error(Errc::ScoreUnavailable, "cannot score an empty hypothesis");

  std::string names, example;
  for (const auto& c : criteria) {
    names += (names.empty() ? "" : ", ") + c;
    example += llm::wrap_field(c, "7");
  }
  auto request = GenerationRequest::make(TemplateId::ScoreHypothesis, {{"question", context.question},
                                                                       {"context", render_context(context)},
                                                                       {"hypothesis", std::string(text)},
                                                                       {"criteria", names},
                                                                       {"score_fields", example}});
  auto parse = [&](const std::string& raw) {
    std::map<std::string, double> values;
    for (const auto& [name, field] : llm::parse_fields(raw, criteria)) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str()) throw ParseError("criterion '" + name + "' is not a number", raw);
      values.emplace(name, v);
    }
    try {
      return EvaluationScore::from_criteria(std::move(values));
    } catch (const Error& e) {
      throw Error(Errc::ScoreUnavailable, e.what());
    }
  };
  try {
    return gateway.complete_with_repairs(std::move(request), parse);
  } catch (const ParseError& e) {
    throw Error(Errc::ScoreUnavailable, e.what());
  }
}

std::string propose_refinement(llm::LlmGateway& gateway, const ResearchContext& context,
                               const HypothesisNode& current, std::uint32_t level, const RefineConfig& cfg) {
  if (level >= cfg.levels.size())
    throw Error(Errc::LevelOutOfRange,
                "level " + std::to_string(level) + " with " + std::to_string(cfg.levels.size()) + " levels");
  const auto& d = cfg.levels[level];
  const auto result = gateway.complete(GenerationRequest::make(TemplateId::ProposeRefinement,
                                                               {{"question", context.question},
                                                                {"context", render_context(context)},
                                                                {"hypothesis", current.text},
                                                                {"level", std::to_string(level + 1) + " (" + d.name + ")"},
                                                                {"level_descriptor", d.description}}));
  return llm::find_field(result.text, "hypothesis").value_or(trim(result.text));
}

namespace {

struct Candidate {
  std::string text;
  EvaluationScore score;
};

// Mutates `acc` in place so callers keep partial progress when a gateway call throws.
void run_level(llm::LlmGateway& gateway, const ResearchContext& context, std::uint32_t level,
               const RefineConfig& cfg, IdGenerator& ids, const EventId& created_by, RunLog* log,
               std::size_t step_offset, LevelResult& acc) {
  std::size_t stale = 0;
  for (std::size_t iter = 0; iter < cfg.max_steps_per_level && stale < cfg.patience; ++iter) {
    const HypothesisNode current = acc.tree.node(acc.best);
    std::vector<Candidate> batch;
    if (gateway.deterministic() || cfg.proposals_per_step == 1) {
      for (std::size_t p = 0; p < cfg.proposals_per_step; ++p) {
        auto text = propose_refinement(gateway, context, current, level, cfg);
        ++acc.steps;
        auto score = score_hypothesis(gateway, context, text, cfg.criteria);
        batch.push_back({std::move(text), std::move(score)});
      }
    } else {
      std::vector<std::future<Candidate>> pending;
      for (std::size_t p = 0; p < cfg.proposals_per_step; ++p)
        pending.push_back(std::async(std::launch::async, [&] {
          auto text = propose_refinement(gateway, context, current, level, cfg);
          auto score = score_hypothesis(gateway, context, text, cfg.criteria);
          return Candidate{std::move(text), std::move(score)};
        }));
      for (auto& f : pending) {
        batch.push_back(f.get());
        ++acc.steps;
      }
    }

    std::size_t top = 0;
    for (std::size_t i = 1; i < batch.size(); ++i)
      if (batch[i].score.average > batch[top].score.average) top = i;
    const bool improved = batch[top].score.average > acc.best_average;

    if (log) {
      const std::size_t first = step_offset + acc.steps - batch.size();
      for (std::size_t i = 0; i < batch.size(); ++i)
        log->append({first + i + 1, level, sha256_hex(batch[i].text).substr(0, 16), batch[i].score.average,
                     improved && i == top});
    }

    if (!improved) {
      ++stale;
      continue;
    }
    stale = 0;
    HypothesisNode node;
    node.id = ids.next_node();
    node.parent = current.id;
    node.stage = Stage::FineGrained;
    node.text = std::move(batch[top].text);
    node.step_index = next_step_index(current, Stage::FineGrained);
    node.abstraction_level = level;
    node.scores = std::move(batch[top].score);
    node.created_by_event = created_by;
    acc.best_average = node.scores->average;
    acc.best = node.id;
    acc.accepted.push_back(node.id);
    acc.tree = attach_child(acc.tree, current.id, std::move(node));
  }
}

}  // namespace

LevelResult refine_level(llm::LlmGateway& gateway, const SearchTree& tree, const ResearchContext& context,
                         const NodeId& start, std::uint32_t level, const RefineConfig& cfg, IdGenerator& ids,
                         const EventId& created_by, RunLog* log, std::optional<double> start_average) {
  cfg.validate();
  if (level >= cfg.levels.size()) throw Error(Errc::LevelOutOfRange, "level " + std::to_string(level));
  LevelResult acc{tree, start, 0.0, 0, {}, std::nullopt};
  if (start_average) {
    acc.best_average = *start_average;
  } else {
    acc.start_score = score_hypothesis(gateway, context, tree.node(start).text, cfg.criteria);
    acc.best_average = acc.start_score->average;
  }
  run_level(gateway, context, level, cfg, ids, created_by, log, 0, acc);
  return acc;
}

HierarchicalResult refine_hierarchical(llm::LlmGateway& gateway, const SearchTree& tree,
                                       const ResearchContext& context, const NodeId& start, const RefineConfig& cfg,
                                       IdGenerator& ids, const EventId& created_by, RunLog* log) {
  cfg.validate();
  HierarchicalResult out{tree, RefineOutcome{start, 0, {}}, {}, std::nullopt};
  LevelResult acc{tree, start, 0.0, 0, {}, std::nullopt};
  auto commit = [&](std::uint32_t level) {
    out.tree = acc.tree;
    out.accepted.insert(out.accepted.end(), acc.accepted.begin(), acc.accepted.end());
    out.outcome.steps_used += acc.steps;
    out.outcome.per_level_trace.push_back({level, acc.best_average, acc.steps});
    out.outcome.final_node = acc.best;
  };

  std::uint32_t level = 0;
  bool in_level = false;
  try {
    out.start_score = score_hypothesis(gateway, context, tree.node(start).text, cfg.criteria);
    acc.best_average = out.start_score->average;
    for (; level < cfg.levels.size(); ++level) {
      acc.steps = 0;
      acc.accepted.clear();
      in_level = true;
      run_level(gateway, context, level, cfg, ids, created_by, log, out.outcome.steps_used, acc);
      in_level = false;
      commit(level);
    }
  } catch (const Error& e) {
    if (in_level) commit(level);
    throw RefineError(e, std::move(out));
  }
  return out;
}

}  // namespace moose::refine
