#include "moose/core/json.hpp"

#include "moose/error.hpp"

namespace moose {

namespace {

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
void read_opt(const Json& j, const char* key, std::optional<T>& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    out.reset();
  } else {
    out = it->get<T>();
  }
}

}  // namespace

void to_json(Json& j, Stage s) { j = std::string(to_string(s)); }
void from_json(const Json& j, Stage& s) { s = stage_from_string(j.get<std::string>()); }

void to_json(Json& j, const ContextAddition& a) {
  j = Json{{"kind", std::string(to_string(a.kind))}, {"text", a.text}, {"source_node", opt(a.source_node)}};
}

void from_json(const Json& j, ContextAddition& a) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "PriorHypothesis") {
    a.kind = ContextAddition::Kind::PriorHypothesis;
  } else if (kind == "Feedback") {
    a.kind = ContextAddition::Kind::Feedback;
  } else {
    throw Error(Errc::InvalidConfig, "unknown addition kind '" + kind + "'");
  }
  a.text = j.at("text").get<std::string>();
  read_opt(j, "source_node", a.source_node);
}

void to_json(Json& j, const ResearchContext& c) {
  j = Json{{"question", c.question},
           {"survey", opt(c.survey)},
           {"blueprint", opt(c.blueprint)},
           {"additions", c.additions}};
}

void from_json(const Json& j, ResearchContext& c) {
  c.question = j.at("question").get<std::string>();
  read_opt(j, "survey", c.survey);
  read_opt(j, "blueprint", c.blueprint);
  c.additions = j.value("additions", Json::array()).get<std::vector<ContextAddition>>();
}

void to_json(Json& j, const Inspiration& i) {
  j = Json{{"id", i.id}, {"title", i.title}, {"abstract", i.abstract}};
}

void from_json(const Json& j, Inspiration& i) {
  i.id = j.at("id").get<InspirationId>();
  i.title = j.at("title").get<std::string>();
  i.abstract = j.value("abstract", std::string{});
}

void to_json(Json& j, const EvaluationScore& s) {
  j = Json{{"criteria", s.criteria}, {"average", s.average}};
}

void from_json(const Json& j, EvaluationScore& s) {
  s.criteria = j.at("criteria").get<std::map<std::string, double>>();
  s.average = j.at("average").get<double>();
}

void to_json(Json& j, const HypothesisNode& n) {
  j = Json{{"id", n.id},
           {"parent", opt(n.parent)},
           {"stage", n.stage},
           {"text", n.text},
           {"step_index", n.step_index},
           {"inspiration_used", opt(n.inspiration_used)},
           {"abstraction_level", opt(n.abstraction_level)},
           {"scores", opt(n.scores)},
           {"created_by_event", n.created_by_event}};
}

void from_json(const Json& j, HypothesisNode& n) {
  n.id = j.at("id").get<NodeId>();
  read_opt(j, "parent", n.parent);
  n.stage = j.at("stage").get<Stage>();
  n.text = j.at("text").get<std::string>();
  n.step_index = j.at("step_index").get<std::uint32_t>();
  read_opt(j, "inspiration_used", n.inspiration_used);
  read_opt(j, "abstraction_level", n.abstraction_level);
  read_opt(j, "scores", n.scores);
  n.created_by_event = j.at("created_by_event").get<EventId>();
}

Json export_tree(const SearchTree& tree) {
  Json nodes = Json::array();
  for (const auto& [_, n] : tree.nodes()) nodes.push_back(n);  // std::map: already id-sorted
  return Json{{"root", tree.root()}, {"active", tree.active()}, {"nodes", std::move(nodes)}};
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace moose
