#include "moose/core/types.hpp"

#include <cmath>

#include "moose/error.hpp"

namespace moose {

std::string_view to_string(Stage s) noexcept {
  return s == Stage::Exploratory ? "Exploratory" : "FineGrained";
}

Stage stage_from_string(std::string_view s) {
  if (s == "Exploratory") return Stage::Exploratory;
  if (s == "FineGrained") return Stage::FineGrained;
  throw Error(Errc::InvalidConfig, "unknown stage '" + std::string(s) + "'");
}

std::string_view to_string(ContextAddition::Kind k) noexcept {
  return k == ContextAddition::Kind::PriorHypothesis ? "PriorHypothesis" : "Feedback";
}

std::string trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

void ResearchContext::validate() const {
  if (trim(question).empty()) throw Error(Errc::EmptyQuestion, "research question is blank");
  for (const auto& a : additions) {
    if (trim(a.text).empty()) throw Error(Errc::InvalidConfig, "context addition with empty text");
    if (a.kind == ContextAddition::Kind::PriorHypothesis && !a.source_node)
      throw Error(Errc::InvalidConfig, "prior-hypothesis addition without a source node");
  }
}

ResearchContext ResearchContext::with(ContextAddition addition) const {
  ResearchContext out = *this;
  out.additions.push_back(std::move(addition));
  out.validate();
  return out;
}

InspirationCorpus::InspirationCorpus(std::string name, std::vector<Inspiration> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.id.empty()) throw Error(Errc::CorpusInvalid, "entry " + std::to_string(i) + " has no id");
    if (trim(e.title).empty())
      throw Error(Errc::CorpusInvalid, "entry '" + e.id.value + "' has an empty title");
    if (!index_.emplace(e.id, i).second)
      throw Error(Errc::CorpusInvalid, "duplicate inspiration id '" + e.id.value + "'");
  }
}

const Inspiration* InspirationCorpus::find(const InspirationId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

EvaluationScore EvaluationScore::from_criteria(std::map<std::string, double> criteria) {
  if (criteria.empty()) throw Error(Errc::InvalidScore, "no criteria");
  double sum = 0.0;
  for (const auto& [name, v] : criteria) {
    if (!std::isfinite(v) || v < 0.0 || v > 10.0)
      throw Error(Errc::InvalidScore, "criterion '" + name + "' out of [0,10]");
    sum += v;
  }
  EvaluationScore s;
  s.average = sum / static_cast<double>(criteria.size());
  s.criteria = std::move(criteria);
  return s;
}

bool EvaluationScore::consistent() const {
  if (criteria.empty()) return false;
  double sum = 0.0;
  for (const auto& [_, v] : criteria) {
    if (v < 0.0 || v > 10.0) return false;
    sum += v;
  }
  return std::abs(sum / static_cast<double>(criteria.size()) - average) <= 1e-9;
}

}  // namespace moose

namespace moose {

std::string render_context(const ResearchContext& ctx) {
  std::string out;
  auto line = [&out](const std::string& s) {
    if (!out.empty()) out += "\n";
    out += s;
  };
  if (ctx.survey && !trim(*ctx.survey).empty()) line("Survey: " + trim(*ctx.survey));
  if (ctx.blueprint && !trim(*ctx.blueprint).empty()) line("Blueprint: " + trim(*ctx.blueprint));
  for (const auto& a : ctx.additions) {
    if (a.kind == ContextAddition::Kind::PriorHypothesis) {
      line("Previous hypothesis: " + a.text);
    } else {
      line("Expert feedback: " + a.text);
    }
  }
  return out.empty() ? "(none)" : out;
}

}  // namespace moose
