#include "moose/llm/templates.hpp"

#include <fstream>
#include <regex>
#include <sstream>
#include <utility>

#include "moose/error.hpp"

namespace moose::llm {

namespace {

// Generated at configure time from templates/*.txt.
const std::pair<const char*, const char*> kBuiltin[] = {
#include "moose_builtin_templates.inc"
};

const std::regex& placeholder_re() {
  static const std::regex re(R"(\{([a-z_][a-z0-9_]*)\})");
  return re;
}

}  // namespace

std::string_view to_string(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::SelectInspiration: return "select_inspiration";
    case TemplateId::GenerateHypothesis: return "generate_hypothesis";
    case TemplateId::ProposeRefinement: return "propose_refinement";
    case TemplateId::ScoreHypothesis: return "score_hypothesis";
    case TemplateId::OracleFeedback: return "oracle_feedback";
    case TemplateId::OracleRank: return "oracle_rank";
  }
  return "?";
}

TemplateId template_from_string(std::string_view name) {
  for (auto id : kAllTemplates)
    if (to_string(id) == name) return id;
  throw Error(Errc::UnknownTemplate, "unknown template '" + std::string(name) + "'");
}

double default_temperature(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::SelectInspiration:
    case TemplateId::GenerateHypothesis: return 1.0;
    default: return 0.3;
  }
}

TemplateSet TemplateSet::builtin() {
  TemplateSet set;
  for (const auto& [name, body] : kBuiltin) set.texts_[template_from_string(name)] = body;
  for (auto id : kAllTemplates)
    if (!set.texts_.contains(id))
      throw Error(Errc::UnknownTemplate, "builtin template missing: " + std::string(to_string(id)));
  return set;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
  TemplateSet set = builtin();
  for (auto id : kAllTemplates) {
    const auto path = dir / (std::string(to_string(id)) + ".txt");
    std::ifstream in(path);
    if (!in) continue;
    std::ostringstream ss;
    ss << in.rdbuf();
    set.texts_[id] = ss.str();
  }
  return set;
}

const std::string& TemplateSet::text(TemplateId id) const {
  auto it = texts_.find(id);
  if (it == texts_.end()) throw Error(Errc::UnknownTemplate, std::string(to_string(id)));
  return it->second;
}

std::set<std::string> TemplateSet::variables(TemplateId id) const {
  std::set<std::string> out;
  const auto& t = text(id);
  for (auto it = std::sregex_iterator(t.begin(), t.end(), placeholder_re()); it != std::sregex_iterator(); ++it)
    out.insert((*it)[1].str());
  return out;
}

std::string TemplateSet::render(TemplateId id, const std::map<std::string, std::string>& vars) const {
  const auto& t = text(id);
  std::string out;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(t.begin(), t.end(), placeholder_re()); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const auto name = m[1].str();
    auto v = vars.find(name);
    if (v == vars.end())
      throw Error(Errc::TemplateVariableMissing,
                  "template " + std::string(to_string(id)) + " needs {" + name + "}");
    out.append(t, last, static_cast<std::size_t>(m.position(0)) - last);
    out += v->second;
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(t, last);
  return out;
}

}  // namespace moose::llm
