#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace moose::llm {

enum class TemplateId {
  SelectInspiration,
  GenerateHypothesis,
  ProposeRefinement,
  ScoreHypothesis,
  OracleFeedback,
  OracleRank,
};

inline constexpr TemplateId kAllTemplates[] = {
    TemplateId::SelectInspiration, TemplateId::GenerateHypothesis, TemplateId::ProposeRefinement,
    TemplateId::ScoreHypothesis,   TemplateId::OracleFeedback,     TemplateId::OracleRank,
};

/// File stem / wire name, e.g. "select_inspiration".
std::string_view to_string(TemplateId id) noexcept;
TemplateId template_from_string(std::string_view name);

/// Exploration templates sample at 1.0; refinement, scoring and oracle templates at 0.3.
double default_temperature(TemplateId id) noexcept;

/// Plain-text prompt templates with {variable} placeholders.
class TemplateSet {
public:
  /// Templates compiled into the binary from templates/*.txt.
  static TemplateSet builtin();
  /// Builtins overridden by any <name>.txt present in `dir`.
  static TemplateSet load_dir(const std::filesystem::path& dir);

  const std::string& text(TemplateId id) const;
  std::set<std::string> variables(TemplateId id) const;

  /// Throws Error{TemplateVariableMissing} naming the first absent placeholder.
  std::string render(TemplateId id, const std::map<std::string, std::string>& vars) const;

private:
  std::map<TemplateId, std::string> texts_;
};

}  // namespace moose::llm
