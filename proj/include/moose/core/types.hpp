#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "moose/core/ids.hpp"

namespace moose {

enum class Stage { Exploratory, FineGrained };

std::string_view to_string(Stage s) noexcept;
Stage stage_from_string(std::string_view s);

struct ContextAddition {
  enum class Kind { PriorHypothesis, Feedback };

  Kind kind;
  std::string text;
  std::optional<NodeId> source_node;

  friend bool operator==(const ContextAddition&, const ContextAddition&) = default;
};

std::string_view to_string(ContextAddition::Kind k) noexcept;

/// The background a generation is conditioned on. Additions only ever grow.
struct ResearchContext {
  std::string question;
  std::optional<std::string> survey;
  std::optional<std::string> blueprint;
  std::vector<ContextAddition> additions;

  /// Throws Error{EmptyQuestion} / Error{InvalidConfig} when an invariant is broken.
  void validate() const;

  ResearchContext with(ContextAddition addition) const;

  friend bool operator==(const ResearchContext&, const ResearchContext&) = default;
};

struct Inspiration {
  InspirationId id;
  std::string title;
  std::string abstract;

  friend bool operator==(const Inspiration&, const Inspiration&) = default;
};

class InspirationCorpus {
public:
  InspirationCorpus() = default;
  /// Throws Error{CorpusInvalid} on duplicate ids or empty titles.
  InspirationCorpus(std::string name, std::vector<Inspiration> entries);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Inspiration>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Inspiration* find(const InspirationId& id) const;

private:
  std::string name_;
  std::vector<Inspiration> entries_;
  std::map<InspirationId, std::size_t> index_;
};

struct EvaluationScore {
  std::map<std::string, double> criteria;
  double average = 0.0;

  /// Validates the 0..10 range and computes the average.
  static EvaluationScore from_criteria(std::map<std::string, double> criteria);
  bool consistent() const;

  friend bool operator==(const EvaluationScore&, const EvaluationScore&) = default;
};

struct HypothesisNode {
  NodeId id;
  std::optional<NodeId> parent;
  Stage stage = Stage::Exploratory;
  std::string text;
  std::uint32_t step_index = 0;
  std::optional<InspirationId> inspiration_used;
  std::optional<std::uint32_t> abstraction_level;
  std::optional<EvaluationScore> scores;
  EventId created_by_event;

  friend bool operator==(const HypothesisNode&, const HypothesisNode&) = default;
};

namespace signal {
struct InitialBlueprint {
  std::string text;
};
struct RouteTransition {
  NodeId node;
  Stage target;
};
struct DirectionalFeedback {
  NodeId node;
  std::string text;
};
}  // namespace signal

using GuidingSignal =
    std::variant<signal::InitialBlueprint, signal::RouteTransition, signal::DirectionalFeedback>;

/// Default self-evaluation criteria; configurable wherever scoring happens.
inline const std::vector<std::string>& default_criteria() {
  static const std::vector<std::string> c{"feasibility", "novelty", "plausibility", "specificity"};
  return c;
}

std::string trim(std::string_view s);

}  // namespace moose

namespace moose {

/// Prompt-facing rendering of survey, blueprint and accumulated additions.
std::string render_context(const ResearchContext& ctx);

}  // namespace moose
