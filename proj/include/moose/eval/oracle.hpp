#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moose/core/ids.hpp"
#include "moose/eval/dataset.hpp"
#include "moose/llm/gateway.hpp"

namespace moose::eval {

enum class FeedbackStrength { Soft, Standard, Strong };

std::string_view to_string(FeedbackStrength s) noexcept;
FeedbackStrength feedback_strength_from_string(std::string_view s);

inline constexpr std::size_t kLeakNgram = 8;

struct LeakResult {
  bool pass = true;
  std::string span;  // first shared normalized n-gram, when !pass

  explicit operator bool() const noexcept { return pass; }
};

/// Fails iff the feedback shares a normalized n-gram of >= 8 tokens with the ground-truth
/// hypothesis or with any element.
LeakResult leak_check(std::string_view feedback, const GroundTruthEntry& entry);

/// Replaces every token covered by a leaked 8-gram with "[redacted]".
std::string redact_leaks(std::string_view feedback, const GroundTruthEntry& entry);

using Candidate = std::pair<NodeId, std::string>;

enum class OracleMode { Deterministic, Llm };

/// Deterministic ranking: recall descending, then total content-token weight of matched
/// elements descending, then node id. The LLM mode asks the oracle_rank template and appends any
/// ids it omits in deterministic order.
std::vector<NodeId> oracle_rank(const std::vector<Candidate>& candidates, const GroundTruthEntry& entry,
                                OracleMode mode = OracleMode::Deterministic, llm::LlmGateway* gateway = nullptr);

/// Directional critique from an oracle that sees the ground truth but must not disclose it.
/// Leaking answers are regenerated up to twice, then redacted; if too little survives the
/// redaction, throws Error{LeakUnfixable}.
std::string oracle_feedback(llm::LlmGateway& gateway, std::string_view hypothesis, const GroundTruthEntry& entry,
                            FeedbackStrength strength);

/// Statement returned when no ground-truth element is missing.
inline constexpr std::string_view kNoGapsFeedback =
    "No remaining gaps: the hypothesis already covers every ground-truth element; keep its current content.";

}  // namespace moose::eval
