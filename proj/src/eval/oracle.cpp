#include "moose/eval/oracle.hpp"

#include <algorithm>
#include <set>

#include "moose/core/text.hpp"
#include "moose/core/types.hpp"
#include "moose/eval/recall.hpp"

namespace moose::eval {

using llm::GenerationRequest;
using llm::TemplateId;

std::string_view to_string(FeedbackStrength s) noexcept {
  switch (s) {
    case FeedbackStrength::Soft: return "soft";
    case FeedbackStrength::Standard: return "standard";
    case FeedbackStrength::Strong: return "strong";
  }
  return "?";
}

FeedbackStrength feedback_strength_from_string(std::string_view s) {
  if (s == "soft") return FeedbackStrength::Soft;
  if (s == "standard") return FeedbackStrength::Standard;
  if (s == "strong") return FeedbackStrength::Strong;
  throw Error(Errc::InvalidConfig, "unknown feedback strength '" + std::string(s) + "'");
}

namespace {

std::set<std::string> truth_ngrams(const GroundTruthEntry& entry) {
  std::set<std::string> out;
  auto add = [&out](std::string_view s) {
    const auto w = text::words(s);
    for (std::size_t i = 0; i + kLeakNgram <= w.size(); ++i) {
      std::string g = w[i];
      for (std::size_t k = 1; k < kLeakNgram; ++k) g += " " + w[i + k];
      out.insert(std::move(g));
    }
  };
  add(entry.fine_grained_hypothesis);
  for (const auto& e : entry.elements) add(e);
  return out;
}

// Per-token flag: covered by some leaked n-gram.
std::vector<bool> leak_mask(const std::vector<text::Token>& toks, const std::set<std::string>& grams,
                            std::string* first_span) {
  std::vector<bool> mask(toks.size(), false);
  for (std::size_t i = 0; i + kLeakNgram <= toks.size(); ++i) {
    std::string g = toks[i].text;
    for (std::size_t k = 1; k < kLeakNgram; ++k) g += " " + toks[i + k].text;
    if (!grams.contains(g)) continue;
    if (first_span && first_span->empty()) *first_span = g;
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(i), mask.begin() + static_cast<std::ptrdiff_t>(i + kLeakNgram),
              true);
  }
  return mask;
}

std::string instructions(FeedbackStrength s, std::size_t missing) {
  switch (s) {
    case FeedbackStrength::Soft:
      return "Name ONE high-level theme the candidate is missing, in a single sentence. Do not list specifics.";
    case FeedbackStrength::Standard:
      return "List the missing aspects as short research directions, one per line, without giving the exact "
             "answer.";
    case FeedbackStrength::Strong:
      return "Write an itemized critique with exactly one directional item per uncovered element (" +
             std::to_string(missing) +
             " items). For each, say which kind of component, condition or mechanism to add and why it matters.";
  }
  return {};
}

}  // namespace

LeakResult leak_check(std::string_view feedback, const GroundTruthEntry& entry) {
  LeakResult r;
  const auto grams = truth_ngrams(entry);
  const auto toks = text::tokenize(feedback);
  const auto mask = leak_mask(toks, grams, &r.span);
  r.pass = std::none_of(mask.begin(), mask.end(), [](bool b) { return b; });
  return r;
}

std::string redact_leaks(std::string_view feedback, const GroundTruthEntry& entry) {
  const auto toks = text::tokenize(feedback);
  const auto mask = leak_mask(toks, truth_ngrams(entry), nullptr);
  std::string out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < toks.size();) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < toks.size() && mask[j]) ++j;
    out.append(feedback.substr(pos, toks[i].begin - pos));
    out += "[redacted]";
    pos = toks[j - 1].end;
    i = j;
  }
  out.append(feedback.substr(pos));
  return out;
}

std::vector<NodeId> oracle_rank(const std::vector<Candidate>& candidates, const GroundTruthEntry& entry,
                                OracleMode mode, llm::LlmGateway* gateway) {
  struct Keyed {
    NodeId id;
    double recall;
    std::size_t weight;
  };
  std::vector<Keyed> keyed;
  for (const auto& [id, hyp] : candidates) {
    std::size_t weight = 0;
    for (const auto& e : entry.elements)
      if (match_element(hyp, e)) weight += text::content_tokens(e).size();
    keyed.push_back({id, compute_recall(hyp, entry), weight});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.recall != b.recall) return a.recall > b.recall;
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.id < b.id;
  });
  std::vector<NodeId> order;
  for (auto& k : keyed) order.push_back(std::move(k.id));
  if (mode == OracleMode::Deterministic || candidates.size() < 2) return order;

  if (!gateway) throw Error(Errc::InvalidConfig, "LLM oracle ranking needs a gateway");
  std::string listing;
  for (const auto& [id, hyp] : candidates) listing += id.value + ": " + hyp + "\n";
  auto ranked = gateway->complete_with_repairs(
      GenerationRequest::make(TemplateId::OracleRank,
                              {{"ground_truth", entry.fine_grained_hypothesis}, {"candidates", listing}}),
      [&](const std::string& raw) {
        auto field = llm::find_field(raw, "ranking");
        if (!field) throw ParseError("missing field 'ranking'", raw);
        std::vector<NodeId> out;
        for (auto& tok : llm::split_id_list(*field)) {
          NodeId id(tok);
          if (std::find(order.begin(), order.end(), id) != order.end() &&
              std::find(out.begin(), out.end(), id) == out.end())
            out.push_back(std::move(id));
        }
        if (out.empty()) throw ParseError("ranking names no candidate", raw);
        return out;
      });
  for (const auto& id : order)
    if (std::find(ranked.begin(), ranked.end(), id) == ranked.end()) ranked.push_back(id);
  return ranked;
}

std::string oracle_feedback(llm::LlmGateway& gateway, std::string_view hypothesis, const GroundTruthEntry& entry,
                            FeedbackStrength strength) {
  std::vector<std::string> missing;
  for (const auto& e : entry.elements)
    if (!match_element(hypothesis, e)) missing.push_back(e);
  if (missing.empty()) return std::string(kNoGapsFeedback);

  std::string listing;
  for (const auto& m : missing) listing += "- " + m + "\n";
  const auto request = GenerationRequest::make(TemplateId::OracleFeedback,
                                               {{"ground_truth", entry.fine_grained_hypothesis},
                                                {"missing", listing},
                                                {"hypothesis", std::string(hypothesis)},
                                                {"instructions", instructions(strength, missing.size())}});
  constexpr int kRetries = 2;
  std::string last;
  for (int attempt = 0; attempt <= kRetries; ++attempt) {
    const auto result = gateway.complete(request);
    last = llm::find_field(result.text, "feedback").value_or(trim(result.text));
    if (!trim(last).empty() && leak_check(last, entry)) return last;
  }

  auto redacted = redact_leaks(last, entry);
  std::size_t survivors = 0;
  for (const auto& t : text::content_tokens(redacted)) survivors += t == "redacted" ? 0 : 1;
  if (survivors < 3 || !leak_check(redacted, entry))
    throw Error(Errc::LeakUnfixable, "oracle feedback kept disclosing the ground truth");
  return redacted;
}

}  // namespace moose::eval
