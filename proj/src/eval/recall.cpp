#include "moose/eval/recall.hpp"

#include <set>

#include "moose/core/text.hpp"

namespace moose::eval {

namespace {

bool matches(const std::set<std::string>& hyp, std::string_view element) {
  auto needed = text::content_tokens(element);
  if (needed.empty()) {
    const auto all = text::words(element);  // all-stopword element: fall back to every word
    needed.insert(all.begin(), all.end());
  }
  if (needed.empty()) return false;
  std::size_t hit = 0;
  for (const auto& t : needed) hit += hyp.contains(t) ? 1 : 0;
  // hit / |needed| >= 0.70 without floating point
  return hit * 100 >= needed.size() * 70;
}

std::set<std::string> token_set(std::string_view s) {
  const auto w = text::words(s);
  return {w.begin(), w.end()};
}

}  // namespace

bool match_element(std::string_view hypothesis, std::string_view element) {
  return matches(token_set(hypothesis), element);
}

std::size_t matched_count(std::string_view hypothesis, const GroundTruthEntry& entry) {
  const auto hyp = token_set(hypothesis);
  std::size_t n = 0;
  for (const auto& e : entry.elements) n += matches(hyp, e) ? 1 : 0;
  return n;
}

double compute_recall(std::string_view hypothesis, const GroundTruthEntry& entry) {
  if (entry.elements.empty()) return 0.0;
  return static_cast<double>(matched_count(hypothesis, entry)) / static_cast<double>(entry.elements.size());
}

}  // namespace moose::eval
