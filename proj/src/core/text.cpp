#include "moose/core/text.hpp"

#include <array>
#include <algorithm>

namespace moose::text {

namespace {

bool word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

char lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : static_cast<char>(c); }

constexpr auto kStopwords = std::to_array<std::string_view>({
    "a",       "about",  "above",   "after",   "again", "against", "all",     "also",    "am",
    "an",      "and",    "any",     "are",     "as",    "at",      "be",      "because", "been",
    "before",  "being",  "below",   "between", "both",  "but",     "by",      "can",     "could",
    "did",     "do",     "does",    "doing",   "down",  "during",  "each",    "few",     "for",
    "from",    "further", "had",    "has",     "have",  "having",  "he",      "her",     "here",
    "hers",    "him",    "his",     "how",     "i",     "if",      "in",      "into",    "is",
    "it",      "its",    "itself",  "just",    "may",   "me",      "might",   "more",    "most",
    "must",    "my",     "no",      "nor",     "not",   "of",      "off",     "on",      "once",
    "only",    "or",     "other",   "our",     "ours",  "out",     "over",    "own",     "same",
    "shall",   "she",    "should",  "so",      "some",  "such",    "than",    "that",    "the",
    "their",   "theirs", "them",    "then",    "there", "these",   "they",    "this",    "those",
    "through", "to",     "too",     "under",   "until", "up",      "upon",    "us",      "very",
    "via",     "was",    "we",      "were",    "what",  "when",    "where",   "which",   "while",
    "who",     "whom",   "why",     "will",    "with",  "within",  "without", "would",   "you",
    "your",    "yours",
});

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !word_char(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    const std::size_t b = i;
    std::string w;
    while (i < s.size() && word_char(static_cast<unsigned char>(s[i]))) w.push_back(lower(s[i++]));
    out.push_back(Token{std::move(w), b, i});
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) out.push_back(std::move(t.text));
  return out;
}

std::string normalize(std::string_view s) {
  std::string out;
  for (const auto& w : words(s)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

bool is_stopword(std::string_view w) {
  static_assert(kStopwords.size() > 0);
  return std::binary_search(kStopwords.begin(), kStopwords.end(), w);
}

std::set<std::string> content_tokens(std::string_view s) {
  std::set<std::string> out;
  for (auto& w : words(s))
    if (!is_stopword(w)) out.insert(std::move(w));
  return out;
}

}  // namespace moose::text
