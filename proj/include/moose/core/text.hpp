#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace moose::text {

struct Token {
  std::string text;  // lowercased
  std::size_t begin;  // byte offsets into the source
  std::size_t end;
};

/// Lowercases and splits on anything that is not an ASCII letter/digit; bytes >= 0x80 are kept
/// inside tokens so UTF-8 words survive intact.
std::vector<Token> tokenize(std::string_view s);

/// Lowercase, punctuation stripped, whitespace collapsed.
std::string normalize(std::string_view s);

std::vector<std::string> words(std::string_view s);

bool is_stopword(std::string_view w);

/// Distinct non-stopword tokens.
std::set<std::string> content_tokens(std::string_view s);

}  // namespace moose::text
