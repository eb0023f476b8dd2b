#pragma once

#include <filesystem>
#include <string_view>

#include "moose/core/types.hpp"
#include "moose/error.hpp"

namespace moose::explore {

class CorpusParseError : public Error {
public:
  CorpusParseError(std::size_t line, const std::string& what)
      : Error(Errc::CorpusInvalid, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// One {id, title, abstract} object per line, UTF-8, blank lines ignored.
/// Throws CorpusParseError (1-based line) or Error{EmptyCorpus}.
InspirationCorpus parse_corpus(std::string_view jsonl, std::string name);
InspirationCorpus load_corpus(const std::filesystem::path& path);

}  // namespace moose::explore
