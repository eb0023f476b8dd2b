#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "moose/error.hpp"

namespace moose::eval {

struct GroundTruthEntry {
  std::string id;
  std::string question;
  std::string survey;
  std::string fine_grained_hypothesis;
  std::vector<std::string> elements;  // non-empty, distinct after normalization
};

class MalformedEntry : public Error {
public:
  MalformedEntry(std::size_t line, const std::string& what)
      : Error(Errc::MalformedEntry, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Line-delimited {id, question, survey, fine_grained_hypothesis, elements[]} records, file order.
std::vector<GroundTruthEntry> parse_dataset(std::string_view jsonl);
std::vector<GroundTruthEntry> load_dataset(const std::filesystem::path& path);

}  // namespace moose::eval
