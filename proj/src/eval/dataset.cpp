#include "moose/eval/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "moose/core/json.hpp"
#include "moose/core/text.hpp"

namespace moose::eval {

std::vector<GroundTruthEntry> parse_dataset(std::string_view jsonl) {
  std::vector<GroundTruthEntry> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> ids;  // reports and session files are keyed by entry id
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    GroundTruthEntry e;
    try {
      const auto j = Json::parse(line);
      e.id = j.at("id").get<std::string>();
      e.question = j.at("question").get<std::string>();
      e.survey = j.value("survey", std::string{});
      e.fine_grained_hypothesis = j.at("fine_grained_hypothesis").get<std::string>();
      e.elements = j.at("elements").get<std::vector<std::string>>();
    } catch (const Json::exception& ex) {
      throw MalformedEntry(lineno, ex.what());
    }
    if (trim(e.id).empty()) throw MalformedEntry(lineno, "empty id");
    if (!ids.insert(e.id).second) throw MalformedEntry(lineno, "duplicate id '" + e.id + "'");
    if (trim(e.question).empty()) throw MalformedEntry(lineno, "empty question");
    if (e.elements.empty()) throw MalformedEntry(lineno, "elements list is empty");
    std::set<std::string> seen;
    for (const auto& el : e.elements) {
      const auto norm = text::normalize(el);
      if (norm.empty()) throw MalformedEntry(lineno, "element with no words");
      if (!seen.insert(norm).second) throw MalformedEntry(lineno, "duplicate element '" + el + "'");
    }
    out.push_back(std::move(e));
  }
  if (out.empty()) throw Error(Errc::EmptyDataset, "dataset has no entries");
  return out;
}

std::vector<GroundTruthEntry> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read dataset " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str());
}

}  // namespace moose::eval
