#include "moose/explore/corpus_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "moose/core/json.hpp"

namespace moose::explore {

InspirationCorpus parse_corpus(std::string_view jsonl, std::string name) {
  std::vector<Inspiration> entries;
  std::set<InspirationId> seen;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Inspiration insp;
    try {
      const auto j = Json::parse(line);
      if (!j.is_object()) throw CorpusParseError(lineno, "record is not an object");
      insp.id = InspirationId(j.at("id").get<std::string>());
      insp.title = j.at("title").get<std::string>();
      insp.abstract = j.at("abstract").get<std::string>();
    } catch (const Json::exception& e) {
      throw CorpusParseError(lineno, e.what());
    }
    if (trim(insp.id.value).empty()) throw CorpusParseError(lineno, "empty id");
    if (trim(insp.title).empty()) throw CorpusParseError(lineno, "empty title");
    if (!seen.insert(insp.id).second) throw CorpusParseError(lineno, "duplicate id '" + insp.id.value + "'");
    entries.push_back(std::move(insp));
  }
  if (entries.empty()) throw Error(Errc::EmptyCorpus, "corpus has no records");
  return InspirationCorpus(std::move(name), std::move(entries));
}

InspirationCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read corpus " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str(), path.stem().string());
}

}  // namespace moose::explore
