#include <fstream>
#include <sstream>

#include "moose/core/json.hpp"
#include "moose/error.hpp"
#include "moose/llm/backend.hpp"

namespace moose::llm {

GenerationRequest GenerationRequest::make(TemplateId id, std::map<std::string, std::string> vars) {
  GenerationRequest r;
  r.template_id = id;
  r.variables = std::move(vars);
  r.temperature = default_temperature(id);
  return r;
}

ScriptedBackend::ScriptedBackend(std::vector<Entry> entries)
    : entries_(std::move(entries)), used_(entries_.size(), false) {}

std::vector<ScriptedBackend::Entry> ScriptedBackend::parse(std::string_view jsonl) {
  std::vector<Entry> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = Json::parse(line);
      Entry e;
      const auto m = j.value("template", std::string("*"));
      if (m != "*") e.matcher = template_from_string(m);
      e.text = j.at("text").get<std::string>();
      out.push_back(std::move(e));
    } catch (const Json::exception& ex) {
      throw Error(Errc::InvalidConfig, "script line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<ScriptedBackend::Entry> ScriptedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read script " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

BackendReply ScriptedBackend::generate(const std::string& prompt, const GenerationRequest& request) {
  std::lock_guard lk(mu_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (used_[i]) continue;
    const auto& e = entries_[i];
    if (e.matcher && *e.matcher != request.template_id) continue;
    used_[i] = true;
    prompts_.push_back(prompt);
    return BackendReply{e.text, static_cast<std::uint64_t>(e.text.size() / 4 + 1)};
  }
  throw Error(Errc::ScriptExhausted,
              "no scripted response left for " + std::string(to_string(request.template_id)));
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lk(mu_);
  std::size_t n = 0;
  for (bool u : used_) n += u ? 0 : 1;
  return n;
}

std::vector<std::string> ScriptedBackend::prompts() const {
  std::lock_guard lk(mu_);
  return prompts_;
}

}  // namespace moose::llm
