#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "moose/llm/templates.hpp"

namespace moose::llm {

struct GenerationRequest {
  TemplateId template_id;
  std::map<std::string, std::string> variables;
  double temperature = 1.0;
  int max_tokens = 1024;
  /// Appended to the rendered prompt when a previous answer could not be parsed.
  std::optional<std::string> repair_note;

  static GenerationRequest make(TemplateId id, std::map<std::string, std::string> vars);
};

struct BackendReply {
  std::string text;
  std::uint64_t tokens_used = 0;
};

/// Retryable transport-level failure (connection reset, 5xx, 429).
class TransportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Backend {
public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  /// True when replies are a pure function of the call sequence.
  virtual bool deterministic() const = 0;
  virtual BackendReply generate(const std::string& prompt, const GenerationRequest& request) = 0;
};

using BackendFactory = std::function<std::shared_ptr<Backend>()>;

/// Replays canned responses. Each call consumes the first unconsumed entry whose matcher is the
/// request's template or the wildcard; nothing is ever reused.
class ScriptedBackend final : public Backend {
public:
  struct Entry {
    std::optional<TemplateId> matcher;  // nullopt = wildcard
    std::string text;
  };

  explicit ScriptedBackend(std::vector<Entry> entries);

  /// Line-delimited {"template": "<id>|*", "text": "..."} records; blank lines ignored.
  static std::vector<Entry> load(const std::filesystem::path& path);
  static std::vector<Entry> parse(std::string_view jsonl);

  std::string name() const override { return "scripted"; }
  bool deterministic() const override { return true; }
  BackendReply generate(const std::string& prompt, const GenerationRequest& request) override;

  std::size_t remaining() const;
  /// Prompts received so far, in call order.
  std::vector<std::string> prompts() const;

private:
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
  std::vector<bool> used_;
  std::vector<std::string> prompts_;
};

/// OpenAI-compatible chat-completions endpoint.
class OpenAiBackend final : public Backend {
public:
  struct Config {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string api_key;
    std::string model;
    int timeout_seconds = 120;
  };

  explicit OpenAiBackend(Config cfg);
  /// Reads MOOSE_API_BASE_URL, MOOSE_API_KEY, MOOSE_MODEL; nullopt when the key or model is unset.
  static std::optional<Config> config_from_env();

  std::string name() const override { return "live:" + cfg_.model; }
  bool deterministic() const override { return false; }
  BackendReply generate(const std::string& prompt, const GenerationRequest& request) override;

private:
  Config cfg_;
};

}  // namespace moose::llm
