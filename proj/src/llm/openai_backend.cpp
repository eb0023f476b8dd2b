#include <cstdlib>

#include <httplib.h>

#include "moose/core/json.hpp"
#include "moose/error.hpp"
#include "moose/llm/backend.hpp"

namespace moose::llm {

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

// Splits "https://host:port/v1" into ("https://host:port", "/v1").
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path == std::string::npos) return {url, ""};
  auto prefix = url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path), prefix};
}

}  // namespace

OpenAiBackend::OpenAiBackend(Config cfg) : cfg_(std::move(cfg)) {
  if (cfg_.base_url.empty()) cfg_.base_url = "https://api.openai.com/v1";
  if (cfg_.model.empty()) throw Error(Errc::InvalidConfig, "live backend needs a model name");
}

std::optional<OpenAiBackend::Config> OpenAiBackend::config_from_env() {
  auto key = env("MOOSE_API_KEY");
  auto model = env("MOOSE_MODEL");
  if (!key || !model) return std::nullopt;
  return Config{env("MOOSE_API_BASE_URL").value_or("https://api.openai.com/v1"), *key, *model};
}

BackendReply OpenAiBackend::generate(const std::string& prompt, const GenerationRequest& request) {
  const auto [host, prefix] = split_url(cfg_.base_url);
  httplib::Client cli(host);
  cli.set_connection_timeout(cfg_.timeout_seconds);
  cli.set_read_timeout(cfg_.timeout_seconds);
  if (!cfg_.api_key.empty()) cli.set_bearer_token_auth(cfg_.api_key);

  const Json body{{"model", cfg_.model},
                  {"messages", Json::array({Json{{"role", "user"}, {"content", prompt}}})},
                  {"temperature", request.temperature},
                  {"max_tokens", request.max_tokens}};
  auto res = cli.Post(prefix + "/chat/completions", body.dump(), "application/json");
  if (!res) throw TransportError("transport failure: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransportError("backend returned HTTP " + std::to_string(res->status));
  if (res->status != 200)
    throw Error(Errc::BackendUnavailable, "backend returned HTTP " + std::to_string(res->status));

  try {
    const auto j = Json::parse(res->body);
    BackendReply reply;
    reply.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage") && j["usage"].contains("total_tokens"))
      reply.tokens_used = j["usage"]["total_tokens"].get<std::uint64_t>();
    return reply;
  } catch (const Json::exception& e) {
    throw Error(Errc::BackendUnavailable, std::string("malformed completion body: ") + e.what());
  }
}

}  // namespace moose::llm
