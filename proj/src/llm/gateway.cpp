#include "moose/llm/gateway.hpp"

#include <thread>

namespace moose::llm {

LlmGateway::LlmGateway(std::shared_ptr<Backend> backend, TemplateSet templates)
    : LlmGateway(std::move(backend), std::move(templates), Options{}) {}

LlmGateway::LlmGateway(std::shared_ptr<Backend> backend, TemplateSet templates, Options options)
    : backend_(std::move(backend)),
      templates_(std::move(templates)),
      options_(options),
      in_flight_(std::make_unique<std::counting_semaphore<>>(std::max(1, options.max_in_flight))) {
  if (!backend_) throw Error(Errc::InvalidConfig, "gateway needs a backend");
}

std::uint64_t LlmGateway::calls(TemplateId id) const noexcept {
  return per_template_[static_cast<std::size_t>(id)].load();
}

std::string LlmGateway::repair_note(const ParseError& e) {
  return "Your previous answer could not be parsed (" + std::string(e.what()) +
         "). Answer again using exactly the delimited fields requested above.";
}

GenerationResult LlmGateway::complete(const GenerationRequest& request) {
  if (request.temperature < 0.0 || request.temperature > 2.0)
    throw Error(Errc::InvalidConfig, "temperature outside [0,2]");
  if (request.max_tokens <= 0) throw Error(Errc::InvalidConfig, "max_tokens must be positive");

  std::string prompt = templates_.render(request.template_id, request.variables);
  if (request.repair_note) prompt += "\n\n" + *request.repair_note;

  auto backoff = options_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    BackendReply reply;
    {
      in_flight_->acquire();
      struct Release {
        std::counting_semaphore<>* s;
        ~Release() { s->release(); }
      } release{in_flight_.get()};
      try {
        reply = backend_->generate(prompt, request);
      } catch (const TransportError& e) {
        if (attempt >= options_.max_attempts)
          throw Error(Errc::BackendUnavailable,
                      std::string(e.what()) + " (after " + std::to_string(attempt) + " attempts)");
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
        continue;
      }
    }
    GenerationResult out;
    out.text = std::move(reply.text);
    out.backend = backend_->name();
    out.tokens_used = reply.tokens_used;
    out.call_index = ++call_index_;
    tokens_ += reply.tokens_used;
    ++per_template_[static_cast<std::size_t>(request.template_id)];
    return out;
  }
}

std::map<std::string, std::string> LlmGateway::complete_parsed(const GenerationRequest& request,
                                                               const std::vector<std::string>& schema) {
  const auto result = complete(request);
  return parse_fields(result.text, schema);
}

}  // namespace moose::llm
