#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <type_traits>

#include "moose/error.hpp"
#include "moose/llm/backend.hpp"
#include "moose/llm/fields.hpp"
#include "moose/llm/templates.hpp"

namespace moose::llm {

struct GenerationResult {
  std::string text;
  std::string backend;
  std::uint64_t tokens_used = 0;
  std::uint64_t call_index = 0;
};

/// Uniform front door to a text-generation backend: template rendering, bounded retries,
/// an in-flight limit, and per-template call accounting.
class LlmGateway {
public:
  struct Options {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    int max_in_flight = 4;
    int max_repairs = 2;
  };

  explicit LlmGateway(std::shared_ptr<Backend> backend, TemplateSet templates = TemplateSet::builtin());
  LlmGateway(std::shared_ptr<Backend> backend, TemplateSet templates, Options options);

  GenerationResult complete(const GenerationRequest& request);

  std::map<std::string, std::string> complete_parsed(const GenerationRequest& request,
                                                     const std::vector<std::string>& schema);

  /// Calls the backend and hands the text to `parse`. A ParseError from `parse` triggers a
  /// repair call (same template, with a format reminder) up to Options::max_repairs times.
  template <class Parse>
  auto complete_with_repairs(GenerationRequest request, Parse&& parse)
      -> std::invoke_result_t<Parse&, const std::string&> {
    for (int attempt = 0;; ++attempt) {
      const auto result = complete(request);
      try {
        return parse(result.text);
      } catch (const ParseError& e) {
        if (attempt >= options_.max_repairs) throw;
        request.repair_note = repair_note(e);
      }
    }
  }

  const Backend& backend() const noexcept { return *backend_; }
  bool deterministic() const noexcept { return backend_->deterministic(); }
  const TemplateSet& templates() const noexcept { return templates_; }

  std::uint64_t total_calls() const noexcept { return call_index_.load(); }
  std::uint64_t calls(TemplateId id) const noexcept;
  std::uint64_t tokens_used() const noexcept { return tokens_.load(); }

private:
  static std::string repair_note(const ParseError& e);

  std::shared_ptr<Backend> backend_;
  TemplateSet templates_;
  Options options_;
  std::atomic<std::uint64_t> call_index_{0};
  std::atomic<std::uint64_t> tokens_{0};
  std::array<std::atomic<std::uint64_t>, std::size(kAllTemplates)> per_template_{};
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace moose::llm
