#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace moose {

enum class Errc {
  EmptyQuestion,
  UnknownParent,
  UnknownNode,
  StepIndexViolation,
  StageFieldViolation,
  DuplicateNode,
  InvalidScore,
  // llm
  BackendUnavailable,
  ScriptExhausted,
  TemplateVariableMissing,
  UnknownTemplate,
  ParseFailure,
  // exploration
  EmptyCorpus,
  CorpusInvalid,
  SelectionParseFailure,
  InspirationsExhausted,
  StageMismatch,
  // refinement
  LevelOutOfRange,
  ScoreUnavailable,
  InvalidConfig,
  // protocol
  EmptyFeedback,
  SameStageRoute,
  InvalidTrace,
  BlueprintImmutable,
  // evaluation
  MalformedEntry,
  EmptyDataset,
  LeakUnfixable,
  UnknownPipeline,
  // persistence / service
  CorruptSession,
  NotFound,
  SessionBusy,
  Io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

/// Parse failure that keeps the raw model output so the caller can decide on a repair.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::string raw)
      : Error(Errc::ParseFailure, what), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

private:
  std::string raw_;
};

}  // namespace moose
