#include "moose/error.hpp"

namespace moose {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyQuestion: return "EmptyQuestion";
    case Errc::UnknownParent: return "UnknownParent";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::StepIndexViolation: return "StepIndexViolation";
    case Errc::StageFieldViolation: return "StageFieldViolation";
    case Errc::DuplicateNode: return "DuplicateNode";
    case Errc::InvalidScore: return "InvalidScore";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::ScriptExhausted: return "ScriptExhausted";
    case Errc::TemplateVariableMissing: return "TemplateVariableMissing";
    case Errc::UnknownTemplate: return "UnknownTemplate";
    case Errc::ParseFailure: return "ParseFailure";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::CorpusInvalid: return "CorpusInvalid";
    case Errc::SelectionParseFailure: return "SelectionParseFailure";
    case Errc::InspirationsExhausted: return "InspirationsExhausted";
    case Errc::StageMismatch: return "StageMismatch";
    case Errc::LevelOutOfRange: return "LevelOutOfRange";
    case Errc::ScoreUnavailable: return "ScoreUnavailable";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyFeedback: return "EmptyFeedback";
    case Errc::SameStageRoute: return "SameStageRoute";
    case Errc::InvalidTrace: return "InvalidTrace";
    case Errc::BlueprintImmutable: return "BlueprintImmutable";
    case Errc::MalformedEntry: return "MalformedEntry";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::LeakUnfixable: return "LeakUnfixable";
    case Errc::UnknownPipeline: return "UnknownPipeline";
    case Errc::CorruptSession: return "CorruptSession";
    case Errc::NotFound: return "NotFound";
    case Errc::SessionBusy: return "SessionBusy";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace moose
