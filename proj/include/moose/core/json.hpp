#pragma once

#include <json.hpp>

#include "moose/core/tree.hpp"
#include "moose/core/types.hpp"

namespace moose {

using Json = nlohmann::json;

template <class Tag>
void to_json(Json& j, const BasicId<Tag>& id) {
  j = id.value;
}
template <class Tag>
void from_json(const Json& j, BasicId<Tag>& id) {
  id.value = j.get<std::string>();
}

void to_json(Json& j, Stage s);
void from_json(const Json& j, Stage& s);
void to_json(Json& j, const ContextAddition& a);
void from_json(const Json& j, ContextAddition& a);
void to_json(Json& j, const ResearchContext& c);
void from_json(const Json& j, ResearchContext& c);
void to_json(Json& j, const Inspiration& i);
void from_json(const Json& j, Inspiration& i);
void to_json(Json& j, const EvaluationScore& s);
void from_json(const Json& j, EvaluationScore& s);
void to_json(Json& j, const HypothesisNode& n);
void from_json(const Json& j, HypothesisNode& n);

/// Canonical tree document: {root, active, nodes[] sorted by id}. Keys are emitted sorted.
Json export_tree(const SearchTree& tree);

/// Serialized bytes used for byte-exact comparisons and persistence.
std::string canonical_dump(const Json& j);

}  // namespace moose
