#pragma once

#include <string_view>

#include "moose/eval/dataset.hpp"

namespace moose::eval {

inline constexpr double kMatchThreshold = 0.70;

/// True when at least 70% of the element's distinct content tokens occur in the hypothesis
/// (both normalized: lowercase, punctuation stripped, stopwords removed from the element).
bool match_element(std::string_view hypothesis, std::string_view element);

/// Fraction of the entry's elements matched by the hypothesis.
double compute_recall(std::string_view hypothesis, const GroundTruthEntry& entry);

std::size_t matched_count(std::string_view hypothesis, const GroundTruthEntry& entry);

}  // namespace moose::eval
