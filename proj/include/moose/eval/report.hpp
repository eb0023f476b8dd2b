#pragma once

#include <string>
#include <vector>

#include "moose/eval/pipeline.hpp"

namespace moose::eval {

struct SummaryRow {
  std::string pipeline;
  std::string description;  // empty for pipelines outside the benchmark set
  std::size_t runs = 0;
  std::size_t incomplete = 0;
  double mean_recall = 0.0;
  double mean_search_steps = 0.0;
  bool refines = false;  // "-" in the steps column otherwise
};

/// Per-pipeline arithmetic means, rows in order of first appearance.
std::vector<SummaryRow> aggregate(const std::vector<RunReport>& reports);

std::string render_table(const std::vector<SummaryRow>& rows);
Json summary_json(const std::vector<SummaryRow>& rows);

}  // namespace moose::eval
