#include "moose/eval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <array>
#include <map>

namespace moose::eval {

std::vector<SummaryRow> aggregate(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw Error(Errc::InvalidConfig, "nothing to aggregate");
  std::vector<SummaryRow> rows;
  std::map<std::string, std::size_t> index;
  std::vector<double> recall_sum, steps_sum;
  for (const auto& r : reports) {
    auto [it, fresh] = index.emplace(r.pipeline, rows.size());
    if (fresh) {
      SummaryRow row;
      row.pipeline = r.pipeline;
      for (const auto& b : benchmark_pipelines())
        if (b.spec.name == r.pipeline) {
          row.description = b.description;
          row.refines = b.spec.run_refinement;
        }
      rows.push_back(std::move(row));
      recall_sum.push_back(0.0);
      steps_sum.push_back(0.0);
    }
    auto& row = rows[it->second];
    ++row.runs;
    if (!r.complete) ++row.incomplete;
    if (r.total_refinement_steps > 0) row.refines = true;
    recall_sum[it->second] += r.recall;
    steps_sum[it->second] += static_cast<double>(r.search_steps);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].mean_recall = recall_sum[i] / static_cast<double>(rows[i].runs);
    rows[i].mean_search_steps = steps_sum[i] / static_cast<double>(rows[i].runs);
  }
  return rows;
}

std::string render_table(const std::vector<SummaryRow>& rows) {
  const std::string headers[] = {"Method Name", "Description", "Recall", "# Search Steps"};
  std::vector<std::array<std::string, 4>> cells;
  for (const auto& r : rows) {
    char recall[32], steps[32];
    std::snprintf(recall, sizeof recall, "%.2f%%", r.mean_recall * 100.0);
    std::snprintf(steps, sizeof steps, "%.1f", r.mean_search_steps);
    cells.push_back({r.pipeline, r.description.empty() ? "-" : r.description, recall, r.refines ? steps : "-"});
  }
  std::size_t width[4];
  for (int c = 0; c < 4; ++c) {
    width[c] = headers[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::array<std::string, 4>& v) {
    std::string s;
    for (int c = 0; c < 4; ++c) {
      if (c) s += " | ";
      s += v[c];
      if (c < 3) s.append(width[c] - v[c].size(), ' ');
    }
    return s + "\n";
  };
  std::string out = line({headers[0], headers[1], headers[2], headers[3]});
  for (int c = 0; c < 4; ++c) {
    if (c) out += "-|-";
    out.append(width[c], '-');
  }
  out += "\n";
  for (const auto& row : cells) out += line(row);
  return out;
}

Json summary_json(const std::vector<SummaryRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    Json j{{"pipeline", r.pipeline},      {"description", r.description}, {"runs", r.runs},
           {"incomplete", r.incomplete},  {"mean_recall", r.mean_recall}};
    if (r.refines)
      j["mean_search_steps"] = r.mean_search_steps;
    else
      j["mean_search_steps"] = nullptr;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace moose::eval
