#pragma once

#include <algorithm>

#include "moose/refine/engine.hpp"
#include "testkit.hpp"

namespace testkit {

// Feeds scores from a list in call order (0 once exhausted), proposals append a level marker.
inline std::shared_ptr<FnBackend> sequence_backend(std::vector<double> scores) {
  auto pos = std::make_shared<std::size_t>(0);
  return std::make_shared<FnBackend>([scores, pos](const llm::GenerationRequest& r) {
    if (r.template_id == llm::TemplateId::ProposeRefinement)
      return llm::wrap_field("hypothesis", var(r, "hypothesis") + " [L" + var(r, "level").substr(0, 1) + "]");
    const double s = *pos < scores.size() ? scores[(*pos)++] : 0.0;
    return score_fields(s);
  });
}

// Independent simulation of the hill climb over a flat score stream.
struct Sim {
  std::size_t steps = 0;
  double best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> level_steps;  // (level, proposal calls)
};

inline Sim simulate(const std::vector<double>& scores, const refine::RefineConfig& c) {
  std::size_t pos = 0;
  auto next = [&] { return pos < scores.size() ? scores[pos++] : 0.0; };
  Sim s;
  s.best = next();
  for (std::size_t level = 0; level < c.levels.size(); ++level) {
    std::size_t iters = 0, stale = 0, calls = 0;
    while (iters < c.max_steps_per_level && stale < c.patience) {
      double top = -1;
      for (std::size_t p = 0; p < c.proposals_per_step; ++p) {
        ++calls;
        top = std::max(top, next());
      }
      ++iters;
      if (top > s.best) {
        s.best = top;
        stale = 0;
      } else {
        ++stale;
      }
    }
    s.steps += calls;
    s.level_steps.emplace_back(level, calls);
  }
  return s;
}

}  // namespace testkit
