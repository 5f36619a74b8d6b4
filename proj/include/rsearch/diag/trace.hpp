#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rsearch::diag {

// One environment step of an evaluation rollout.
struct TraceStep {
  int episode = 0;
  int t = 0;
  std::vector<double> shaping;  // r^(p) per agent
  std::vector<int> actions;     // joint action, one symbol per agent
  double sparse = 0.0;

  bool operator==(const TraceStep&) const = default;
};

// Episode-delimited rollout record; steps are stored in emission order and
// grouped into episodes by runs of equal episode ids.
struct RolloutTrace {
  std::vector<TraceStep> steps;

  bool operator==(const RolloutTrace&) const = default;
  int n_agents() const;
  // [begin, end) index pairs, one per episode.
  std::vector<std::pair<std::size_t, std::size_t>> episode_ranges() const;
};

// Newline-delimited JSON, one step per line:
//   {"episode": e, "t": t, "shaping": [...], "actions": [...], "sparse": s}
void write_trace(std::ostream& out, const RolloutTrace& trace);
void write_trace_file(const std::string& path, const RolloutTrace& trace);
RolloutTrace read_trace(std::istream& in);
RolloutTrace read_trace_file(const std::string& path);

}  // namespace rsearch::diag
