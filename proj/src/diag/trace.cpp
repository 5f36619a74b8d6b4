#include "rsearch/diag/trace.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rsearch/env/sim.hpp"

namespace rsearch::diag {

int RolloutTrace::n_agents() const {
  return steps.empty() ? 0 : static_cast<int>(steps.front().shaping.size());
}

std::vector<std::pair<std::size_t, std::size_t>> RolloutTrace::episode_ranges() const {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= steps.size(); ++i) {
    if (i == steps.size() || steps[i].episode != steps[begin].episode) {
      ranges.emplace_back(begin, i);
      begin = i;
    }
  }
  return ranges;
}

void write_trace(std::ostream& out, const RolloutTrace& trace) {
  for (const auto& step : trace.steps) {
    nlohmann::json line{{"episode", step.episode},
                        {"t", step.t},
                        {"shaping", step.shaping},
                        {"actions", step.actions},
                        {"sparse", step.sparse}};
    out << line.dump() << "\n";
  }
}

void write_trace_file(const std::string& path, const RolloutTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  write_trace(out, trace);
}

RolloutTrace read_trace(std::istream& in) {
  RolloutTrace trace;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    TraceStep step;
    step.episode = j.at("episode").get<int>();
    step.t = j.at("t").get<int>();
    step.shaping = j.at("shaping").get<std::vector<double>>();
    step.actions = j.at("actions").get<std::vector<int>>();
    step.sparse = j.at("sparse").get<double>();
    for (int a : step.actions)
      if (a < 0 || a >= env::kNumActions)
        throw std::runtime_error("trace line " + std::to_string(lineno) +
                                 ": action symbol " + std::to_string(a) + " out of range");
    if (step.actions.size() != step.shaping.size())
      throw std::runtime_error("trace line " + std::to_string(lineno) +
                               ": shaping/action arity mismatch");
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

RolloutTrace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return read_trace(in);
}

}  // namespace rsearch::diag
