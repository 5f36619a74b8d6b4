#include "rsearch/proposer/context.hpp"

#include <algorithm>
#include <cstdio>

#include "rsearch/common/rng.hpp"
#include "rsearch/dsl/program.hpp"
#include "rsearch/env/features.hpp"

namespace rsearch::proposer {
namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string excerpt(const std::string& source) {
  constexpr std::size_t kMax = 800;
  if (source.empty()) return "(no shaping; sparse baseline)\n";
  if (source.size() <= kMax) return source;
  return source.substr(0, kMax) + "\n# ... truncated\n";
}

std::string render_summary(const search::CandidateRecord& r) {
  std::string s = "## Candidate " + r.id.str() + " [" + r.verdict + "]";
  if (r.j_hat) s += " J=" + num(*r.j_hat);
  s += "\n";
  if (r.diagnostics) {
    const auto& d = *r.diagnostics;
    s += "delta=" + num(d.delta) + " rho=" + num(d.rho) + " nmi=" + num(d.nmi);
    if (r.deliveries) s += " deliveries=" + num(*r.deliveries);
    s += "\n";
  }
  if (!r.failure_trace.empty()) s += "failure: " + r.failure_trace + "\n";
  s += "```\n" + excerpt(r.source_text);
  if (s.back() != '\n') s += "\n";
  s += "```\n";
  return s;
}

}  // namespace

Context build_context(const search::Archive& archive, int generation,
                      const std::string& task_description, int n_programs) {
  Context ctx;
  ctx.generation = generation;
  ctx.task_description = task_description;
  ctx.feature_schema = env::FeatureSchema::instance().describe();
  ctx.dsl_grammar = dsl::grammar_ebnf();
  ctx.n_programs = n_programs;

  std::vector<const search::CandidateRecord*> order;
  for (const auto& r : archive.records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const search::CandidateRecord* a, const search::CandidateRecord* b) {
                     if (a->j_hat.has_value() != b->j_hat.has_value())
                       return a->j_hat.has_value();
                     if (a->j_hat && b->j_hat && *a->j_hat != *b->j_hat)
                       return *a->j_hat > *b->j_hat;
                     return a->id < b->id;
                   });

  std::size_t used = 0;
  for (const auto* r : order) {
    std::string block = render_summary(*r);
    if (used + block.size() > kSummaryByteBudget) break;
    used += block.size();
    ctx.summaries.push_back(std::move(block));
    ctx.included_ids.push_back(r->id);
  }
  return ctx;
}

std::string render_prompt(const Context& context) {
  std::string p;
  p += "# Task\n" + context.task_description + "\n";
  p += "\n# Instrumentation schema\n" + context.feature_schema;
  p += "\n# Reward program grammar\n" + context.dsl_grammar;
  p += "\n# Output contract\n";
  p += "Emit exactly " + std::to_string(context.n_programs) +
       " reward programs. Number them 1 through " + std::to_string(context.n_programs) +
       " and place each in its own ``` fenced code block. Output nothing outside the "
       "numbered fenced blocks.\n";
  p += "\n# Prior candidates (best first)\n";
  if (context.summaries.empty()) {
    p += "(none yet; this is generation " + std::to_string(context.generation) + ")\n";
  } else {
    for (const auto& s : context.summaries) p += s + "\n";
  }
  return p;
}

std::string context_digest(const Context& context) {
  return fnv1a_hex(render_prompt(context));
}

std::string default_task_description(const std::string& layout_name) {
  std::string base =
      "Two cooks share a small kitchen (layout: " + layout_name +
      "). They must fetch onions, load three into a pot, wait for the soup to cook, "
      "plate it with a dish, and deliver it at the serve window. Each delivery earns a "
      "shared reward of 20; nothing else is rewarded. Episodes last 200 steps.\n"
      "Write per-agent reward programs (outputs r[0], r[1], each clipped to [-1, 1]) "
      "that provide denser feedback during learning. The programs see the step "
      "instrumentation listed below.";
  if (layout_name == "coordination_ring")
    base += "\nThe kitchen is a narrow ring: the cooks block each other unless they "
            "circulate in a coordinated direction.";
  if (layout_name == "forced_coordination")
    base += "\nA divider splits the kitchen: one cook can only reach dispensers, the "
            "other only the pot and serve window, so items must be passed across "
            "counters.";
  return base;
}

}  // namespace rsearch::proposer
