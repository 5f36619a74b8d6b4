#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rsearch/search/archive.hpp"

namespace rsearch::proposer {

// Prompt budget for the prior-candidate section. Summaries are kept
// best-first until the rendered section would exceed this many bytes.
inline constexpr std::size_t kSummaryByteBudget = 16 * 1024;

struct Context {
  int generation = 1;
  std::string task_description;
  std::string feature_schema;  // rendered instrumentation contract
  std::string dsl_grammar;
  int n_programs = 4;  // K, stated in the output contract

  // Rendered per-candidate summary blocks, best-first, budget-truncated,
  // and the ids they came from (conditioning edges for the lineage graph).
  std::vector<std::string> summaries;
  std::vector<search::CandidateId> included_ids;
};

// Deterministic context construction: summaries sorted by J descending
// (untrained records last), truncated to the byte budget keeping best-first.
Context build_context(const search::Archive& archive, int generation,
                      const std::string& task_description, int n_programs);

// Deterministic prompt document with fixed section order: task, schema,
// grammar, output contract, prior-candidate summaries.
std::string render_prompt(const Context& context);

// fnv1a digest of the rendered prompt; recorded on each candidate.
std::string context_digest(const Context& context);

// Default task text shown to the proposer for a layout.
std::string default_task_description(const std::string& layout_name);

}  // namespace rsearch::proposer
