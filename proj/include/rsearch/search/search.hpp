#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rsearch/marl/trainer.hpp"
#include "rsearch/proposer/backend.hpp"
#include "rsearch/search/archive.hpp"
#include "rsearch/search/lineage.hpp"

namespace rsearch::search {

struct SearchConfig {
  std::string layout = "cramped_room";
  int generations = 2;     // G
  int candidates = 4;      // K per generation
  int repair_attempts = 2; // R per candidate
  std::uint64_t master_seed = 0;
  marl::TrainConfig train;
  proposer::BackendConfig backend;
  double epsilon = diag::kDefaultEpsilon;
  double clip_bound = dsl::kDefaultClipBound;
  std::string task_description;  // empty: layout default
  std::string output_dir;        // empty: nothing written
  int jobs = 1;                  // parallel candidate trainings
};

SearchConfig config_from_json(const nlohmann::json& j);
SearchConfig load_config_file(const std::string& path);

// Everything training and evaluation produce for one candidate.
struct CandidateOutcome {
  double j_hat = 0.0;
  double j_std = 0.0;
  double j_undiscounted = 0.0;
  double deliveries = 0.0;
  double invalid_deliveries = 0.0;
  diag::DiagnosticTuple diagnostics;
  std::vector<marl::IterationStats> curve;
  diag::RolloutTrace trace;
  long long env_steps = 0;
};

struct SearchHooks {
  // Test seam replacing train + evaluate + diagnose. Must be thread-safe when
  // config.jobs > 1. The program is absent for the baseline.
  std::function<CandidateOutcome(const std::optional<dsl::CompiledProgram>& program,
                                 CandidateId id, std::uint64_t seed)>
      evaluate_candidate;
};

struct SearchResult {
  Archive archive;
  CandidateId best;
  Lineage lineage;
};

// Promotion decision. Receives ids and sparse-objective scores only, so
// diagnostics cannot influence it. Ties break to the lexicographically
// smallest (generation, index). Throws NoValidCandidatesError when empty.
CandidateId select_best(const std::vector<std::pair<CandidateId, double>>& scored);

// The full loop: train the no-shaping baseline, then for each generation
// build a context, propose K candidates, validate with bounded repair, train
// and evaluate the valid ones on fresh per-candidate seeds, and archive
// everything. Returns the archive, the best record by sparse return, and the
// conditioning lineage. Writes archive/lineage/per-candidate files under
// config.output_dir when it is set.
SearchResult run_search(const SearchConfig& config, proposer::ProposerBackend& backend,
                        const SearchHooks& hooks = {});

void write_curve_file(const std::string& path,
                      const std::vector<marl::IterationStats>& curve);
std::vector<marl::IterationStats> read_curve_file(const std::string& path);

}  // namespace rsearch::search
