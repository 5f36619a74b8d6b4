#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsearch/diag/metrics.hpp"

namespace rsearch::search {

struct CandidateId {
  int generation = 0;
  int index = 0;

  bool operator==(const CandidateId&) const = default;
  // Lexicographic (generation, index); the selection tie-break order.
  auto operator<=>(const CandidateId&) const = default;

  std::string str() const;  // "g<generation>k<index>"
};

// One evaluated candidate (or the no-shaping baseline, id (0,0)). Immutable
// once appended to the archive.
struct CandidateRecord {
  CandidateId id;
  std::string proposer_id;
  std::string source_text;  // empty for the baseline
  std::string ast_digest;   // canonical-form digest; empty when invalid
  std::string verdict;      // Valid / ParseError / SchemaError / BoundError
  std::string failure_trace;
  int repair_calls = 0;

  // Present iff verdict == Valid and training completed.
  std::optional<double> j_hat;
  std::optional<double> j_std;
  std::optional<double> j_undiscounted;
  std::optional<double> deliveries;
  std::optional<double> invalid_deliveries;
  std::optional<diag::DiagnosticTuple> diagnostics;

  // Conditioning provenance: digest of the prompt this candidate was proposed
  // from and the ids summarized inside it (empty for the baseline).
  std::string context_digest;
  std::vector<CandidateId> context_ids;

  std::string curve_file;  // learning-curve ndjson, relative to the archive dir
  std::string trace_file;  // evaluation trace ndjson, relative to the archive dir
  long long env_steps = 0;

  double wall_clock_sec = 0.0;  // timing; excluded from canonical comparisons

  bool trained() const { return verdict == "Valid" && j_hat.has_value(); }
};

struct Archive {
  std::string layout;
  std::uint64_t master_seed = 0;
  std::string schema_digest;
  std::vector<CandidateRecord> records;

  const CandidateRecord* find(CandidateId id) const;

  // Sorted-key JSON rendering. Timing fields are dropped when
  // include_timing is false, which is the form used for reproducibility
  // comparisons.
  nlohmann::json to_json(bool include_timing = true) const;
  std::string canonical_text(bool include_timing = false) const;

  static Archive from_json(const nlohmann::json& j);
};

void write_archive_file(const Archive& archive, const std::string& path);
Archive read_archive_file(const std::string& path);

nlohmann::json record_to_json(const CandidateRecord& r, bool include_timing);
CandidateRecord record_from_json(const nlohmann::json& j);

}  // namespace rsearch::search
