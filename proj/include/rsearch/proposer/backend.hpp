#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rsearch/dsl/program.hpp"
#include "rsearch/proposer/context.hpp"

namespace rsearch::proposer {

struct BackendConfig {
  std::string kind = "scripted";  // "scripted" | "remote"

  // Scripted: directory with gen<g>/cand<k>.rwd files and an optional
  // repairs.json mapping source digests to corrected sources.
  std::string fixture_dir;

  // Remote: chat-style HTTP completion endpoint.
  std::string endpoint;  // e.g. http://host:port/v1/chat/completions
  std::string model;
  double temperature = 0.7;
  std::string auth_env = "RSEARCH_API_TOKEN";  // env var holding the bearer token
  int timeout_ms = 30000;
  int retries = 2;  // additional attempts after the first failure
};

class ProposerBackend {
 public:
  virtual ~ProposerBackend() = default;

  // Up to `n` candidate sources for the context's generation. Short returns
  // are allowed; empty scripted pools yield an empty list, while a remote
  // response without fenced blocks throws ExtractionEmptyError.
  virtual std::vector<dsl::ProgramSource> propose(const Context& context, int n) = 0;

  // One repair attempt conditioned on the failure report. Returns nothing
  // when the backend has no correction to offer.
  virtual std::optional<dsl::ProgramSource> repair(const Context& context,
                                                   const dsl::ProgramSource& source,
                                                   const dsl::ValidityReport& report) = 0;

  virtual std::string id() const = 0;
};

// Deterministic fixture-pool backend: gen<g>/cand<k>.rwd (k starting at 1)
// plus repairs.json, a {fnv1a(source) -> corrected source} map.
class ScriptedBackend : public ProposerBackend {
 public:
  explicit ScriptedBackend(std::string fixture_dir);

  std::vector<dsl::ProgramSource> propose(const Context& context, int n) override;
  std::optional<dsl::ProgramSource> repair(const Context& context,
                                           const dsl::ProgramSource& source,
                                           const dsl::ValidityReport& report) override;
  std::string id() const override { return "scripted"; }

 private:
  std::string dir_;
  std::map<std::string, std::string> repairs_;  // source digest -> corrected text
};

// HTTP chat-completion backend. Sends {model, messages, temperature}, reads
// choices[0].message.content, and extracts fenced program blocks. Bounded
// retries; BackendUnreachableError once they are exhausted.
class RemoteBackend : public ProposerBackend {
 public:
  explicit RemoteBackend(BackendConfig config);

  std::vector<dsl::ProgramSource> propose(const Context& context, int n) override;
  std::optional<dsl::ProgramSource> repair(const Context& context,
                                           const dsl::ProgramSource& source,
                                           const dsl::ValidityReport& report) override;
  std::string id() const override { return "remote:" + config_.model; }

 private:
  std::string complete(const std::string& prompt);
  BackendConfig config_;
};

std::unique_ptr<ProposerBackend> make_backend(const BackendConfig& config);

// Extracts the bodies of ``` fenced blocks, in order of appearance. Language
// tags on the opening fence are ignored.
std::vector<std::string> extract_fenced_blocks(const std::string& text);

// Validation with a bounded repair loop. Compiles the source; on ParseError
// or SchemaError asks the backend for a correction, at most `attempts` times,
// re-validating each returned source. BoundError never triggers repair.
struct RepairOutcome {
  std::optional<dsl::CompiledProgram> program;
  dsl::ProgramSource source;   // last source examined (possibly repaired)
  dsl::ValidityReport report;  // report for that source
  int repair_calls = 0;
};

RepairOutcome validate_with_repair(ProposerBackend& backend, const Context& context,
                                   dsl::ProgramSource source,
                                   const env::FeatureSchema& schema, double clip_bound,
                                   int attempts);

}  // namespace rsearch::proposer
