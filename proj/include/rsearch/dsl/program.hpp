#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsearch/dsl/ast.hpp"
#include "rsearch/env/features.hpp"

namespace rsearch::dsl {

enum class Verdict { Valid, ParseError, SchemaError, BoundError };

std::string verdict_name(Verdict v);

struct ValidityReport {
  Verdict verdict = Verdict::Valid;
  std::vector<std::string> messages;  // each prefixed with a source span
  std::string repair_trace;           // error text for conditioning a repair attempt

  bool valid() const { return verdict == Verdict::Valid; }
};

// A validated program ready for evaluation. Immutable; safe to share across
// threads.
class CompiledProgram {
 public:
  CompiledProgram(ProgramAST ast, std::string schema_hash, double clip_bound)
      : ast_(std::move(ast)),
        schema_hash_(std::move(schema_hash)),
        clip_bound_(clip_bound) {}

  const ProgramAST& ast() const { return ast_; }
  const std::string& schema_hash() const { return schema_hash_; }
  double clip_bound() const { return clip_bound_; }
  int n_agents() const { return ast_.n_agents(); }

 private:
  ProgramAST ast_;
  std::string schema_hash_;
  double clip_bound_;
};

inline constexpr double kDefaultClipBound = 1.0;

// Checks feature references against the schema, rejects non-finite literals,
// and runs a determinism probe. On Valid the compiled program is returned.
ValidityReport validate(ProgramAST ast, const env::FeatureSchema& schema,
                        double clip_bound, std::optional<CompiledProgram>& out);

// parse + validate with parse failures folded into the report.
ValidityReport compile(const ProgramSource& source, const env::FeatureSchema& schema,
                       double clip_bound, std::optional<CompiledProgram>& out,
                       int n_agents = 2);

// Evaluates the shaping vector for one step. Missing feature entries read as
// zero; division by zero yields zero; the result is clipped to [-C, C] per
// component. Throws SchemaMismatchError when the vector's schema digest
// differs from the program's.
std::vector<double> evaluate(const CompiledProgram& program,
                             const env::FeatureVector& features, double r_sparse);

// The published grammar, embedded verbatim in proposer prompts.
const std::string& grammar_ebnf();

}  // namespace rsearch::dsl
