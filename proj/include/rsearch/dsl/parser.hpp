#pragma once

#include <string>

#include "rsearch/dsl/ast.hpp"

namespace rsearch::dsl {

// Parses a program expecting exactly n_agents output assignments r[0..n-1].
// Throws ParseError with line/column and the expected-token set.
ProgramAST parse(const ProgramSource& source, int n_agents = 2);

// Canonical re-serialization; parse(pretty_print(ast)) is alpha-equivalent to ast.
std::string pretty_print(const ProgramAST& ast);

// Structural equality up to renaming of let-bound identifiers.
bool alpha_equivalent(const ProgramAST& a, const ProgramAST& b);

}  // namespace rsearch::dsl
