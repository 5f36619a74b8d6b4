#include "rsearch/dsl/program.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rsearch/common/errors.hpp"
#include "rsearch/common/rng.hpp"
#include "rsearch/dsl/parser.hpp"

namespace rsearch::dsl {
namespace {

std::string span(int line, int col) {
  return "line " + std::to_string(line) + ", col " + std::to_string(col) + ": ";
}

struct Check {
  const env::FeatureSchema& schema;
  int n_agents;
  std::vector<std::pair<Verdict, std::string>> findings;

  void walk(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Literal:
        if (!std::isfinite(e.literal))
          findings.emplace_back(Verdict::BoundError,
                                span(e.line, e.col) + "non-finite literal");
        break;
      case ExprKind::Feature: {
        const env::FeatureDef* def = schema.find(e.name);
        if (def == nullptr) {
          findings.emplace_back(Verdict::SchemaError,
                                span(e.line, e.col) + "unknown feature 'x." + e.name + "'");
          break;
        }
        if (def->per_agent && e.agent_index < 0)
          findings.emplace_back(Verdict::SchemaError,
                                span(e.line, e.col) + "per-agent feature 'x." + e.name +
                                    "' needs an agent subscript");
        if (!def->per_agent && e.agent_index >= 0)
          findings.emplace_back(Verdict::SchemaError,
                                span(e.line, e.col) + "global feature 'x." + e.name +
                                    "' does not take a subscript");
        if (def->per_agent && e.agent_index >= n_agents)
          findings.emplace_back(
              Verdict::SchemaError,
              span(e.line, e.col) + "agent index " + std::to_string(e.agent_index) +
                  " out of range for " + std::to_string(n_agents) + " agents");
        break;
      }
      default:
        break;
    }
    for (const auto& arg : e.args) walk(*arg);
  }
};

double eval_expr(const Expr& e, const CompiledProgram& program,
                 const env::FeatureVector& features, double r_sparse,
                 std::vector<double>& let_values) {
  auto arg = [&](std::size_t i) {
    return eval_expr(*e.args[i], program, features, r_sparse, let_values);
  };
  switch (e.kind) {
    case ExprKind::Literal:
      return e.literal;
    case ExprKind::SparseReward:
      return r_sparse;
    case ExprKind::Feature:
      return e.agent_index >= 0 ? features.get(e.name, e.agent_index)
                                : features.get(e.name);
    case ExprKind::LetRef:
      return let_values[static_cast<std::size_t>(e.agent_index)];
    case ExprKind::Unary:
      return -arg(0);
    case ExprKind::Binary: {
      double a = arg(0), b = arg(1);
      switch (e.binary_op) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return b == 0.0 ? 0.0 : a / b;
        case BinaryOp::Lt: return a < b ? 1.0 : 0.0;
        case BinaryOp::Le: return a <= b ? 1.0 : 0.0;
        case BinaryOp::Gt: return a > b ? 1.0 : 0.0;
        case BinaryOp::Ge: return a >= b ? 1.0 : 0.0;
        case BinaryOp::Eq: return a == b ? 1.0 : 0.0;
        case BinaryOp::Ne: return a != b ? 1.0 : 0.0;
      }
      return 0.0;
    }
    case ExprKind::Call:
      switch (e.call_op) {
        case CallOp::Min: return std::fmin(arg(0), arg(1));
        case CallOp::Max: return std::fmax(arg(0), arg(1));
        case CallOp::Abs: return std::fabs(arg(0));
        case CallOp::Clip: {
          double v = arg(0), lo = arg(1), hi = arg(2);
          if (lo > hi) std::swap(lo, hi);
          return std::clamp(v, lo, hi);
        }
      }
      return 0.0;
    case ExprKind::Ternary:
      return arg(0) != 0.0 ? arg(1) : arg(2);
  }
  return 0.0;
}

// Probe vector with arbitrary but reproducible values on every schema entry.
env::FeatureVector probe_vector(const env::FeatureSchema& schema, int n_agents) {
  env::FeatureVector probe;
  probe.schema_digest = schema.digest();
  Rng rng(std::stoull(schema.digest().substr(0, 16), nullptr, 16));
  for (const auto& def : schema.entries()) {
    if (def.per_agent) {
      for (int i = 0; i < n_agents; ++i)
        probe.set_agent(def.name, i, rng.uniform(-3.0, 3.0));
    } else {
      probe.set(def.name, rng.uniform(-3.0, 3.0));
    }
  }
  return probe;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Valid: return "Valid";
    case Verdict::ParseError: return "ParseError";
    case Verdict::SchemaError: return "SchemaError";
    case Verdict::BoundError: return "BoundError";
  }
  return "?";
}

ValidityReport validate(ProgramAST ast, const env::FeatureSchema& schema,
                        double clip_bound, std::optional<CompiledProgram>& out) {
  out.reset();
  ValidityReport report;

  Check check{schema, ast.n_agents(), {}};
  if (!(std::isfinite(clip_bound) && clip_bound > 0.0))
    check.findings.emplace_back(Verdict::BoundError,
                                "clip bound must be finite and positive");
  for (const auto& binding : ast.let_bindings) check.walk(*binding.value);
  for (const auto& e : ast.agent_exprs) check.walk(*e);

  if (!check.findings.empty()) {
    report.verdict = check.findings.front().first;
    for (auto& [verdict, message] : check.findings) report.messages.push_back(message);
    std::ostringstream trace;
    trace << verdict_name(report.verdict) << ": ";
    for (std::size_t i = 0; i < report.messages.size(); ++i) {
      if (i > 0) trace << "; ";
      trace << report.messages[i];
    }
    report.repair_trace = trace.str();
    return report;
  }

  CompiledProgram program(std::move(ast), schema.digest(), clip_bound);
  env::FeatureVector probe = probe_vector(schema, program.n_agents());
  std::vector<double> first = evaluate(program, probe, 20.0);
  std::vector<double> second = evaluate(program, probe, 20.0);
  if (first != second) {
    report.verdict = Verdict::BoundError;
    report.messages.push_back("determinism probe produced diverging outputs");
    report.repair_trace = "BoundError: " + report.messages.back();
    return report;
  }

  out.emplace(std::move(program));
  return report;
}

ValidityReport compile(const ProgramSource& source, const env::FeatureSchema& schema,
                       double clip_bound, std::optional<CompiledProgram>& out,
                       int n_agents) {
  out.reset();
  try {
    ProgramAST ast = parse(source, n_agents);
    return validate(std::move(ast), schema, clip_bound, out);
  } catch (const ParseError& e) {
    ValidityReport report;
    report.verdict = Verdict::ParseError;
    std::string message = span(e.line(), e.col()) + e.what();
    if (!e.expected().empty()) {
      message += " (expected ";
      for (std::size_t i = 0; i < e.expected().size(); ++i) {
        if (i > 0) message += " or ";
        message += e.expected()[i];
      }
      message += ")";
    }
    report.messages.push_back(message);
    report.repair_trace = "ParseError: " + message;
    return report;
  }
}

std::vector<double> evaluate(const CompiledProgram& program,
                             const env::FeatureVector& features, double r_sparse) {
  if (features.schema_digest != program.schema_hash())
    throw SchemaMismatchError("feature vector digest " + features.schema_digest +
                              " does not match program schema " + program.schema_hash());

  const ProgramAST& ast = program.ast();
  std::vector<double> let_values;
  let_values.reserve(ast.let_bindings.size());
  for (const auto& binding : ast.let_bindings)
    let_values.push_back(
        eval_expr(*binding.value, program, features, r_sparse, let_values));

  double bound = program.clip_bound();
  std::vector<double> out(ast.agent_exprs.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = eval_expr(*ast.agent_exprs[i], program, features, r_sparse, let_values);
    if (std::isnan(v)) v = 0.0;
    out[i] = std::clamp(v, -bound, bound);
  }
  return out;
}

const std::string& grammar_ebnf() {
  static const std::string grammar = R"EBNF(program        = { let_stmt } , output_stmt , { output_stmt } ;
let_stmt       = "let" , ident , "=" , expr , ";" ;
output_stmt    = "r" , "[" , integer , "]" , "=" , expr , ";"
                 (* one per agent index, each exactly once *) ;
expr           = ternary ;
ternary        = comparison , [ "?" , ternary , ":" , ternary ] ;
comparison     = additive , [ ( "<" | "<=" | ">" | ">=" | "==" | "!=" ) , additive ] ;
additive       = multiplicative , { ( "+" | "-" ) , multiplicative } ;
multiplicative = unary , { ( "*" | "/" ) , unary } ;
unary          = "-" , unary | primary ;
primary        = number | "r_sparse" | feature | ident | call | "(" , expr , ")" ;
feature        = "x" , "." , ident , [ "[" , integer , "]" ]
                 (* subscript required for per-agent features, forbidden for globals *) ;
call           = "min" , "(" , expr , "," , expr , ")"
               | "max" , "(" , expr , "," , expr , ")"
               | "abs" , "(" , expr , ")"
               | "clip" , "(" , expr , "," , expr , "," , expr , ")" ;
number         = digit , { digit } , [ "." , { digit } ] , [ exponent ] ;
ident          = ( letter | "_" ) , { letter | digit | "_" } ;
comment        = "#" , anything to end of line ;

Semantics: comparisons yield 1 or 0; the ternary tests cond != 0; division by
zero yields 0; clip(v, lo, hi) clamps v to [lo, hi]; every output is clipped
to [-C, C]. Identifiers in expressions must be let-bound earlier; features are
read as x.<name>[i] (per-agent) or x.<name> (global); r_sparse is the shared
sparse team reward for the step.)EBNF";
  return grammar;
}

}  // namespace rsearch::dsl
