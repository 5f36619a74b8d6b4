#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsearch::dsl {

// Where a candidate program came from; carried through archive records.
struct ProgramMeta {
  std::string proposer_id;
  int generation = 0;
  int candidate_index = 0;
};

struct ProgramSource {
  std::string text;
  ProgramMeta meta;
};

inline constexpr std::size_t kMaxSourceBytes = 64 * 1024;

enum class ExprKind { Literal, Feature, SparseReward, LetRef, Unary, Binary, Call, Ternary };

enum class BinaryOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne };
enum class CallOp { Min, Max, Abs, Clip };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind;
  double literal = 0.0;
  std::string name;      // feature name or let-binding name
  int agent_index = -1;  // feature subscript; -1 when absent
  BinaryOp binary_op = BinaryOp::Add;
  CallOp call_op = CallOp::Min;
  std::vector<ExprPtr> args;
  int line = 0;
  int col = 0;
};

struct LetBinding {
  std::string name;
  ExprPtr value;
  int line = 0;
  int col = 0;
};

struct ProgramAST {
  std::vector<LetBinding> let_bindings;
  std::vector<ExprPtr> agent_exprs;  // index i shapes agent i

  int n_agents() const { return static_cast<int>(agent_exprs.size()); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int col, std::vector<std::string> expected = {})
      : std::runtime_error(std::move(message)),
        line_(line),
        col_(col),
        expected_(std::move(expected)) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_;
  int col_;
  std::vector<std::string> expected_;
};

}  // namespace rsearch::dsl
