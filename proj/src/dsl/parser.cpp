#include "rsearch/dsl/parser.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <utility>

namespace rsearch::dsl {
namespace {

enum class Tok {
  End,
  Let,
  Ident,
  Number,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Semicolon,
  Assign,
  Plus,
  Minus,
  Star,
  Slash,
  Lt,
  Le,
  Gt,
  Ge,
  EqEq,
  Ne,
  Question,
  Colon,
  Dot,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int col = 1;
};

std::string token_desc(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments();
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++pos_;
        ++line_;
        col_ = 1;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
        ++col_;
      } else {
        break;
      }
    }
  }

  Token next() {
    if (pos_ >= src_.size()) return {Tok::End, "", 0.0, line_, col_};
    int line = line_, col = col_;
    char c = src_[pos_];

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      std::string word = src_.substr(start, pos_ - start);
      return {word == "let" ? Tok::Let : Tok::Ident, word, 0.0, line, col};
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        advance();
      if (pos_ < src_.size() && src_[pos_] == '.') {
        advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          advance();
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t mark = pos_;
        advance();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            advance();
        } else {
          pos_ = mark;  // bare 'e' belongs to the next token
        }
      }
      std::string text = src_.substr(start, pos_ - start);
      return {Tok::Number, text, std::strtod(text.c_str(), nullptr), line, col};
    }

    auto two = [&](char second, Tok kind, Tok fallback) {
      advance();
      if (pos_ < src_.size() && src_[pos_] == second) {
        advance();
        return Token{kind, std::string(1, c) + second, 0.0, line, col};
      }
      return Token{fallback, std::string(1, c), 0.0, line, col};
    };

    switch (c) {
      case '(': advance(); return {Tok::LParen, "(", 0.0, line, col};
      case ')': advance(); return {Tok::RParen, ")", 0.0, line, col};
      case '[': advance(); return {Tok::LBracket, "[", 0.0, line, col};
      case ']': advance(); return {Tok::RBracket, "]", 0.0, line, col};
      case ',': advance(); return {Tok::Comma, ",", 0.0, line, col};
      case ';': advance(); return {Tok::Semicolon, ";", 0.0, line, col};
      case '+': advance(); return {Tok::Plus, "+", 0.0, line, col};
      case '-': advance(); return {Tok::Minus, "-", 0.0, line, col};
      case '*': advance(); return {Tok::Star, "*", 0.0, line, col};
      case '/': advance(); return {Tok::Slash, "/", 0.0, line, col};
      case '?': advance(); return {Tok::Question, "?", 0.0, line, col};
      case ':': advance(); return {Tok::Colon, ":", 0.0, line, col};
      case '.': advance(); return {Tok::Dot, ".", 0.0, line, col};
      case '<': return two('=', Tok::Le, Tok::Lt);
      case '>': return two('=', Tok::Ge, Tok::Gt);
      case '=': return two('=', Tok::EqEq, Tok::Assign);
      case '!': {
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          advance();
          return {Tok::Ne, "!=", 0.0, line, col};
        }
        throw ParseError("unexpected character '!'", line, col, {"'!='"});
      }
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
  }

  void advance() {
    ++pos_;
    ++col_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, int n_agents)
      : tokens_(std::move(tokens)), n_agents_(n_agents) {}

  ProgramAST run() {
    ProgramAST ast;
    ast.agent_exprs.resize(n_agents_);
    std::vector<bool> assigned(n_agents_, false);

    while (peek().kind == Tok::Let) {
      Token let_tok = take();
      Token name = expect(Tok::Ident, "binding name");
      if (name.text == "r" || name.text == "x" || name.text == "r_sparse" ||
          is_builtin(name.text))
        throw ParseError("'" + name.text + "' is reserved and cannot be bound", name.line,
                         name.col);
      if (let_slot(name.text) >= 0)
        throw ParseError("duplicate binding '" + name.text + "'", name.line, name.col);
      expect(Tok::Assign, "'='");
      LetBinding binding;
      binding.name = name.text;
      binding.line = let_tok.line;
      binding.col = let_tok.col;
      binding.value = expr();
      expect(Tok::Semicolon, "';'");
      let_names_.push_back(name.text);
      ast.let_bindings.push_back(std::move(binding));
    }

    while (peek().kind == Tok::Ident && peek().text == "r") {
      Token r = take();
      expect(Tok::LBracket, "'['");
      Token idx = expect(Tok::Number, "agent index");
      double whole;
      if (std::modf(idx.number, &whole) != 0.0 || idx.number < 0)
        throw ParseError("agent index must be a non-negative integer", idx.line, idx.col);
      int agent = static_cast<int>(idx.number);
      if (agent >= n_agents_)
        throw ParseError("agent index " + idx.text + " out of range for " +
                             std::to_string(n_agents_) + " agents",
                         idx.line, idx.col);
      expect(Tok::RBracket, "']'");
      expect(Tok::Assign, "'='");
      if (assigned[agent])
        throw ParseError("r[" + std::to_string(agent) + "] assigned twice", r.line, r.col);
      ast.agent_exprs[agent] = expr();
      assigned[agent] = true;
      expect(Tok::Semicolon, "';'");
    }

    Token end = peek();
    if (end.kind == Tok::Let)
      throw ParseError("let bindings must precede output assignments", end.line, end.col);
    if (end.kind != Tok::End)
      throw ParseError("unexpected " + token_desc(end) + " after program body", end.line,
                       end.col, {"'r['", "end of input"});
    for (int i = 0; i < n_agents_; ++i)
      if (!assigned[i])
        throw ParseError("expected " + std::to_string(n_agents_) +
                             " agent expressions; r[" + std::to_string(i) + "] is missing",
                         end.line, end.col, {"'r[" + std::to_string(i) + "]'"});
    return ast;
  }

 private:
  static bool is_builtin(const std::string& name) {
    return name == "min" || name == "max" || name == "abs" || name == "clip";
  }

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }

  Token take() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  Token expect(Tok kind, const std::string& what) {
    Token t = peek();
    if (t.kind != kind)
      throw ParseError("expected " + what + ", found " + token_desc(t), t.line, t.col,
                       {what});
    return take();
  }

  int let_slot(const std::string& name) const {
    for (std::size_t i = 0; i < let_names_.size(); ++i)
      if (let_names_[i] == name) return static_cast<int>(i);
    return -1;
  }

  ExprPtr make(ExprKind kind, const Token& at) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->line = at.line;
    e->col = at.col;
    return e;
  }

  ExprPtr expr() { return ternary(); }

  ExprPtr ternary() {
    ExprPtr cond = comparison();
    if (peek().kind != Tok::Question) return cond;
    Token q = take();
    ExprPtr then_branch = ternary();
    expect(Tok::Colon, "':'");
    ExprPtr else_branch = ternary();
    ExprPtr e = make(ExprKind::Ternary, q);
    e->args.push_back(std::move(cond));
    e->args.push_back(std::move(then_branch));
    e->args.push_back(std::move(else_branch));
    return e;
  }

  ExprPtr comparison() {
    ExprPtr lhs = additive();
    BinaryOp op;
    switch (peek().kind) {
      case Tok::Lt: op = BinaryOp::Lt; break;
      case Tok::Le: op = BinaryOp::Le; break;
      case Tok::Gt: op = BinaryOp::Gt; break;
      case Tok::Ge: op = BinaryOp::Ge; break;
      case Tok::EqEq: op = BinaryOp::Eq; break;
      case Tok::Ne: op = BinaryOp::Ne; break;
      default: return lhs;
    }
    Token t = take();
    ExprPtr rhs = additive();
    ExprPtr e = make(ExprKind::Binary, t);
    e->binary_op = op;
    e->args.push_back(std::move(lhs));
    e->args.push_back(std::move(rhs));
    return e;
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      Token t = take();
      ExprPtr rhs = multiplicative();
      ExprPtr e = make(ExprKind::Binary, t);
      e->binary_op = t.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      e->args.push_back(std::move(lhs));
      e->args.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      Token t = take();
      ExprPtr rhs = unary();
      ExprPtr e = make(ExprKind::Binary, t);
      e->binary_op = t.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      e->args.push_back(std::move(lhs));
      e->args.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (peek().kind == Tok::Minus) {
      Token t = take();
      ExprPtr e = make(ExprKind::Unary, t);
      e->args.push_back(unary());
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    Token t = peek();
    switch (t.kind) {
      case Tok::Number: {
        take();
        ExprPtr e = make(ExprKind::Literal, t);
        e->literal = t.number;
        return e;
      }
      case Tok::LParen: {
        take();
        ExprPtr inner = expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        if (t.text == "r_sparse") {
          take();
          return make(ExprKind::SparseReward, t);
        }
        if (t.text == "x") {
          take();
          return feature(t);
        }
        if (is_builtin(t.text)) {
          take();
          return call(t);
        }
        int slot = let_slot(t.text);
        if (slot < 0)
          throw ParseError("unknown identifier '" + t.text + "'", t.line, t.col,
                           {"a let-bound name", "'x.<feature>'", "'r_sparse'"});
        take();
        ExprPtr e = make(ExprKind::LetRef, t);
        e->name = t.text;
        e->agent_index = slot;  // resolved binding slot
        return e;
      }
      default:
        throw ParseError("expected an expression, found " + token_desc(t), t.line, t.col,
                         {"number", "identifier", "'('", "'-'"});
    }
  }

  ExprPtr feature(const Token& x_tok) {
    expect(Tok::Dot, "'.'");
    Token name = expect(Tok::Ident, "feature name");
    ExprPtr e = make(ExprKind::Feature, x_tok);
    e->name = name.text;
    if (peek().kind == Tok::LBracket) {
      take();
      Token idx = expect(Tok::Number, "agent index");
      double whole;
      if (std::modf(idx.number, &whole) != 0.0 || idx.number < 0)
        throw ParseError("agent index must be a non-negative integer", idx.line, idx.col);
      e->agent_index = static_cast<int>(idx.number);
      expect(Tok::RBracket, "']'");
    }
    return e;
  }

  ExprPtr call(const Token& name) {
    CallOp op;
    int arity;
    if (name.text == "min") {
      op = CallOp::Min;
      arity = 2;
    } else if (name.text == "max") {
      op = CallOp::Max;
      arity = 2;
    } else if (name.text == "abs") {
      op = CallOp::Abs;
      arity = 1;
    } else {
      op = CallOp::Clip;
      arity = 3;
    }
    expect(Tok::LParen, "'('");
    ExprPtr e = make(ExprKind::Call, name);
    e->call_op = op;
    e->name = name.text;
    for (int i = 0; i < arity; ++i) {
      if (i > 0) expect(Tok::Comma, "','");
      e->args.push_back(expr());
    }
    expect(Tok::RParen, "')'");
    return e;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int n_agents_;
  std::vector<std::string> let_names_;
};

const char* binary_op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
  }
  return "?";
}

std::string literal_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print_expr(std::ostringstream& out, const Expr& e) {
  switch (e.kind) {
    case ExprKind::Literal:
      if (e.literal < 0) {
        out << "(" << literal_text(e.literal) << ")";
      } else {
        out << literal_text(e.literal);
      }
      break;
    case ExprKind::SparseReward:
      out << "r_sparse";
      break;
    case ExprKind::Feature:
      out << "x." << e.name;
      if (e.agent_index >= 0) out << "[" << e.agent_index << "]";
      break;
    case ExprKind::LetRef:
      out << e.name;
      break;
    case ExprKind::Unary:
      out << "(-";
      print_expr(out, *e.args[0]);
      out << ")";
      break;
    case ExprKind::Binary:
      out << "(";
      print_expr(out, *e.args[0]);
      out << " " << binary_op_text(e.binary_op) << " ";
      print_expr(out, *e.args[1]);
      out << ")";
      break;
    case ExprKind::Call:
      out << e.name << "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i > 0) out << ", ";
        print_expr(out, *e.args[i]);
      }
      out << ")";
      break;
    case ExprKind::Ternary:
      out << "(";
      print_expr(out, *e.args[0]);
      out << " ? ";
      print_expr(out, *e.args[1]);
      out << " : ";
      print_expr(out, *e.args[2]);
      out << ")";
      break;
  }
}

bool expr_equivalent(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Literal:
      return a.literal == b.literal;
    case ExprKind::SparseReward:
      return true;
    case ExprKind::Feature:
      return a.name == b.name && a.agent_index == b.agent_index;
    case ExprKind::LetRef:
      return a.agent_index == b.agent_index;  // binding slot, not surface name
    case ExprKind::Unary:
    case ExprKind::Binary:
    case ExprKind::Call:
    case ExprKind::Ternary:
      if (a.kind == ExprKind::Binary && a.binary_op != b.binary_op) return false;
      if (a.kind == ExprKind::Call && a.call_op != b.call_op) return false;
      if (a.args.size() != b.args.size()) return false;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!expr_equivalent(*a.args[i], *b.args[i])) return false;
      return true;
  }
  return false;
}

}  // namespace

ProgramAST parse(const ProgramSource& source, int n_agents) {
  if (source.text.empty()) throw ParseError("empty program", 1, 1);
  if (source.text.size() > kMaxSourceBytes)
    throw ParseError("program exceeds " + std::to_string(kMaxSourceBytes) + " bytes", 1, 1);
  Lexer lexer(source.text);
  Parser parser(lexer.run(), n_agents);
  return parser.run();
}

std::string pretty_print(const ProgramAST& ast) {
  std::ostringstream out;
  for (const auto& binding : ast.let_bindings) {
    out << "let " << binding.name << " = ";
    print_expr(out, *binding.value);
    out << ";\n";
  }
  for (int i = 0; i < ast.n_agents(); ++i) {
    out << "r[" << i << "] = ";
    print_expr(out, *ast.agent_exprs[i]);
    out << ";\n";
  }
  return out.str();
}

bool alpha_equivalent(const ProgramAST& a, const ProgramAST& b) {
  if (a.let_bindings.size() != b.let_bindings.size()) return false;
  if (a.n_agents() != b.n_agents()) return false;
  for (std::size_t i = 0; i < a.let_bindings.size(); ++i)
    if (!expr_equivalent(*a.let_bindings[i].value, *b.let_bindings[i].value)) return false;
  for (int i = 0; i < a.n_agents(); ++i)
    if (!expr_equivalent(*a.agent_exprs[i], *b.agent_exprs[i])) return false;
  return true;
}

}  // namespace rsearch::dsl
