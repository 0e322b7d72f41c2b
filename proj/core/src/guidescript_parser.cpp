// Copyright 2026 The contactdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

#include "contactdiff/guidescript.hpp"

namespace contactdiff::guidescript {

namespace {

enum class Tok {
  kIdent,
  kNumber,
  kLParen,
  kRParen,
  kLBracket,
  kRBracket,
  kComma,
  kColon,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kAt,
  kTilde,
  kNewline,
  kEnd,
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::kIdent: return "identifier";
    case Tok::kNumber: return "number";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kLBracket: return "'['";
    case Tok::kRBracket: return "']'";
    case Tok::kComma: return "','";
    case Tok::kColon: return "':'";
    case Tok::kPlus: return "'+'";
    case Tok::kMinus: return "'-'";
    case Tok::kStar: return "'*'";
    case Tok::kSlash: return "'/'";
    case Tok::kAt: return "'@'";
    case Tok::kTilde: return "'~'";
    case Tok::kNewline: return "end of line";
    case Tok::kEnd: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '\n') {
        out.push_back(make(Tok::kNewline, "\n"));
        advance();
        continue;
      }
      if (std::isspace(uint8_t(c))) {
        advance();
        continue;
      }
      if (std::isalpha(uint8_t(c)) || c == '_') {
        Token t = make(Tok::kIdent, "");
        while (pos_ < src_.size() &&
               (std::isalnum(uint8_t(src_[pos_])) || src_[pos_] == '_')) {
          t.text += src_[pos_];
          advance();
        }
        out.push_back(std::move(t));
        continue;
      }
      if (std::isdigit(uint8_t(c)) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(uint8_t(src_[pos_ + 1])))) {
        Token t = make(Tok::kNumber, "");
        while (pos_ < src_.size() &&
               (std::isdigit(uint8_t(src_[pos_])) || src_[pos_] == '.' ||
                src_[pos_] == 'e' || src_[pos_] == 'E' ||
                ((src_[pos_] == '+' || src_[pos_] == '-') && pos_ > 0 &&
                 (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')))) {
          t.text += src_[pos_];
          advance();
        }
        try {
          t.number = std::stod(t.text);
        } catch (const std::exception&) {
          throw ParseError("malformed number \"" + t.text + "\"", t.line,
                           t.column, {"number"});
        }
        out.push_back(std::move(t));
        continue;
      }
      Tok kind;
      switch (c) {
        case '(': kind = Tok::kLParen; break;
        case ')': kind = Tok::kRParen; break;
        case '[': kind = Tok::kLBracket; break;
        case ']': kind = Tok::kRBracket; break;
        case ',': kind = Tok::kComma; break;
        case ':': kind = Tok::kColon; break;
        case '+': kind = Tok::kPlus; break;
        case '-': kind = Tok::kMinus; break;
        case '*': kind = Tok::kStar; break;
        case '/': kind = Tok::kSlash; break;
        case '@': kind = Tok::kAt; break;
        case '~': kind = Tok::kTilde; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'",
                           line_, col_, {});
      }
      out.push_back(make(kind, std::string(1, c)));
      advance();
    }
    out.push_back(make(Tok::kEnd, ""));
    return out;
  }

 private:
  Token make(Tok kind, std::string text) {
    return {kind, std::move(text), 0.0, line_, col_};
  }
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Known callees and their arities. -1 = checked separately.
const std::map<std::string, int>& builtin_arity() {
  static const std::map<std::string, int> k = {
      {"norm2", 1},    {"mean_t", 1}, {"clamp", 3}, {"softplus", 1},
      {"heaviside", 1}, {"abs", 1},    {"sqrt", 1},  {"interp", 2},
      {"mask", 2},     {"dyn", 0},
  };
  return k;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program run() {
    Program prog;
    skip_newlines();
    while (!at(Tok::kEnd)) {
      prog.terms.push_back(parse_term());
      if (!at(Tok::kEnd)) expect(Tok::kNewline);
      skip_newlines();
    }
    if (prog.terms.empty()) {
      throw ParseError("empty program", 1, 1, {"identifier"});
    }
    return prog;
  }

 private:
  const Token& peek() const { return toks_[idx_]; }
  bool at(Tok k) const { return peek().kind == k; }
  Token take() { return toks_[idx_++]; }
  void skip_newlines() {
    while (at(Tok::kNewline)) take();
  }
  Token expect(Tok k) {
    if (!at(k)) {
      throw ParseError(std::string("expected ") + tok_name(k) + ", got " +
                           tok_name(peek().kind),
                       peek().line, peek().column, {tok_name(k)});
    }
    return take();
  }

  ProgramTerm parse_term() {
    ProgramTerm term;
    Token name = expect(Tok::kIdent);
    term.name = name.text;
    if (at(Tok::kAt)) {
      take();
      Token w = expect(Tok::kNumber);
      term.weight = w.number;
    } else if (at(Tok::kTilde)) {
      take();
      Token w = expect(Tok::kNumber);
      term.adaptive = true;
      term.adaptive_target = w.number;
    }
    expect(Tok::kColon);
    term.expr = parse_expr();
    return term;
  }

  NodePtr parse_expr() {
    NodePtr left = parse_product();
    while (at(Tok::kPlus) || at(Tok::kMinus)) {
      Token op = take();
      NodePtr right = parse_product();
      auto node = std::make_unique<Node>();
      node->kind = NodeKind::kBinary;
      node->op = op.kind == Tok::kPlus ? '+' : '-';
      node->line = op.line;
      node->column = op.column;
      node->args.push_back(std::move(left));
      node->args.push_back(std::move(right));
      left = std::move(node);
    }
    return left;
  }

  NodePtr parse_product() {
    NodePtr left = parse_unary();
    while (at(Tok::kStar) || at(Tok::kSlash)) {
      Token op = take();
      NodePtr right = parse_unary();
      auto node = std::make_unique<Node>();
      node->kind = NodeKind::kBinary;
      node->op = op.kind == Tok::kStar ? '*' : '/';
      node->line = op.line;
      node->column = op.column;
      node->args.push_back(std::move(left));
      node->args.push_back(std::move(right));
      left = std::move(node);
    }
    return left;
  }

  NodePtr parse_unary() {
    if (at(Tok::kMinus)) {
      Token op = take();
      auto node = std::make_unique<Node>();
      node->kind = NodeKind::kNegate;
      node->line = op.line;
      node->column = op.column;
      node->args.push_back(parse_unary());
      return node;
    }
    return parse_primary();
  }

  NodePtr parse_primary() {
    if (at(Tok::kNumber)) {
      Token t = take();
      auto node = std::make_unique<Node>();
      node->kind = NodeKind::kNumber;
      node->number = t.number;
      node->line = t.line;
      node->column = t.column;
      return node;
    }
    if (at(Tok::kLParen)) {
      take();
      NodePtr inner = parse_expr();
      expect(Tok::kRParen);
      return inner;
    }
    if (at(Tok::kIdent)) {
      Token id = take();
      if (id.text == "obs" || id.text == "act") {
        return parse_ref(id);
      }
      if (id.text == "t") {
        auto node = std::make_unique<Node>();
        node->kind = NodeKind::kTimeVar;
        node->line = id.line;
        node->column = id.column;
        return node;
      }
      if (id.text == "H") {
        auto node = std::make_unique<Node>();
        node->kind = NodeKind::kHorizon;
        node->line = id.line;
        node->column = id.column;
        return node;
      }
      // function call
      auto node = std::make_unique<Node>();
      node->kind = NodeKind::kCall;
      node->callee = id.text;
      node->line = id.line;
      node->column = id.column;
      expect(Tok::kLParen);
      if (!at(Tok::kRParen)) {
        node->args.push_back(parse_expr());
        while (at(Tok::kComma)) {
          take();
          node->args.push_back(parse_expr());
        }
      }
      expect(Tok::kRParen);
      return node;
    }
    throw ParseError(std::string("expected expression, got ") +
                         tok_name(peek().kind),
                     peek().line, peek().column,
                     {"number", "identifier", "'('", "'-'"});
  }

  // obs[t, 3] | obs[t+1, 0:2] | obs[0, 3]
  NodePtr parse_ref(const Token& id) {
    auto node = std::make_unique<Node>();
    node->kind = id.text == "obs" ? NodeKind::kObsRef : NodeKind::kActRef;
    node->line = id.line;
    node->column = id.column;
    expect(Tok::kLBracket);
    if (at(Tok::kIdent) && peek().text == "t") {
      take();
      node->t_relative = true;
      node->t_offset = 0;
      if (at(Tok::kPlus) || at(Tok::kMinus)) {
        Token sign = take();
        Token off = expect(Tok::kNumber);
        int v = int(off.number);
        if (double(v) != off.number) {
          throw ParseError("time offset must be an integer", off.line,
                           off.column, {"integer"});
        }
        node->t_offset = sign.kind == Tok::kMinus ? -v : v;
      }
    } else {
      Token row = expect(Tok::kNumber);
      int v = int(row.number);
      if (double(v) != row.number) {
        throw ParseError("row index must be an integer", row.line, row.column,
                         {"integer"});
      }
      node->t_relative = false;
      node->t_offset = v;
    }
    expect(Tok::kComma);
    Token lo = expect(Tok::kNumber);
    int lov = int(lo.number);
    if (double(lov) != lo.number) {
      throw ParseError("column index must be an integer", lo.line, lo.column,
                       {"integer"});
    }
    node->lo = lov;
    node->hi = lov + 1;
    if (at(Tok::kColon)) {
      take();
      Token hi = expect(Tok::kNumber);
      int hiv = int(hi.number);
      if (double(hiv) != hi.number) {
        throw ParseError("column index must be an integer", hi.line,
                         hi.column, {"integer"});
      }
      node->hi = hiv;
    }
    expect(Tok::kRBracket);
    return node;
  }

  std::vector<Token> toks_;
  size_t idx_ = 0;
};

// ---- semantic pass ----

struct TypeInfo {
  int length = 1;  // 1 = scalar
};

class Checker {
 public:
  explicit Checker(const DslContext& ctx) : ctx_(ctx) {}

  void run(const Program& prog) {
    for (const auto& term : prog.terms) {
      TypeInfo t = visit(*term.expr, /*t_bound=*/false);
      if (t.length != 1) {
        throw ParseError("term \"" + term.name +
                             "\" must be scalar (got vector of length " +
                             std::to_string(t.length) + ")",
                         term.expr->line, term.expr->column, {});
      }
    }
  }

 private:
  TypeInfo visit(const Node& n, bool t_bound) {
    switch (n.kind) {
      case NodeKind::kNumber:
        return {1};
      case NodeKind::kHorizon:
        return {1};
      case NodeKind::kTimeVar:
        if (!t_bound) {
          throw ParseError("t outside mean_t", n.line, n.column, {});
        }
        return {1};
      case NodeKind::kObsRef:
      case NodeKind::kActRef: {
        const int dim =
            n.kind == NodeKind::kObsRef ? ctx_.obs_dim : ctx_.act_dim;
        const char* what = n.kind == NodeKind::kObsRef ? "obs" : "act";
        if (n.t_relative && !t_bound) {
          throw ParseError(std::string(what) + "[t, ...] outside mean_t",
                           n.line, n.column, {});
        }
        if (!n.t_relative &&
            (n.t_offset < 0 || n.t_offset >= ctx_.horizon)) {
          throw ParseError(std::string(what) + " row " +
                               std::to_string(n.t_offset) +
                               " outside horizon " +
                               std::to_string(ctx_.horizon),
                           n.line, n.column, {});
        }
        if (n.lo < 0 || n.hi > dim || n.lo >= n.hi) {
          throw ParseError(std::string(what) + " index " +
                               std::to_string(n.lo) +
                               (n.hi != n.lo + 1
                                    ? ":" + std::to_string(n.hi)
                                    : "") +
                               " invalid for dimension " +
                               std::to_string(dim),
                           n.line, n.column, {});
        }
        return {n.hi - n.lo};
      }
      case NodeKind::kNegate:
        return visit(*n.args[0], t_bound);
      case NodeKind::kBinary: {
        TypeInfo a = visit(*n.args[0], t_bound);
        TypeInfo b = visit(*n.args[1], t_bound);
        if (a.length != 1 && b.length != 1 && a.length != b.length) {
          throw ParseError("vector length mismatch (" +
                               std::to_string(a.length) + " vs " +
                               std::to_string(b.length) + ")",
                           n.line, n.column, {});
        }
        return {std::max(a.length, b.length)};
      }
      case NodeKind::kCall: {
        auto it = builtin_arity().find(n.callee);
        if (it == builtin_arity().end()) {
          throw ParseError("unknown function \"" + n.callee + "\"", n.line,
                           n.column, {"norm2", "mean_t", "clamp", "softplus",
                                      "heaviside", "abs", "sqrt", "interp",
                                      "mask", "dyn"});
        }
        if (int(n.args.size()) != it->second) {
          throw ParseError(n.callee + " expects " +
                               std::to_string(it->second) + " argument(s)",
                           n.line, n.column, {});
        }
        if (n.callee == "mean_t") {
          if (t_bound) {
            throw ParseError("mean_t cannot nest", n.line, n.column, {});
          }
          TypeInfo inner = visit(*n.args[0], /*t_bound=*/true);
          if (inner.length != 1) {
            throw ParseError("mean_t body must be scalar (wrap it in norm2)",
                             n.line, n.column, {});
          }
          return {1};
        }
        if (n.callee == "dyn") {
          if (!ctx_.dynamics || !ctx_.normalizer) {
            throw ParseError("dyn() requires a dynamics model in context",
                             n.line, n.column, {});
          }
          return {1};
        }
        if (n.callee == "norm2") {
          visit(*n.args[0], t_bound);
          return {1};
        }
        if (n.callee == "interp" && !t_bound) {
          throw ParseError("interp outside mean_t", n.line, n.column, {});
        }
        if (n.callee == "mask") {
          TypeInfo cond = visit(*n.args[0], t_bound);
          if (cond.length != 1) {
            throw ParseError("mask condition must be scalar", n.line,
                             n.column, {});
          }
          return visit(*n.args[1], t_bound);
        }
        // elementwise functions
        TypeInfo first = visit(*n.args[0], t_bound);
        TypeInfo out = first;
        for (size_t a = 1; a < n.args.size(); ++a) {
          TypeInfo ai = visit(*n.args[a], t_bound);
          if (ai.length != 1 && out.length != 1 && ai.length != out.length) {
            throw ParseError("vector length mismatch in " + n.callee, n.line,
                             n.column, {});
          }
          out.length = std::max(out.length, ai.length);
        }
        return out;
      }
    }
    throw ParseError("internal: bad node", n.line, n.column, {});
  }

  const DslContext& ctx_;
};

// ---- printing ----

int precedence(const Node& n) {
  if (n.kind == NodeKind::kBinary) return (n.op == '+' || n.op == '-') ? 1 : 2;
  if (n.kind == NodeKind::kNegate) return 3;
  return 4;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::kNumber:
      out += format_number(n.number);
      return;
    case NodeKind::kTimeVar:
      out += "t";
      return;
    case NodeKind::kHorizon:
      out += "H";
      return;
    case NodeKind::kObsRef:
    case NodeKind::kActRef: {
      out += n.kind == NodeKind::kObsRef ? "obs[" : "act[";
      if (n.t_relative) {
        out += "t";
        if (n.t_offset > 0) out += "+" + std::to_string(n.t_offset);
        if (n.t_offset < 0) out += "-" + std::to_string(-n.t_offset);
      } else {
        out += std::to_string(n.t_offset);
      }
      out += ", " + std::to_string(n.lo);
      if (n.hi != n.lo + 1) out += ":" + std::to_string(n.hi);
      out += "]";
      return;
    }
    case NodeKind::kNegate: {
      out += "-";
      const bool paren = precedence(*n.args[0]) < precedence(n);
      if (paren) out += "(";
      print_node(*n.args[0], out);
      if (paren) out += ")";
      return;
    }
    case NodeKind::kBinary: {
      const int p = precedence(n);
      const bool lp = precedence(*n.args[0]) < p;
      // Right operand needs parens at equal precedence too: - and / do not
      // associate.
      const bool rp = precedence(*n.args[1]) <= p;
      if (lp) out += "(";
      print_node(*n.args[0], out);
      if (lp) out += ")";
      out += std::string(" ") + n.op + " ";
      if (rp) out += "(";
      print_node(*n.args[1], out);
      if (rp) out += ")";
      return;
    }
    case NodeKind::kCall: {
      out += n.callee + "(";
      for (size_t a = 0; a < n.args.size(); ++a) {
        if (a) out += ", ";
        print_node(*n.args[a], out);
      }
      out += ")";
      return;
    }
  }
}

bool node_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::kNumber:
      return a.number == b.number;
    case NodeKind::kTimeVar:
    case NodeKind::kHorizon:
      return true;
    case NodeKind::kObsRef:
    case NodeKind::kActRef:
      return a.t_relative == b.t_relative && a.t_offset == b.t_offset &&
             a.lo == b.lo && a.hi == b.hi;
    case NodeKind::kNegate:
      return node_equal(*a.args[0], *b.args[0]);
    case NodeKind::kBinary:
      return a.op == b.op && node_equal(*a.args[0], *b.args[0]) &&
             node_equal(*a.args[1], *b.args[1]);
    case NodeKind::kCall: {
      if (a.callee != b.callee || a.args.size() != b.args.size()) return false;
      for (size_t i = 0; i < a.args.size(); ++i) {
        if (!node_equal(*a.args[i], *b.args[i])) return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace

Program parse(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  return parser.run();
}

void check(const Program& program, const DslContext& ctx) {
  Checker checker(ctx);
  checker.run(program);
}

Program load_program(std::string_view source, const DslContext& ctx) {
  Program p = parse(source);
  check(p, ctx);
  return p;
}

std::string print_program(const Program& program) {
  std::string out;
  for (const auto& term : program.terms) {
    out += term.name;
    if (term.adaptive) {
      out += " ~ " + format_number(term.adaptive_target);
    } else if (term.weight != 1.0) {
      out += " @ " + format_number(term.weight);
    }
    out += ": ";
    print_node(*term.expr, out);
    out += "\n";
  }
  return out;
}

bool equal(const Program& a, const Program& b) {
  if (a.terms.size() != b.terms.size()) return false;
  for (size_t i = 0; i < a.terms.size(); ++i) {
    const auto& ta = a.terms[i];
    const auto& tb = b.terms[i];
    if (ta.name != tb.name || ta.weight != tb.weight ||
        ta.adaptive != tb.adaptive ||
        ta.adaptive_target != tb.adaptive_target ||
        !node_equal(*ta.expr, *tb.expr)) {
      return false;
    }
  }
  return true;
}

const char* grammar_ebnf() {
  return R"ebnf(program  = { term , newline } ;
term     = name , [ "@" number | "~" number ] , ":" , expr ;
expr     = product , { ("+" | "-") , product } ;
product  = unary , { ("*" | "/") , unary } ;
unary    = "-" , unary | primary ;
primary  = number | "t" | "H" | ref | call | "(" , expr , ")" ;
ref      = ("obs" | "act") , "[" , row , "," , cols , "]" ;
row      = "t" , [ ("+" | "-") , integer ] | integer ;
cols     = integer , [ ":" , integer ] ;          (* half-open range *)
call     = "norm2(v)" | "mean_t(e)" | "clamp(x, lo, hi)" | "softplus(x)"
         | "heaviside(x)" | "abs(x)" | "sqrt(x)" | "interp(a, b)"
         | "mask(cond, x)" | "dyn()" ;
comment  = "#" , { any } , newline ;)ebnf";
}

}  // namespace contactdiff::guidescript
