#pragma once

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdnet/program.hpp"

namespace pdnet {

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error("parse error at " + std::to_string(l) + ":" +
                           std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

namespace detail {

struct Token {
  enum class Kind { Ident, Int, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  std::int64_t value = 0;
  int line = 0;
  int col = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }

  Token next() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= src_.size()) {
      cur_.kind = Token::Kind::End;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      cur_.kind = Token::Kind::Ident;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        cur_.text += take();
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      cur_.kind = Token::Kind::Int;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        cur_.text += take();
      cur_.value = std::stoll(cur_.text);
      return;
    }
    cur_.kind = Token::Kind::Punct;
    // Multi-character operators first.
    static const char* two[] = {":=", "<=", ">=", "!=", "&&", "||", "->"};
    for (const char* op : two) {
      if (src_.compare(pos_, 2, op) == 0) {
        cur_.text = op;
        take();
        take();
        return;
      }
    }
    cur_.text = std::string(1, take());
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        break;
      }
    }
  }

  char take() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  Program parse_program() {
    Program p;
    while (lex_.peek().kind != Token::Kind::End) {
      const Token& t = lex_.peek();
      if (t.kind != Token::Kind::Ident) fail("expected declaration");
      if (t.text == "global") {
        lex_.next();
        p.globals.push_back(parse_var_decl());
        expect(";");
      } else if (t.text == "mutex") {
        lex_.next();
        p.mutexes.insert(expect_ident());
        expect(";");
      } else if (t.text == "cond") {
        lex_.next();
        p.condvars.insert(expect_ident());
        expect(";");
      } else if (t.text == "thread") {
        lex_.next();
        p.threads.push_back(expect_ident());
        expect(";");
      } else if (t.text == "fn") {
        lex_.next();
        p.functions.push_back(parse_function());
      } else {
        fail("unknown declaration '" + t.text + "'");
      }
    }
    assign_labels(p);
    return p;
  }

 private:
  VarDecl parse_var_decl() {
    VarDecl d;
    d.name = expect_ident();
    expect("in");
    expect("[");
    d.lo = expect_int();
    expect(",");
    d.hi = expect_int();
    expect("]");
    if (d.lo > d.hi) fail("empty domain for '" + d.name + "'");
    d.init = 0;
    if (peek_is("=")) {
      expect("=");
      d.init = expect_int();
    }
    if (d.init < d.lo || d.init > d.hi) d.init = d.lo;
    return d;
  }

  Function parse_function() {
    Function f;
    f.name = expect_ident();
    expect("(");
    while (!peek_is(")")) {
      if (!f.params.empty()) expect(",");
      f.params.push_back(parse_param());
    }
    expect(")");
    f.body = parse_block();
    return f;
  }

  VarDecl parse_param() {
    // Parameters use the same domain syntax, with `in [lo,hi]` optional.
    VarDecl d;
    d.name = expect_ident();
    if (peek_is_ident("in")) {
      expect("in");
      expect("[");
      d.lo = expect_int();
      expect(",");
      d.hi = expect_int();
      expect("]");
    }
    d.init = d.lo <= 0 && 0 <= d.hi ? 0 : d.lo;
    return d;
  }

  Block parse_block() {
    expect("{");
    Block b;
    while (!peek_is("}")) b.push_back(parse_stmt());
    expect("}");
    return b;
  }

  Stmt parse_stmt() {
    Stmt s;
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::Ident) fail("expected statement");
    if (t.text == "if") {
      lex_.next();
      s.kind = Stmt::Kind::If;
      expect("(");
      s.expr = parse_expr();
      expect(")");
      s.body = parse_block();
      if (peek_is_ident("else")) {
        expect("else");
        s.else_body = parse_block();
      }
      return s;
    }
    if (t.text == "while") {
      lex_.next();
      s.kind = Stmt::Kind::While;
      expect("(");
      s.expr = parse_expr();
      expect(")");
      s.body = parse_block();
      return s;
    }
    if (t.text == "lock" || t.text == "unlock" || t.text == "signal") {
      std::string kw = lex_.next().text;
      s.kind = kw == "lock"     ? Stmt::Kind::Lock
               : kw == "unlock" ? Stmt::Kind::Unlock
                                : Stmt::Kind::Signal;
      s.target = expect_ident();
      expect(";");
      return s;
    }
    if (t.text == "wait") {
      lex_.next();
      s.kind = Stmt::Kind::Wait;
      s.target = expect_ident();  // condvar
      s.aux = expect_ident();     // mutex
      expect(";");
      return s;
    }
    if (t.text == "call") {
      lex_.next();
      s.kind = Stmt::Kind::Call;
      s.target = expect_ident();
      expect("(");
      while (!peek_is(")")) {
        if (!s.call_args.empty()) expect(",");
        s.call_args.push_back(parse_expr());
      }
      expect(")");
      if (peek_is("->")) {
        expect("->");
        s.aux = expect_ident();
      }
      expect(";");
      return s;
    }
    if (t.text == "error") {
      lex_.next();
      s.kind = Stmt::Kind::ErrorMark;
      s.target = "err";
      expect(";");
      return s;
    }
    if (t.text == "break" || t.text == "continue" || t.text == "return") {
      std::string kw = lex_.next().text;
      s.kind = Stmt::Kind::Jump;
      s.jump = kw == "break"      ? JumpKind::Break
               : kw == "continue" ? JumpKind::Continue
                                  : JumpKind::Return;
      expect(";");
      return s;
    }
    // Assignment: ident := expr ;
    s.kind = Stmt::Kind::Assign;
    s.target = expect_ident();
    expect(":=");
    s.expr = parse_expr();
    expect(";");
    return s;
  }

  // Precedence climbing: || < && < comparison < additive < multiplicative < unary.
  Expr parse_expr() { return parse_or(); }

  Expr parse_or() {
    Expr e = parse_and();
    while (peek_is("||")) {
      expect("||");
      e = Expr::binary(BinOp::Or, std::move(e), parse_and());
    }
    return e;
  }

  Expr parse_and() {
    Expr e = parse_cmp();
    while (peek_is("&&")) {
      expect("&&");
      e = Expr::binary(BinOp::And, std::move(e), parse_cmp());
    }
    return e;
  }

  Expr parse_cmp() {
    Expr e = parse_add();
    for (;;) {
      BinOp op;
      if (peek_is("<")) op = BinOp::Lt;
      else if (peek_is("<=")) op = BinOp::Le;
      else if (peek_is(">")) op = BinOp::Gt;
      else if (peek_is(">=")) op = BinOp::Ge;
      else if (peek_is("=")) op = BinOp::Eq;
      else if (peek_is("!=")) op = BinOp::Ne;
      else return e;
      lex_.next();
      e = Expr::binary(op, std::move(e), parse_add());
    }
  }

  Expr parse_add() {
    Expr e = parse_mul();
    for (;;) {
      if (peek_is("+")) {
        lex_.next();
        e = Expr::binary(BinOp::Add, std::move(e), parse_mul());
      } else if (peek_is("-")) {
        lex_.next();
        e = Expr::binary(BinOp::Sub, std::move(e), parse_mul());
      } else {
        return e;
      }
    }
  }

  Expr parse_mul() {
    Expr e = parse_unary();
    while (peek_is("*")) {
      lex_.next();
      e = Expr::binary(BinOp::Mul, std::move(e), parse_unary());
    }
    return e;
  }

  Expr parse_unary() {
    if (peek_is("-")) {
      lex_.next();
      return Expr::unary(UnOp::Neg, parse_unary());
    }
    if (peek_is("!")) {
      lex_.next();
      return Expr::unary(UnOp::Not, parse_unary());
    }
    return parse_atom();
  }

  Expr parse_atom() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Int) return Expr::constant(lex_.next().value);
    if (t.kind == Token::Kind::Ident) return Expr::variable(lex_.next().text);
    if (peek_is("(")) {
      expect("(");
      Expr e = parse_expr();
      expect(")");
      return e;
    }
    fail("expected expression");
    return Expr::constant(0);
  }

  // Location labels, program-wide in lexical order. Per function: the entry
  // point, then every statement (recursively), then the fall-through exit
  // point, then the terminated location.
  static void label_block(Block& b, int& next) {
    for (auto& s : b) {
      s.label = next++;
      label_block(s.body, next);
      label_block(s.else_body, next);
    }
  }

  static void assign_labels(Program& p) {
    int next = 1;
    for (auto& f : p.functions) {
      f.enter_label = next++;
      label_block(f.body, next);
      f.exit_label = next++;
      f.done_label = next++;
    }
    p.label_count = next - 1;
  }

  bool peek_is(const char* punct) const {
    return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == punct;
  }
  bool peek_is_ident(const char* id) const {
    return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == id;
  }

  void expect(const char* text) {
    const Token& t = lex_.peek();
    if (t.text != text) fail(std::string("expected '") + text + "'");
    lex_.next();
  }

  std::string expect_ident() {
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::Ident) fail("expected identifier");
    return lex_.next().text;
  }

  std::int64_t expect_int() {
    bool neg = false;
    if (peek_is("-")) {
      lex_.next();
      neg = true;
    }
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::Int) fail("expected integer");
    std::int64_t v = lex_.next().value;
    return neg ? -v : v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + ", got '" + lex_.peek().text + "'", lex_.peek().line,
                     lex_.peek().col);
  }

  Lexer lex_;
};

}  // namespace detail

inline Program parse(const std::string& source) {
  return detail::Parser(source).parse_program();
}

// ---------------------------------------------------------------------------
// Pretty-printer (inverse of parse up to whitespace)
// ---------------------------------------------------------------------------

namespace detail {

inline int precedence(const Expr& e) {
  if (e.kind != Expr::Kind::Binary) return 6;
  switch (e.bop) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
    case BinOp::Eq:
    case BinOp::Ne: return 3;
    case BinOp::Add:
    case BinOp::Sub: return 4;
    case BinOp::Mul: return 5;
  }
  return 6;
}

inline void print_expr(std::ostream& os, const Expr& e, int parent_prec = 0) {
  int prec = precedence(e);
  bool paren = prec < parent_prec;
  if (paren) os << "(";
  switch (e.kind) {
    case Expr::Kind::Const: os << e.value; break;
    case Expr::Kind::Var: os << e.var; break;
    case Expr::Kind::Unary:
      os << (e.uop == UnOp::Neg ? "-" : "!");
      print_expr(os, e.args[0], 6);
      break;
    case Expr::Kind::Binary:
      print_expr(os, e.args[0], prec);
      os << " " << to_string(e.bop) << " ";
      // Right operand needs strictly higher precedence to re-associate left.
      print_expr(os, e.args[1], prec + 1);
      break;
  }
  if (paren) os << ")";
}

inline void print_block(std::ostream& os, const Block& b, int indent);

inline void print_stmt(std::ostream& os, const Stmt& s, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  os << pad;
  switch (s.kind) {
    case Stmt::Kind::Assign:
      os << s.target << " := ";
      print_expr(os, s.expr);
      os << ";\n";
      break;
    case Stmt::Kind::Jump:
      os << (s.jump == JumpKind::Break      ? "break"
             : s.jump == JumpKind::Continue ? "continue"
                                            : "return")
         << ";\n";
      break;
    case Stmt::Kind::If:
      os << "if (";
      print_expr(os, s.expr);
      os << ") {\n";
      print_block(os, s.body, indent + 1);
      os << pad << "}";
      if (!s.else_body.empty()) {
        os << " else {\n";
        print_block(os, s.else_body, indent + 1);
        os << pad << "}";
      }
      os << "\n";
      break;
    case Stmt::Kind::While:
      os << "while (";
      print_expr(os, s.expr);
      os << ") {\n";
      print_block(os, s.body, indent + 1);
      os << pad << "}\n";
      break;
    case Stmt::Kind::Call:
      os << "call " << s.target << "(";
      for (std::size_t i = 0; i < s.call_args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, s.call_args[i]);
      }
      os << ")";
      if (!s.aux.empty()) os << " -> " << s.aux;
      os << ";\n";
      break;
    case Stmt::Kind::Lock: os << "lock " << s.target << ";\n"; break;
    case Stmt::Kind::Unlock: os << "unlock " << s.target << ";\n"; break;
    case Stmt::Kind::Signal: os << "signal " << s.target << ";\n"; break;
    case Stmt::Kind::Wait:
      os << "wait " << s.target << " " << s.aux << ";\n";
      break;
    case Stmt::Kind::ErrorMark: os << "error;\n"; break;
  }
}

inline void print_block(std::ostream& os, const Block& b, int indent) {
  for (const auto& s : b) print_stmt(os, s, indent);
}

}  // namespace detail

inline std::string pretty_print(const Program& p) {
  std::ostringstream os;
  for (const auto& g : p.globals) {
    os << "global " << g.name << " in [" << g.lo << ", " << g.hi << "]";
    if (g.init != 0) os << " = " << g.init;
    os << ";\n";
  }
  for (const auto& m : p.mutexes) os << "mutex " << m << ";\n";
  for (const auto& c : p.condvars) os << "cond " << c << ";\n";
  for (const auto& f : p.functions) {
    os << "fn " << f.name << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) os << ", ";
      os << f.params[i].name << " in [" << f.params[i].lo << ", "
         << f.params[i].hi << "]";
    }
    os << ") {\n";
    detail::print_block(os, f.body, 1);
    os << "}\n";
  }
  for (const auto& t : p.threads) os << "thread " << t << ";\n";
  return os.str();
}

// Structural equality (ignoring labels, which are re-derived by parse).
inline bool same_structure(const Program& a, const Program& b) {
  return pretty_print(a) == pretty_print(b);
}

}  // namespace pdnet
