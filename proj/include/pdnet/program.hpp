#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pdnet {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class UnOp { Neg, Not };
enum class BinOp { Add, Sub, Mul, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

struct Expr {
  enum class Kind { Const, Var, Unary, Binary };

  Kind kind = Kind::Const;
  std::int64_t value = 0;          // Const
  std::string var;                 // Var
  UnOp uop = UnOp::Neg;            // Unary
  BinOp bop = BinOp::Add;          // Binary
  std::vector<Expr> args;          // children for Unary/Binary

  static Expr constant(std::int64_t v) {
    Expr e;
    e.kind = Kind::Const;
    e.value = v;
    return e;
  }
  static Expr variable(std::string name) {
    Expr e;
    e.kind = Kind::Var;
    e.var = std::move(name);
    return e;
  }
  static Expr unary(UnOp op, Expr a) {
    Expr e;
    e.kind = Kind::Unary;
    e.uop = op;
    e.args.push_back(std::move(a));
    return e;
  }
  static Expr binary(BinOp op, Expr a, Expr b) {
    Expr e;
    e.kind = Kind::Binary;
    e.bop = op;
    e.args.push_back(std::move(a));
    e.args.push_back(std::move(b));
    return e;
  }

  bool operator==(const Expr& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case Kind::Const: return value == o.value;
      case Kind::Var: return var == o.var;
      case Kind::Unary: return uop == o.uop && args == o.args;
      case Kind::Binary: return bop == o.bop && args == o.args;
    }
    return false;
  }

  void collect_vars(std::set<std::string>& out) const {
    if (kind == Kind::Var) out.insert(var);
    for (const auto& a : args) a.collect_vars(out);
  }
  std::set<std::string> vars() const {
    std::set<std::string> s;
    collect_vars(s);
    return s;
  }
};

inline const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

// Evaluates with 64-bit intermediates; comparisons and logic yield 0/1.
inline std::int64_t eval_expr(const Expr& e,
                              const std::map<std::string, std::int64_t>& env) {
  switch (e.kind) {
    case Expr::Kind::Const: return e.value;
    case Expr::Kind::Var: {
      auto it = env.find(e.var);
      return it == env.end() ? 0 : it->second;
    }
    case Expr::Kind::Unary: {
      std::int64_t a = eval_expr(e.args[0], env);
      return e.uop == UnOp::Neg ? -a : (a == 0 ? 1 : 0);
    }
    case Expr::Kind::Binary: {
      std::int64_t a = eval_expr(e.args[0], env);
      std::int64_t b = eval_expr(e.args[1], env);
      switch (e.bop) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Lt: return a < b;
        case BinOp::Le: return a <= b;
        case BinOp::Gt: return a > b;
        case BinOp::Ge: return a >= b;
        case BinOp::Eq: return a == b;
        case BinOp::Ne: return a != b;
        case BinOp::And: return (a != 0 && b != 0) ? 1 : 0;
        case BinOp::Or: return (a != 0 || b != 0) ? 1 : 0;
      }
      return 0;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Statements and declarations
// ---------------------------------------------------------------------------

enum class JumpKind { Break, Continue, Return };

struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt {
  enum class Kind {
    Assign,
    Jump,
    If,
    While,
    Call,
    Lock,
    Unlock,
    Signal,
    Wait,
    ErrorMark
  };

  Kind kind = Kind::Assign;
  int label = 0;  // unique program-wide location label, assigned by the parser

  std::string target;        // Assign: lhs var; Lock/Unlock: mutex; Signal: condvar;
                             // Wait: condvar; Call: callee; ErrorMark: error name
  std::string aux;           // Wait: mutex; Call: return variable (may be empty)
  Expr expr;                 // Assign rhs, If/While condition
  std::vector<Expr> call_args;  // Call: actual arguments
  Block body;                // If: then-block; While: body
  Block else_body;           // If: else-block
  JumpKind jump = JumpKind::Break;
};

struct VarDecl {
  std::string name;
  std::int64_t lo = -8;
  std::int64_t hi = 8;
  std::int64_t init = 0;
};

struct Function {
  std::string name;
  std::vector<VarDecl> params;
  Block body;
  int enter_label = 0;  // location of the function entry
  int exit_label = 0;   // location of the fall-through exit point
  int done_label = 0;   // location after the exit transition fired
};

struct Program {
  std::vector<VarDecl> globals;
  std::vector<Function> functions;
  std::vector<std::string> threads;  // entry-function names, in declaration order
  std::set<std::string> mutexes;
  std::set<std::string> condvars;
  int label_count = 0;  // labels are 1..label_count

  const Function* find_function(const std::string& name) const {
    for (const auto& f : functions)
      if (f.name == name) return &f;
    return nullptr;
  }
  const VarDecl* find_global(const std::string& name) const {
    for (const auto& g : globals)
      if (g.name == name) return &g;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Diagnostic {
  std::string code;  // e.g. "unknown-function", "recursion", "undeclared-variable"
  std::string message;
};

namespace detail {

inline void check_block(const Program& p, const Function& fn, const Block& b,
                        std::vector<Diagnostic>& out);

inline void check_expr(const Program& p, const Function& fn, const Expr& e,
                       std::vector<Diagnostic>& out) {
  for (const auto& v : e.vars()) {
    bool found = p.find_global(v) != nullptr;
    for (const auto& pr : fn.params)
      if (pr.name == v) found = true;
    if (!found)
      out.push_back({"undeclared-variable",
                     "variable '" + v + "' is not declared (in function '" +
                         fn.name + "')"});
  }
}

inline void check_stmt(const Program& p, const Function& fn, const Stmt& s,
                       std::vector<Diagnostic>& out) {
  switch (s.kind) {
    case Stmt::Kind::Assign:
      check_expr(p, fn, Expr::variable(s.target), out);
      check_expr(p, fn, s.expr, out);
      break;
    case Stmt::Kind::If:
      check_expr(p, fn, s.expr, out);
      check_block(p, fn, s.body, out);
      check_block(p, fn, s.else_body, out);
      break;
    case Stmt::Kind::While:
      check_expr(p, fn, s.expr, out);
      check_block(p, fn, s.body, out);
      break;
    case Stmt::Kind::Call: {
      const Function* callee = p.find_function(s.target);
      if (!callee) {
        out.push_back({"unknown-function",
                       "call to undeclared function '" + s.target + "'"});
      } else if (callee->params.size() != s.call_args.size()) {
        out.push_back({"arity-mismatch",
                       "call to '" + s.target + "' with wrong argument count"});
      } else if (!s.aux.empty() && callee->params.empty()) {
        out.push_back({"no-return-value",
                       "call to '" + s.target +
                           "' binds a result but the callee has no parameters"});
      }
      for (const auto& a : s.call_args) check_expr(p, fn, a, out);
      if (!s.aux.empty()) check_expr(p, fn, Expr::variable(s.aux), out);
      break;
    }
    case Stmt::Kind::Lock:
    case Stmt::Kind::Unlock:
      if (!p.mutexes.count(s.target))
        out.push_back({"unknown-mutex", "mutex '" + s.target + "' is not declared"});
      break;
    case Stmt::Kind::Signal:
      if (!p.condvars.count(s.target))
        out.push_back({"unknown-condvar",
                       "condition variable '" + s.target + "' is not declared"});
      break;
    case Stmt::Kind::Wait:
      if (!p.condvars.count(s.target))
        out.push_back({"unknown-condvar",
                       "condition variable '" + s.target + "' is not declared"});
      if (!p.mutexes.count(s.aux))
        out.push_back({"unknown-mutex", "mutex '" + s.aux + "' is not declared"});
      break;
    case Stmt::Kind::Jump:
    case Stmt::Kind::ErrorMark:
      break;
  }
}

inline void check_block(const Program& p, const Function& fn, const Block& b,
                        std::vector<Diagnostic>& out) {
  for (const auto& s : b) check_stmt(p, fn, s, out);
}

inline void collect_callees(const Block& b, std::set<std::string>& out) {
  for (const auto& s : b) {
    if (s.kind == Stmt::Kind::Call) out.insert(s.target);
    collect_callees(s.body, out);
    collect_callees(s.else_body, out);
  }
}

}  // namespace detail

inline std::vector<Diagnostic> validate(const Program& p) {
  std::vector<Diagnostic> out;
  for (const auto& t : p.threads) {
    if (!p.find_function(t))
      out.push_back({"unknown-function",
                     "thread entry '" + t + "' does not name a function"});
  }
  for (const auto& fn : p.functions)
    detail::check_block(p, fn, fn.body, out);

  // Call-graph acyclicity via DFS with colors.
  std::map<std::string, std::set<std::string>> callees;
  for (const auto& fn : p.functions)
    detail::collect_callees(fn.body, callees[fn.name]);
  std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
  std::vector<std::string> cyclic;
  struct Dfs {
    const std::map<std::string, std::set<std::string>>& g;
    std::map<std::string, int>& color;
    std::vector<std::string>& cyclic;
    void run(const std::string& f) {
      color[f] = 1;
      auto it = g.find(f);
      if (it != g.end()) {
        for (const auto& c : it->second) {
          if (g.find(c) == g.end()) continue;  // unknown callee reported above
          if (color[c] == 1)
            cyclic.push_back(f + " -> " + c);
          else if (color[c] == 0)
            run(c);
        }
      }
      color[f] = 2;
    }
  } dfs{callees, color, cyclic};
  for (const auto& fn : p.functions)
    if (color[fn.name] == 0) dfs.run(fn.name);
  for (const auto& c : cyclic)
    out.push_back({"recursion", "recursive call chain involving " + c});

  // Label sanity: 1..n, no duplicates.
  std::set<int> seen;
  struct LabelWalk {
    std::set<int>& seen;
    std::vector<Diagnostic>& out;
    void visit(int label) {
      if (label <= 0 || !seen.insert(label).second)
        out.push_back({"bad-label",
                       "duplicate or non-positive location label " +
                           std::to_string(label)});
    }
    void block(const Block& b) {
      for (const auto& s : b) {
        visit(s.label);
        block(s.body);
        block(s.else_body);
      }
    }
  } walk{seen, out};
  for (const auto& fn : p.functions) {
    walk.visit(fn.enter_label);
    walk.block(fn.body);
    walk.visit(fn.exit_label);
    walk.visit(fn.done_label);
  }
  if (!seen.empty() &&
      (static_cast<int>(seen.size()) != p.label_count ||
       *seen.rbegin() != p.label_count))
    out.push_back({"bad-label", "location labels do not enumerate 1..n"});
  return out;
}

}  // namespace pdnet
