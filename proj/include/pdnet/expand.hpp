#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdnet/program.hpp"

namespace pdnet {

// Call-tree expansion. Each thread instantiates its entry function; every
// call site instantiates its callee. This makes return sites static (no call
// stack is needed), keeps the locals of distinct activations apart, and gives
// both the interpreter and the net translation one common structure to walk.
// Recursion is rejected by validate(), so the expansion is finite.

struct VarInfo {
  std::string name;  // qualified name (globals keep their source name)
  bool global = false;
  std::int64_t lo = -8, hi = 8, init = 0;
  int order = 0;  // declaration order; globals first
};

struct Instance;

struct InstStmt {
  const Stmt* src = nullptr;
  Stmt::Kind kind = Stmt::Kind::Assign;
  int loc = 0;                 // location id of this statement
  int src_label = 0;           // source location label, for display
  std::string target;          // qualified lhs / mutex / cond / error name
  std::string aux;             // wait: mutex; call: qualified result variable
  Expr expr;                   // assign rhs or branch condition, renamed
  std::vector<Expr> args;      // call arguments, renamed
  JumpKind jump = JumpKind::Break;
  std::vector<InstStmt> body;
  std::vector<InstStmt> else_body;
  Instance* callee = nullptr;  // for Call
};

struct Instance {
  const Function* fn = nullptr;
  int thread = 0;      // 1-based thread id
  std::string prefix;  // unique qualifier, "" for the primary instance path
  int enter_loc = 0, exit_loc = 0, done_loc = 0;
  int loc_base = 0;  // loc = loc_base + (label - fn->enter_label)
  std::vector<InstStmt> body;
  std::vector<std::string> params;  // qualified parameter names

  int loc_of(int label) const { return loc_base + (label - fn->enter_label); }
  int label_of(int loc) const { return loc - loc_base + fn->enter_label; }
};

struct Expansion {
  const Program* prog = nullptr;
  std::vector<std::unique_ptr<Instance>> instances;  // creation order
  std::vector<Instance*> thread_roots;               // index = thread id - 1
  std::map<std::string, VarInfo> vars;               // by qualified name
  std::map<int, const Instance*> loc_owner;          // location -> instance
  int loc_count = 0;

  int label_of(int loc) const {
    auto it = loc_owner.upper_bound(loc);
    --it;
    return it->second->label_of(loc);
  }
};

namespace detail {

class Expander {
 public:
  explicit Expander(const Program& p) : prog_(p) {
    ex_.prog = &p;
    ex_.loc_count = p.label_count;
    int order = 0;
    for (const auto& g : p.globals) {
      ex_.vars[g.name] = {g.name, true, g.lo, g.hi, g.init, order++};
    }
    var_order_ = order;
    int tid = 1;
    for (const auto& tname : p.threads) {
      const Function* fn = p.find_function(tname);
      if (!fn) throw std::runtime_error("unknown thread entry " + tname);
      ex_.thread_roots.push_back(instantiate(fn, tid, ""));
      ++tid;
    }
  }

  Expansion take() { return std::move(ex_); }

 private:
  Instance* instantiate(const Function* fn, int thread,
                        const std::string& call_path) {
    auto inst = std::make_unique<Instance>();
    Instance* raw = inst.get();
    ex_.instances.push_back(std::move(inst));
    raw->fn = fn;
    raw->thread = thread;
    raw->prefix = call_path;
    if (!used_.count(fn)) {
      // The first activation keeps the source labels as its location ids.
      used_.insert(fn);
      raw->loc_base = fn->enter_label;
    } else {
      raw->loc_base = ex_.loc_count + 1;
      ex_.loc_count += fn->done_label - fn->enter_label + 1;
    }
    raw->enter_loc = raw->loc_of(fn->enter_label);
    raw->exit_loc = raw->loc_of(fn->exit_label);
    raw->done_loc = raw->loc_of(fn->done_label);
    ex_.loc_owner[raw->loc_base] = raw;

    std::map<std::string, std::string> rename;  // source local -> qualified
    for (const auto& p : fn->params) {
      std::string q = call_path.empty() ? fn->name + "." + p.name
                                        : call_path + "." + p.name;
      rename[p.name] = q;
      raw->params.push_back(q);
      if (!ex_.vars.count(q))
        ex_.vars[q] = {q, false, p.lo, p.hi, p.init, var_order_++};
    }
    raw->body = expand_block(fn->body, raw, rename, thread, call_path);
    return raw;
  }

  std::vector<InstStmt> expand_block(const Block& b, Instance* inst,
                                     const std::map<std::string, std::string>& rename,
                                     int thread, const std::string& call_path) {
    std::vector<InstStmt> out;
    for (const auto& s : b) {
      InstStmt is;
      is.src = &s;
      is.kind = s.kind;
      is.src_label = s.label;
      is.loc = inst->loc_of(s.label);
      is.jump = s.jump;
      switch (s.kind) {
        case Stmt::Kind::Assign:
          is.target = qualify(s.target, rename);
          is.expr = rename_expr(s.expr, rename);
          break;
        case Stmt::Kind::If:
          is.expr = rename_expr(s.expr, rename);
          is.body = expand_block(s.body, inst, rename, thread, call_path);
          is.else_body =
              expand_block(s.else_body, inst, rename, thread, call_path);
          break;
        case Stmt::Kind::While:
          is.expr = rename_expr(s.expr, rename);
          is.body = expand_block(s.body, inst, rename, thread, call_path);
          break;
        case Stmt::Kind::Call: {
          is.target = s.target;
          for (const auto& a : s.call_args)
            is.args.push_back(rename_expr(a, rename));
          if (!s.aux.empty()) is.aux = qualify(s.aux, rename);
          const Function* callee = prog_.find_function(s.target);
          std::string path = (call_path.empty() ? std::string() : call_path + ".") +
                             "l" + std::to_string(s.label) + "." + s.target;
          is.callee = instantiate(callee, thread, path);
          break;
        }
        case Stmt::Kind::Lock:
        case Stmt::Kind::Unlock:
        case Stmt::Kind::Signal:
        case Stmt::Kind::ErrorMark:
          is.target = s.target;
          break;
        case Stmt::Kind::Wait:
          is.target = s.target;
          is.aux = s.aux;
          break;
        case Stmt::Kind::Jump:
          break;
      }
      out.push_back(std::move(is));
    }
    return out;
  }

  static std::string qualify(const std::string& name,
                             const std::map<std::string, std::string>& rename) {
    auto it = rename.find(name);
    return it == rename.end() ? name : it->second;
  }

  Expr rename_expr(const Expr& e,
                   const std::map<std::string, std::string>& rename) {
    Expr r = e;
    if (r.kind == Expr::Kind::Var) r.var = qualify(r.var, rename);
    for (auto& a : r.args) a = rename_expr(a, rename);
    return r;
  }

  const Program& prog_;
  Expansion ex_;
  std::set<const Function*> used_;
  int var_order_ = 0;
};

}  // namespace detail

inline Expansion expand(const Program& p) { return detail::Expander(p).take(); }

}  // namespace pdnet
