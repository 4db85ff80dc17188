#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pdnet/expand.hpp"
#include "pdnet/flow.hpp"
#include "pdnet/net.hpp"

namespace pdnet {

// ---------------------------------------------------------------------------
// Translation result
// ---------------------------------------------------------------------------

struct InstanceNet {
  const Instance* inst = nullptr;
  int enter_t = -1, exit_t = -1;
  int entry_p = -1, exitloc_p = -1, terminal_p = -1;
};

struct TranslationMap {
  std::map<int, std::vector<int>> loc_transitions;  // expanded loc -> transitions
  std::map<std::string, int> var_place;             // qualified var -> place
  std::map<std::string, bool> var_global;
  std::map<int, int> trans_control;  // transition -> control input place (-1)
  std::map<int, int> trans_exec;     // transition -> flow input place
  std::vector<std::pair<int, int>> thread_enter_exit;  // per thread root
  std::vector<InstanceNet> instances;  // aligned with Expansion::instances
  std::map<int, int> trans_instance;   // transition -> instance index
  std::map<std::string, int> mutex_place;
  std::map<std::pair<std::string, int>, int> waitflag_place;  // (cond, tid)
  std::vector<int> loop_heads;     // taken-branch transitions of while loops
  std::set<int> blocking;          // transitions that can block their thread
  std::vector<int> error_transitions;
  std::map<int, int> loc_place;    // expanded location -> carrying place

  int place_of_var(const std::string& name) const {
    auto it = var_place.find(name);
    return it == var_place.end() ? -1 : it->second;
  }
};

struct Translation {
  PDNet net;
  TranslationMap map;
  Expansion ex;      // owns the instance tree (points into the Program)
  FlowMap flow;
};

// ---------------------------------------------------------------------------
// Interval arithmetic for the static can-this-assignment-overflow check
// ---------------------------------------------------------------------------

namespace detail {

struct Interval {
  std::int64_t lo, hi;
};

inline Interval expr_range(const Expr& e,
                           const std::map<std::string, Interval>& vars) {
  switch (e.kind) {
    case Expr::Kind::Const: return {e.value, e.value};
    case Expr::Kind::Var: {
      auto it = vars.find(e.var);
      if (it == vars.end()) return {0, 0};
      return it->second;
    }
    case Expr::Kind::Unary: {
      Interval a = expr_range(e.args[0], vars);
      if (e.uop == UnOp::Neg) return {-a.hi, -a.lo};
      return {0, 1};
    }
    case Expr::Kind::Binary: {
      Interval a = expr_range(e.args[0], vars);
      Interval b = expr_range(e.args[1], vars);
      switch (e.bop) {
        case BinOp::Add: return {a.lo + b.lo, a.hi + b.hi};
        case BinOp::Sub: return {a.lo - b.hi, a.hi - b.lo};
        case BinOp::Mul: {
          std::int64_t c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo,
                               a.hi * b.hi};
          return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
        }
        default: return {0, 1};  // comparisons and boolean connectives
      }
    }
  }
  return {0, 0};
}

inline bool may_overflow(const Expr& e, const VarInfo& target,
                         const std::map<std::string, Interval>& vars) {
  Interval r = expr_range(e, vars);
  return r.lo < target.lo || r.hi > target.hi;
}

// ---------------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------------

class Translator {
 public:
  explicit Translator(const Program& p) {
    t_.ex = expand(p);
    t_.flow = build_flow(t_.ex);
    build_variable_places();
    build_sync_places(p);
    compute_value_ranges();
    int tid = 1;
    for (const auto* root : t_.ex.thread_roots) {
      place_idx_ = 0;  // statement numbering restarts per thread
      int inst_idx = index_of(root);
      translate_instance(*root, tid, std::to_string(tid), /*entry_p=*/-1);
      t_.map.thread_enter_exit.emplace_back(t_.map.instances[inst_idx].enter_t,
                                            t_.map.instances[inst_idx].exit_t);
      ++tid;
    }
    t_.net.freeze();
  }

  Translation take() { return std::move(t_); }

 private:
  PDNet& net() { return t_.net; }
  TranslationMap& map() { return t_.map; }

  int index_of(const Instance* inst) const {
    for (std::size_t i = 0; i < t_.ex.instances.size(); ++i)
      if (t_.ex.instances[i].get() == inst) return static_cast<int>(i);
    return -1;
  }

  void build_variable_places() {
    // Declaration order: globals first, then locals per instantiation.
    std::vector<const VarInfo*> ordered;
    for (const auto& [name, v] : t_.ex.vars) ordered.push_back(&v);
    std::sort(ordered.begin(), ordered.end(),
              [](const VarInfo* a, const VarInfo* b) { return a->order < b->order; });
    for (const VarInfo* v : ordered) {
      ColorSet c;
      c.kind = ColorSet::Kind::Int;
      c.lo = v->lo;
      c.hi = v->hi;
      int id = net().add_place("v" + std::to_string(v->order), kVariable, c,
                               {v->init});
      map().var_place[v->name] = id;
      map().var_global[v->name] = v->global;
    }
  }

  void build_sync_places(const Program& p) {
    ColorSet thread_c;
    thread_c.kind = ColorSet::Kind::Thread;
    for (const auto& m : p.mutexes)
      map().mutex_place[m] =
          net().add_place("m_" + m, kControl | kExecution, thread_c, {0});
    ColorSet flag;
    flag.kind = ColorSet::Kind::Int;
    flag.lo = -1;
    flag.hi = 1;
    int nthreads = static_cast<int>(p.threads.size());
    for (const auto& c : p.condvars)
      for (int i = 1; i <= nthreads; ++i)
        map().waitflag_place[{c, i}] = net().add_place(
            "u_" + c + "_" + std::to_string(i), kControl | kExecution, flag, {0});
  }

  // --- structural places of one instance -----------------------------------

  void create_stmt_places(const std::vector<InstStmt>& body, int tid) {
    for (const auto& s : body) {
      int idx = place_idx_++;
      stmt_name_idx_[s.loc] = idx;
      std::string suffix = std::to_string(tid) + std::to_string(idx);
      ColorSet unit;
      map().loc_place[s.loc] =
          net().add_place("f" + suffix, kExecution, unit, {});
      control_place_[s.loc] =
          net().add_place("c" + suffix, kControl, unit, {});
      create_stmt_places(s.body, tid);
      create_stmt_places(s.else_body, tid);
      // Callee structural places are created when the call is translated.
    }
  }

  void translate_instance(const Instance& inst, int tid, const std::string& tag,
                          int entry_p) {
    ColorSet unit;
    int inst_idx = index_of(&inst);
    InstanceNet& in = ensure_instance(inst_idx, &inst);
    if (entry_p < 0) {
      // Thread root: initially marked entry place.
      entry_p = net().add_place("c" + tag + "b", kControl | kExecution, unit, {0});
    }
    in.entry_p = entry_p;
    in.exitloc_p = net().add_place("f" + tag + "e", kExecution, unit, {});
    in.terminal_p =
        net().add_place("c" + tag + "e", kControl | kExecution, unit, {});
    map().loc_place[inst.enter_loc] = entry_p;
    map().loc_place[inst.exit_loc] = in.exitloc_p;
    map().loc_place[inst.done_loc] = in.terminal_p;

    create_stmt_places(inst.body, tid);

    // Enter transition.
    in.enter_t = net().add_transition("t" + tag + "b", TransKind::Enter,
                                      std::nullopt, tid, inst.fn->enter_label);
    {
      Arc& a = net().add_arc(entry_p, in.enter_t, true, ArcKind::Control,
                             ArcExpr::unit());
      a.flow = true;
      flow_output(in.enter_t, t_.flow.at(inst.enter_loc).succ);
    }
    register_trans(in.enter_t, inst.enter_loc, inst_idx, -1, entry_p);

    translate_block(inst.body, tid, in.enter_t, inst_idx);

    // Exit transition (fall-through exit point -> terminal).
    in.exit_t = net().add_transition("t" + tag + "e", TransKind::Exit,
                                     std::nullopt, tid, inst.fn->exit_label);
    {
      Arc& a = net().add_arc(in.exitloc_p, in.exit_t, true, ArcKind::Execution,
                             ArcExpr::unit());
      a.flow = true;
      Arc& b = net().add_arc(in.terminal_p, in.exit_t, false,
                             ArcKind::Execution, ArcExpr::unit());
      b.flow = true;
    }
    register_trans(in.exit_t, inst.exit_loc, inst_idx, -1, in.exitloc_p);
  }

  InstanceNet& ensure_instance(int idx, const Instance* inst) {
    if (map().instances.size() <= static_cast<std::size_t>(idx))
      map().instances.resize(t_.ex.instances.size());
    map().instances[idx].inst = inst;
    return map().instances[idx];
  }

  void register_trans(int trans, int loc, int inst_idx, int control_p,
                      int exec_p) {
    map().loc_transitions[loc].push_back(trans);
    map().trans_control[trans] = control_p;
    map().trans_exec[trans] = exec_p;
    map().trans_instance[trans] = inst_idx;
  }

  // Flow output arc from a transition to the place carrying `loc`.
  void flow_output(int trans, int loc, bool enter = false) {
    int target = map().loc_place.at(loc);
    ArcKind kind = enter ? ArcKind::Control : ArcKind::Execution;
    Arc& a = net().add_arc(target, trans, false, kind, ArcExpr::unit());
    a.flow = true;
    a.enter_arc = enter;
  }

  // Read pair (value preserved) for one variable.
  void read_pair(int trans, const std::string& var) {
    int p = map().var_place.at(var);
    net().add_arc(p, trans, true, ArcKind::ReadWrite, ArcExpr::binder(var));
    net().add_arc(p, trans, false, ArcKind::ReadWrite, ArcExpr::binder(var));
  }

  // Write pair: consume the old token (bound to the variable's name so the
  // rhs may use it), produce the evaluated expression.
  void write_pair(int trans, const std::string& var, Expr rhs) {
    int p = map().var_place.at(var);
    net().add_arc(p, trans, true, ArcKind::ReadWrite, ArcExpr::binder(var));
    net().add_arc(p, trans, false, ArcKind::ReadWrite,
                  ArcExpr::eval(std::move(rhs)));
  }

  void read_pairs_for(int trans, const Expr& e,
                      const std::set<std::string>& skip = {}) {
    for (const auto& v : e.vars())
      if (!skip.count(v)) read_pair(trans, v);
  }

  // Control wiring shared by all statement transitions: dominator deposits
  // into the statement's control place, the transition consumes it (and
  // re-arms it when `rearm` — loop heads and the non-advancing wait steps).
  void control_wiring(int trans, int stmt_loc, int dominator, bool rearm) {
    int c = control_place_.at(stmt_loc);
    if (!deposited_.count(c)) {
      deposited_.insert(c);
      net().add_arc(c, dominator, false, ArcKind::Control, ArcExpr::unit());
    }
    net().add_arc(c, trans, true, ArcKind::Control, ArcExpr::unit());
    if (rearm) {
      Arc& a = net().add_arc(c, trans, false, ArcKind::Control, ArcExpr::unit());
      a.replenish = true;
    }
  }

  void exec_wiring(int trans, int stmt_loc, bool consume_only, int succ_loc) {
    int f = map().loc_place.at(stmt_loc);
    Arc& in = net().add_arc(f, trans, true, ArcKind::Execution, ArcExpr::unit());
    in.flow = true;
    if (consume_only) {
      // Non-advancing step: put the execution token back.
      Arc& back =
          net().add_arc(f, trans, false, ArcKind::Execution, ArcExpr::unit());
      back.flow = true;
      back.replenish = true;
    } else {
      flow_output(trans, succ_loc);
    }
  }

  void translate_block(const std::vector<InstStmt>& body, int tid,
                       int dominator, int inst_idx) {
    for (const auto& s : body) translate_stmt(s, tid, dominator, inst_idx);
  }

  // Fixpoint over all assignment-like statements: the set of values each
  // variable can actually hold, clamped to its domain (blocked writes never
  // land). Used to decide which transitions can block on a domain overflow.
  void compute_value_ranges() {
    for (const auto& [name, v] : t_.ex.vars) ranges_[name] = {v.init, v.init};
    struct Write {
      std::string target;
      Expr expr;
    };
    std::vector<Write> writes;
    std::function<void(const std::vector<InstStmt>&)> scan =
        [&](const std::vector<InstStmt>& body) {
          for (const auto& s : body) {
            if (s.kind == Stmt::Kind::Assign)
              writes.push_back({s.target, s.expr});
            if (s.kind == Stmt::Kind::Call) {
              for (std::size_t i = 0; i < s.args.size(); ++i)
                writes.push_back({s.callee->params[i], s.args[i]});
              if (!s.aux.empty())
                writes.push_back({s.aux, Expr::variable(s.callee->params[0])});
            }
            scan(s.body);
            scan(s.else_body);
          }
        };
    for (const auto& inst : t_.ex.instances) scan(inst->body);
    for (int round = 0; round < 64; ++round) {
      bool changed = false;
      for (const auto& w : writes) {
        const VarInfo& info = t_.ex.vars.at(w.target);
        Interval r = expr_range(w.expr, ranges_);
        r.lo = std::max(r.lo, info.lo);  // out-of-domain writes block
        r.hi = std::min(r.hi, info.hi);
        if (r.lo > r.hi) continue;  // the write can never land
        Interval& cur = ranges_[w.target];
        if (r.lo < cur.lo || r.hi > cur.hi) {
          cur.lo = std::min(cur.lo, r.lo);
          cur.hi = std::max(cur.hi, r.hi);
          changed = true;
        }
      }
      if (!changed) break;
      if (round == 62)  // widen once to guarantee convergence
        for (auto& [name, r] : ranges_) {
          const VarInfo& info = t_.ex.vars.at(name);
          r = {info.lo, info.hi};
        }
    }
  }

  void translate_stmt(const InstStmt& s, int tid, int dominator, int inst_idx) {
    const FlowSite& site = t_.flow.at(s.loc);
    int idx = stmt_name_idx_.at(s.loc);
    std::string base = "t" + std::to_string(tid) + std::to_string(idx);
    int c_p = control_place_.at(s.loc);
    int f_p = map().loc_place.at(s.loc);
    const auto& vars = t_.ex.vars;

    switch (s.kind) {
      case Stmt::Kind::Assign: {
        int tr = net().add_transition(base, TransKind::Assign, std::nullopt, tid,
                                      s.src_label);
        control_wiring(tr, s.loc, dominator, false);
        exec_wiring(tr, s.loc, false, site.succ);
        read_pairs_for(tr, s.expr, {s.target});
        write_pair(tr, s.target, s.expr);
        register_trans(tr, s.loc, inst_idx, c_p, f_p);
        if (may_overflow(s.expr, vars.at(s.target), ranges_))
          map().blocking.insert(tr);
        break;
      }
      case Stmt::Kind::Jump: {
        int tr = net().add_transition(base, TransKind::Jump, std::nullopt, tid,
                                      s.src_label);
        control_wiring(tr, s.loc, dominator, false);
        exec_wiring(tr, s.loc, false, site.succ);
        register_trans(tr, s.loc, inst_idx, c_p, f_p);
        break;
      }
      case Stmt::Kind::If:
      case Stmt::Kind::While: {
        bool is_loop = s.kind == Stmt::Kind::While;
        int tt = net().add_transition(base, TransKind::Branch, s.expr, tid,
                                      s.src_label);
        control_wiring(tt, s.loc, dominator, /*rearm=*/is_loop);
        exec_wiring(tt, s.loc, false, site.succ);
        read_pairs_for(tt, s.expr);
        register_trans(tt, s.loc, inst_idx, c_p, f_p);
        int tf = net().add_transition(base + "'", TransKind::Branch,
                                      Expr::unary(UnOp::Not, s.expr), tid,
                                      s.src_label);
        control_wiring(tf, s.loc, dominator, false);
        exec_wiring(tf, s.loc, false, site.succ_false);
        read_pairs_for(tf, s.expr);
        register_trans(tf, s.loc, inst_idx, c_p, f_p);
        if (is_loop) map().loop_heads.push_back(tt);
        translate_block(s.body, tid, tt, inst_idx);
        translate_block(s.else_body, tid, tf, inst_idx);
        break;
      }
      case Stmt::Kind::Call: {
        int tr = net().add_transition(base, TransKind::Call, std::nullopt, tid,
                                      s.src_label);
        control_wiring(tr, s.loc, dominator, false);
        // Callee structure first so the entry place exists for the enter arc.
        ColorSet unit;
        std::string tag = std::to_string(tid) + "c" + std::to_string(idx);
        int entry_p =
            net().add_place("c" + tag + "b", kControl | kExecution, unit, {});
        {
          Arc& in =
              net().add_arc(f_p, tr, true, ArcKind::Execution, ArcExpr::unit());
          in.flow = true;
          Arc& out =
              net().add_arc(entry_p, tr, false, ArcKind::Control, ArcExpr::unit());
          out.flow = true;
          out.enter_arc = true;
        }
        bool blocks = false;
        for (std::size_t i = 0; i < s.args.size(); ++i) {
          const std::string& param = s.callee->params[i];
          read_pairs_for(tr, s.args[i], {param});
          write_pair(tr, param, s.args[i]);
          if (may_overflow(s.args[i], vars.at(param), ranges_)) blocks = true;
        }
        register_trans(tr, s.loc, inst_idx, c_p, f_p);
        if (blocks) map().blocking.insert(tr);

        translate_instance(*s.callee, tid, tag, entry_p);

        // Return transition: callee terminal -> caller continuation.
        int callee_idx = index_of(s.callee);
        const InstanceNet& cn = map().instances[callee_idx];
        int rt = net().add_transition(base + "r", TransKind::Return,
                                      std::nullopt, tid, s.src_label);
        {
          Arc& in = net().add_arc(cn.terminal_p, rt, true, ArcKind::Control,
                                  ArcExpr::unit());
          in.flow = true;
          in.exit_arc = true;
          const FlowSite& rets = t_.flow.at(s.callee->done_loc);
          flow_output(rt, rets.succ);
        }
        if (!s.aux.empty()) {
          const std::string& p0 = s.callee->params[0];
          read_pair(rt, p0);
          write_pair(rt, s.aux, Expr::variable(p0));
          const auto& src = ranges_.at(p0);
          const auto& dst = vars.at(s.aux);
          if (src.lo < dst.lo || src.hi > dst.hi) map().blocking.insert(rt);
        }
        register_trans(rt, s.callee->done_loc, inst_idx, -1, cn.terminal_p);
        break;
      }
      case Stmt::Kind::Lock:
      case Stmt::Kind::Unlock: {
        bool lock = s.kind == Stmt::Kind::Lock;
        int tr = net().add_transition(
            base, lock ? TransKind::Lock : TransKind::Unlock, std::nullopt, tid,
            s.src_label);
        control_wiring(tr, s.loc, dominator, false);
        exec_wiring(tr, s.loc, false, site.succ);
        int mp = map().mutex_place.at(s.target);
        net().add_arc(mp, tr, true, ArcKind::Control,
                      ArcExpr::constant(lock ? 0 : tid));
        net().add_arc(mp, tr, false, ArcKind::Control,
                      ArcExpr::constant(lock ? tid : 0));
        register_trans(tr, s.loc, inst_idx, c_p, f_p);
        map().blocking.insert(tr);
        break;
      }
      case Stmt::Kind::Signal: {
        int nthreads = static_cast<int>(t_.ex.thread_roots.size());
        for (int j = 1; j <= nthreads; ++j) {
          if (j == tid) continue;  // a thread never waits on itself here
          int tr = net().add_transition(base + "s" + std::to_string(j),
                                        TransKind::Signal, std::nullopt, tid,
                                        s.src_label);
          control_wiring(tr, s.loc, dominator, false);
          exec_wiring(tr, s.loc, false, site.succ);
          int up = map().waitflag_place.at({s.target, j});
          net().add_arc(up, tr, true, ArcKind::Control, ArcExpr::constant(1));
          net().add_arc(up, tr, false, ArcKind::Control, ArcExpr::constant(-1));
          register_trans(tr, s.loc, inst_idx, c_p, f_p);
          map().blocking.insert(tr);
        }
        break;
      }
      case Stmt::Kind::Wait: {
        int mp = map().mutex_place.at(s.aux);
        int up = map().waitflag_place.at({s.target, tid});
        // wa1: holder == self, not yet in u: release and start waiting.
        int w1 = net().add_transition(base + "w1", TransKind::Wait1,
                                      std::nullopt, tid, s.src_label);
        control_wiring(w1, s.loc, dominator, /*rearm=*/true);
        exec_wiring(w1, s.loc, /*consume_only=*/true, -1);
        net().add_arc(mp, w1, true, ArcKind::Control, ArcExpr::constant(tid));
        net().add_arc(mp, w1, false, ArcKind::Control, ArcExpr::constant(0));
        net().add_arc(up, w1, true, ArcKind::Control, ArcExpr::constant(0));
        net().add_arc(up, w1, false, ArcKind::Control, ArcExpr::constant(1));
        register_trans(w1, s.loc, inst_idx, c_p, f_p);
        // wa2: notified and mutex free: consume the notification.
        int w2 = net().add_transition(base + "w2", TransKind::Wait2,
                                      std::nullopt, tid, s.src_label);
        control_wiring(w2, s.loc, dominator, /*rearm=*/true);
        exec_wiring(w2, s.loc, /*consume_only=*/true, -1);
        net().add_arc(mp, w2, true, ArcKind::Control, ArcExpr::constant(0));
        net().add_arc(mp, w2, false, ArcKind::Control, ArcExpr::constant(0));
        net().add_arc(up, w2, true, ArcKind::Control, ArcExpr::constant(-1));
        net().add_arc(up, w2, false, ArcKind::Control, ArcExpr::constant(0));
        register_trans(w2, s.loc, inst_idx, c_p, f_p);
        // wa3: cleared and mutex free: reacquire and advance.
        int w3 = net().add_transition(base + "w3", TransKind::Wait3,
                                      std::nullopt, tid, s.src_label);
        control_wiring(w3, s.loc, dominator, false);
        exec_wiring(w3, s.loc, false, site.succ);
        net().add_arc(mp, w3, true, ArcKind::Control, ArcExpr::constant(0));
        net().add_arc(mp, w3, false, ArcKind::Control, ArcExpr::constant(tid));
        net().add_arc(up, w3, true, ArcKind::Control, ArcExpr::constant(0));
        net().add_arc(up, w3, false, ArcKind::Control, ArcExpr::constant(0));
        register_trans(w3, s.loc, inst_idx, c_p, f_p);
        for (int tr : {w1, w2, w3}) map().blocking.insert(tr);
        break;
      }
      case Stmt::Kind::ErrorMark: {
        int tr = net().add_transition(base, TransKind::Error, std::nullopt, tid,
                                      s.src_label);
        control_wiring(tr, s.loc, dominator, false);
        exec_wiring(tr, s.loc, false, site.abort_loc);
        register_trans(tr, s.loc, inst_idx, c_p, f_p);
        map().error_transitions.push_back(tr);
        break;
      }
    }
  }

  Translation t_;
  std::map<std::string, Interval> ranges_;  // reachable value ranges
  std::map<int, int> control_place_;   // stmt loc -> control place
  std::map<int, int> stmt_name_idx_;   // stmt loc -> per-thread naming index
  std::set<int> deposited_;            // control places already wired to a dominator
  int place_idx_ = 0;
};

}  // namespace detail

inline Translation translate(const Program& p) {
  return detail::Translator(p).take();
}

}  // namespace pdnet
