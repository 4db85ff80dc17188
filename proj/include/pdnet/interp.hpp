#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pdnet/expand.hpp"
#include "pdnet/flow.hpp"

namespace pdnet {

// Small-step reference interpreter. It executes the expanded program under
// the LTS rules (ass, jum, ret, tcd, fcd, call, rets, acq, rel, sig, wa1,
// wa2, wa3) plus explicit enter/err steps that mirror the net's enter/error
// transitions, so interpreter states and net markings stay in lockstep.

struct Configuration {
  std::vector<int> loc;                     // per thread, index tid-1
  std::map<std::string, std::int64_t> mem;  // qualified variable -> value
  std::vector<int> holder;                  // per mutex, 0 = free
  std::vector<std::set<int>> waiting;       // per condvar: +i members of u
  std::vector<std::set<int>> notified;      // per condvar: -i members of u

  bool operator==(const Configuration& o) const {
    return loc == o.loc && mem == o.mem && holder == o.holder &&
           waiting == o.waiting && notified == o.notified;
  }
  bool operator<(const Configuration& o) const {
    return std::tie(loc, mem, holder, waiting, notified) <
           std::tie(o.loc, o.mem, o.holder, o.waiting, o.notified);
  }
};

struct Step {
  std::string action;  // rule tag
  int thread = 0;      // 1-based
  int src_label = 0;   // source location label of the acting statement
  Configuration config;
};

class Interp {
 public:
  explicit Interp(const Expansion& ex) : ex_(ex), flow_(build_flow(ex)) {
    for (const auto& m : ex.prog->mutexes) mutex_names_.push_back(m);
    for (const auto& c : ex.prog->condvars) cond_names_.push_back(c);
  }

  Configuration initial() const {
    Configuration c;
    for (const auto* root : ex_.thread_roots) c.loc.push_back(root->enter_loc);
    for (const auto& [name, v] : ex_.vars) c.mem[name] = v.init;
    c.holder.assign(mutex_names_.size(), 0);
    c.waiting.assign(cond_names_.size(), {});
    c.notified.assign(cond_names_.size(), {});
    return c;
  }

  // All one-step successors. `overflow` (if given) is set when some thread's
  // next assignment would leave its declared domain (that step is dropped).
  std::vector<Step> successors(const Configuration& c,
                               bool* overflow = nullptr) const {
    std::vector<Step> out;
    for (int i = 1; i <= static_cast<int>(ex_.thread_roots.size()); ++i)
      thread_successors(c, i, out, overflow);
    return out;
  }

  struct ReachResult {
    std::set<Configuration> configs;
    bool truncated = false;
    bool overflow = false;
  };

  ReachResult reachable(std::size_t bound) const {
    ReachResult r;
    std::vector<Configuration> frontier{initial()};
    r.configs.insert(frontier.front());
    while (!frontier.empty()) {
      Configuration c = frontier.back();
      frontier.pop_back();
      for (const auto& s : successors(c, &r.overflow)) {
        if (r.configs.count(s.config)) continue;
        if (r.configs.size() >= bound) {
          r.truncated = true;
          return r;
        }
        r.configs.insert(s.config);
        frontier.push_back(s.config);
      }
    }
    return r;
  }

  int mutex_index(const std::string& name) const {
    for (std::size_t i = 0; i < mutex_names_.size(); ++i)
      if (mutex_names_[i] == name) return static_cast<int>(i);
    return -1;
  }
  int cond_index(const std::string& name) const {
    for (std::size_t i = 0; i < cond_names_.size(); ++i)
      if (cond_names_[i] == name) return static_cast<int>(i);
    return -1;
  }

 private:
  bool in_domain(const std::string& var, std::int64_t v) const {
    const auto& info = ex_.vars.at(var);
    return v >= info.lo && v <= info.hi;
  }

  void thread_successors(const Configuration& base, int tid,
                         std::vector<Step>& out, bool* overflow) const {
    auto it = flow_.find(base.loc[tid - 1]);
    if (it == flow_.end()) return;
    const FlowSite& site = it->second;

    auto emit = [&](const std::string& action, int src_label, Configuration next) {
      out.push_back({action, tid, src_label, std::move(next)});
    };
    auto moved = [&](int to) {
      Configuration n = base;
      n.loc[tid - 1] = to;
      return n;
    };

    switch (site.kind) {
      case FlowSite::Kind::Enter:
        emit("enter", site.inst->fn->enter_label, moved(site.succ));
        return;
      case FlowSite::Kind::Exit:
        emit("ret", site.inst->fn->exit_label, moved(site.succ));
        return;
      case FlowSite::Kind::Done:
        return;
      case FlowSite::Kind::Rets: {
        const InstStmt& call = *site.stmt;
        Configuration n = moved(site.succ);
        if (!call.aux.empty()) {
          std::int64_t v = base.mem.at(call.callee->params[0]);
          if (!in_domain(call.aux, v)) {
            if (overflow) *overflow = true;
            return;
          }
          n.mem[call.aux] = v;
        }
        emit("rets", call.src_label, std::move(n));
        return;
      }
      case FlowSite::Kind::Stmt:
        break;
    }

    const InstStmt& s = *site.stmt;
    switch (s.kind) {
      case Stmt::Kind::Assign: {
        std::int64_t v = eval_expr(s.expr, base.mem);
        if (!in_domain(s.target, v)) {
          if (overflow) *overflow = true;
          return;
        }
        Configuration n = moved(site.succ);
        n.mem[s.target] = v;
        emit("ass", s.src_label, std::move(n));
        return;
      }
      case Stmt::Kind::Jump:
        emit("jum", s.src_label, moved(site.succ));
        return;
      case Stmt::Kind::If:
      case Stmt::Kind::While: {
        bool taken = eval_expr(s.expr, base.mem) != 0;
        emit(taken ? "tcd" : "fcd", s.src_label,
             moved(taken ? site.succ : site.succ_false));
        return;
      }
      case Stmt::Kind::Call: {
        Configuration n = moved(site.succ);
        for (std::size_t i = 0; i < s.args.size(); ++i) {
          std::int64_t v = eval_expr(s.args[i], base.mem);
          const std::string& param = s.callee->params[i];
          if (!in_domain(param, v)) {
            if (overflow) *overflow = true;
            return;
          }
          n.mem[param] = v;
        }
        emit("call", s.src_label, std::move(n));
        return;
      }
      case Stmt::Kind::Lock: {
        int m = mutex_index(s.target);
        if (base.holder[m] != 0) return;  // blocked
        Configuration n = moved(site.succ);
        n.holder[m] = tid;
        emit("acq", s.src_label, std::move(n));
        return;
      }
      case Stmt::Kind::Unlock: {
        int m = mutex_index(s.target);
        if (base.holder[m] != tid) return;
        Configuration n = moved(site.succ);
        n.holder[m] = 0;
        emit("rel", s.src_label, std::move(n));
        return;
      }
      case Stmt::Kind::Signal: {
        int cv = cond_index(s.target);
        if (base.waiting[cv].empty()) return;  // sig premise {j} ∈ u(γ)
        int j = *base.waiting[cv].begin();     // smallest waiting thread id
        Configuration n = moved(site.succ);
        n.waiting[cv].erase(j);
        n.notified[cv].insert(j);
        emit("sig", s.src_label, std::move(n));
        return;
      }
      case Stmt::Kind::Wait: {
        int cv = cond_index(s.target);
        int m = mutex_index(s.aux);
        bool in_u = base.waiting[cv].count(tid) || base.notified[cv].count(tid);
        if (base.holder[m] == tid && !in_u) {
          // wa1: release the mutex and join the wait multiset; h unchanged.
          Configuration n = base;
          n.holder[m] = 0;
          n.waiting[cv].insert(tid);
          emit("wa1", s.src_label, std::move(n));
        } else if (base.holder[m] == 0 && base.notified[cv].count(tid)) {
          // wa2: consume the notification; h unchanged.
          Configuration n = base;
          n.notified[cv].erase(tid);
          emit("wa2", s.src_label, std::move(n));
        } else if (base.holder[m] == 0 && !in_u) {
          // wa3: reacquire the mutex and advance.
          Configuration n = moved(site.succ);
          n.holder[m] = tid;
          emit("wa3", s.src_label, std::move(n));
        }
        return;
      }
      case Stmt::Kind::ErrorMark:
        emit("err", s.src_label, moved(site.abort_loc));
        return;
    }
  }

  const Expansion& ex_;
  FlowMap flow_;
  std::vector<std::string> mutex_names_;
  std::vector<std::string> cond_names_;
};

}  // namespace pdnet
