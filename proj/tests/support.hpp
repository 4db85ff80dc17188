#pragma once

// Shared test machinery: random program / formula / graph generators, an
// SCC-based emptiness oracle independent of the nested DFS, lasso-word
// acceptance for automata, and a helper to re-run the slicer on a slice.

#include <random>
#include <set>
#include <string>
#include <vector>

#include "pdnet/buchi.hpp"
#include "pdnet/checker.hpp"
#include "pdnet/slicer.hpp"

namespace testsupport {

using Rng = std::mt19937;

inline int pick(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// ---------------------------------------------------------------------------
// Abstract Büchi-style graphs and an SCC emptiness oracle
// ---------------------------------------------------------------------------

struct TestGraph {
  std::vector<int> roots_;
  std::vector<std::vector<std::pair<int, int>>> succ_;  // (target, label)
  std::vector<bool> acc_;

  const std::vector<int>& roots() const { return roots_; }
  const std::vector<std::pair<int, int>>& succ(int s) { return succ_[static_cast<std::size_t>(s)]; }
  bool accepting(int s) const { return acc_[static_cast<std::size_t>(s)]; }
};

// Ground truth: a lasso through an accepting state exists iff some SCC
// reachable from a root both contains an accepting state and carries a cycle.
inline bool scc_has_accepting_lasso(const TestGraph& g) {
  int n = static_cast<int>(g.succ_.size());
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0), comp(static_cast<std::size_t>(n), -1);
  std::vector<bool> on(static_cast<std::size_t>(n), false), reach(static_cast<std::size_t>(n), false);
  std::vector<int> stack;
  int next = 0, ncomp = 0;
  std::vector<bool> comp_acc, comp_cyc;

  // Reachability from roots.
  {
    std::vector<int> todo = g.roots_;
    for (int r : todo) reach[static_cast<std::size_t>(r)] = true;
    while (!todo.empty()) {
      int v = todo.back();
      todo.pop_back();
      for (auto [w, l] : g.succ_[static_cast<std::size_t>(v)])
        if (!reach[static_cast<std::size_t>(w)]) {
          reach[static_cast<std::size_t>(w)] = true;
          todo.push_back(w);
        }
    }
  }

  // Iterative Tarjan.
  struct Frame { int v; std::size_t i; };
  for (int s = 0; s < n; ++s) {
    if (!reach[static_cast<std::size_t>(s)] || index[static_cast<std::size_t>(s)] >= 0) continue;
    std::vector<Frame> call{{s, 0}};
    index[static_cast<std::size_t>(s)] = low[static_cast<std::size_t>(s)] = next++;
    stack.push_back(s);
    on[static_cast<std::size_t>(s)] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& succ = g.succ_[static_cast<std::size_t>(f.v)];
      if (f.i < succ.size()) {
        int w = succ[f.i++].first;
        if (index[static_cast<std::size_t>(w)] < 0) {
          index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = next++;
          stack.push_back(w);
          on[static_cast<std::size_t>(w)] = true;
          call.push_back({w, 0});
        } else if (on[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(f.v)] = std::min(low[static_cast<std::size_t>(f.v)], index[static_cast<std::size_t>(w)]);
        }
        continue;
      }
      int v = f.v;
      call.pop_back();
      if (!call.empty())
        low[static_cast<std::size_t>(call.back().v)] = std::min(low[static_cast<std::size_t>(call.back().v)], low[static_cast<std::size_t>(v)]);
      if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
        int c = ncomp++;
        comp_acc.push_back(false);
        comp_cyc.push_back(false);
        int size = 0;
        for (;;) {
          int w = stack.back();
          stack.pop_back();
          on[static_cast<std::size_t>(w)] = false;
          comp[static_cast<std::size_t>(w)] = c;
          if (g.acc_[static_cast<std::size_t>(w)]) comp_acc[static_cast<std::size_t>(c)] = true;
          ++size;
          if (w == v) break;
        }
        if (size > 1) comp_cyc[static_cast<std::size_t>(c)] = true;
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!reach[static_cast<std::size_t>(v)]) continue;
    for (auto [w, l] : g.succ_[static_cast<std::size_t>(v)])
      if (w == v) comp_cyc[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] = true;
  }
  for (int v = 0; v < n; ++v) {
    int c = comp[static_cast<std::size_t>(v)];
    if (reach[static_cast<std::size_t>(v)] && c >= 0 && comp_acc[static_cast<std::size_t>(c)] && comp_cyc[static_cast<std::size_t>(c)]) return true;
  }
  return false;
}

inline TestGraph random_graph(Rng& rng, int max_states) {
  TestGraph g;
  int n = pick(rng, 1, max_states);
  g.succ_.resize(static_cast<std::size_t>(n));
  g.acc_.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    g.acc_[static_cast<std::size_t>(v)] = pick(rng, 0, 9) == 0;
    int deg = pick(rng, 0, 3);
    for (int k = 0; k < deg; ++k)
      g.succ_[static_cast<std::size_t>(v)].emplace_back(pick(rng, 0, n - 1), k);
  }
  int nroots = pick(rng, 1, std::min(3, n));
  for (int k = 0; k < nroots; ++k) g.roots_.push_back(pick(rng, 0, n - 1));
  return g;
}

// Validates a lasso returned by the nested DFS against the graph itself.
inline bool lasso_is_genuine(const TestGraph& g, const pdnet::LassoResult& r) {
  if (r.empty || r.prefix.empty() || r.loop.empty()) return false;
  bool rooted = false;
  for (int root : g.roots_)
    if (root == r.prefix.front().first) rooted = true;
  if (!rooted) return false;
  auto connected = [&](int a, int b) {
    for (auto [w, l] : g.succ_[static_cast<std::size_t>(a)])
      if (w == b) return true;
    return false;
  };
  int at = r.prefix.front().first;
  for (std::size_t i = 1; i < r.prefix.size(); ++i) {
    if (!connected(at, r.prefix[i].first)) return false;
    at = r.prefix[i].first;
  }
  if (at != r.loop_entry) return false;  // prefix must end at the loop entry
  bool acc = false;
  for (const auto& [s, l] : r.loop) {
    if (!connected(at, s)) return false;
    at = s;
    if (g.acc_[static_cast<std::size_t>(s)]) acc = true;
  }
  return at == r.loop_entry && acc;
}

// ---------------------------------------------------------------------------
// Lasso-word acceptance of a Büchi automaton (via the SCC oracle)
// ---------------------------------------------------------------------------

inline bool word_accepted(const pdnet::BuchiAutomaton& aut,
                          const std::vector<std::vector<bool>>& word,
                          std::size_t prefix_len) {
  std::size_t n = word.size();
  TestGraph g;
  g.succ_.resize(n * aut.edges.size());
  g.acc_.resize(n * aut.edges.size());
  auto id = [&](std::size_t pos, int q) {
    return static_cast<int>(pos * aut.edges.size() + static_cast<std::size_t>(q));
  };
  auto next = [&](std::size_t pos) { return pos + 1 < n ? pos + 1 : prefix_len; };
  for (std::size_t pos = 0; pos < n; ++pos)
    for (std::size_t q = 0; q < aut.edges.size(); ++q) {
      // Prefix positions never lie on a cycle, so plain state acceptance works.
      g.acc_[static_cast<std::size_t>(id(pos, static_cast<int>(q)))] =
          aut.accepting[q];
      for (const auto& e : aut.edges[q])
        if (pdnet::BuchiAutomaton::satisfied(e, word[next(pos)]))
          g.succ_[static_cast<std::size_t>(id(pos, static_cast<int>(q)))]
              .emplace_back(id(next(pos), e.to), 0);
    }
  for (const auto& e : aut.edges[static_cast<std::size_t>(aut.initial)])
    if (pdnet::BuchiAutomaton::satisfied(e, word[0]))
      g.roots_.push_back(id(0, e.to));
  return scc_has_accepting_lasso(g);
}

// ---------------------------------------------------------------------------
// Random formulas over abstract atoms a0..a{k-1}
// ---------------------------------------------------------------------------

inline pdnet::Formula random_formula(Rng& rng, int natoms, int depth) {
  using F = pdnet::Formula;
  using K = F::Kind;
  if (depth == 0 || pick(rng, 0, 4) == 0) {
    int r = pick(rng, 0, natoms + 1);
    if (r == natoms) return F::t();
    if (r == natoms + 1) return F::f();
    F a = F::fireable("a" + std::to_string(r));
    a.atom_id = r;
    return a;
  }
  switch (pick(rng, 0, 6)) {
    case 0: return F::un(K::Not, random_formula(rng, natoms, depth - 1));
    case 1: return F::un(K::Future, random_formula(rng, natoms, depth - 1));
    case 2: return F::un(K::Globally, random_formula(rng, natoms, depth - 1));
    case 3:
      return F::bin(K::And, random_formula(rng, natoms, depth - 1),
                    random_formula(rng, natoms, depth - 1));
    case 4:
      return F::bin(K::Or, random_formula(rng, natoms, depth - 1),
                    random_formula(rng, natoms, depth - 1));
    case 5:
      return F::bin(K::Imp, random_formula(rng, natoms, depth - 1),
                    random_formula(rng, natoms, depth - 1));
    default:
      return F::bin(K::Until, random_formula(rng, natoms, depth - 1),
                    random_formula(rng, natoms, depth - 1));
  }
}

// ---------------------------------------------------------------------------
// Random programs (source text, so the parser is exercised too)
// ---------------------------------------------------------------------------

class ProgramGen {
 public:
  explicit ProgramGen(Rng& rng) : rng_(rng) {}

  std::string operator()() {
    src_.clear();
    nglobals_ = pick(rng_, 2, 3);
    with_mutex_ = pick(rng_, 0, 1) == 1;
    has_error_ = false;
    for (int i = 0; i < nglobals_; ++i)
      src_ += "global g" + std::to_string(i) + " in [-8, 8] = " +
              std::to_string(pick(rng_, 0, 2)) + ";\n";
    if (with_mutex_) src_ += "mutex m;\n";
    for (int t = 0; t < 2; ++t) {
      src_ += "fn thr" + std::to_string(t) + "() {\n";
      block(pick(rng_, 2, 4), 1, 2);
      src_ += "}\n";
    }
    src_ += "thread thr0;\nthread thr1;\n";
    return src_;
  }

  bool has_error() const { return has_error_; }
  int globals() const { return nglobals_; }

 private:
  void indent(int d) { src_.append(static_cast<std::size_t>(2 * d), ' '); }

  std::string var() { return "g" + std::to_string(pick(rng_, 0, nglobals_ - 1)); }

  std::string expr() {
    switch (pick(rng_, 0, 4)) {
      case 0: return std::to_string(pick(rng_, -3, 3));
      case 1: return var();
      case 2: return var() + " + " + std::to_string(pick(rng_, 1, 2));
      case 3: return var() + " - " + std::to_string(pick(rng_, 1, 2));
      default: return var() + " + " + var();
    }
  }

  std::string cond() {
    static const char* ops[] = {"<", "<=", "=", "!=", ">", ">="};
    return var() + " " + ops[pick(rng_, 0, 5)] + " " +
           std::to_string(pick(rng_, -2, 2));
  }

  void block(int stmts, int d, int budget) {
    for (int i = 0; i < stmts; ++i) stmt(d, budget);
  }

  void stmt(int d, int budget) {
    int r = pick(rng_, 0, 9);
    if (budget > 0 && r == 0) {
      indent(d);
      src_ += "if (" + cond() + ") {\n";
      block(pick(rng_, 1, 2), d + 1, budget - 1);
      indent(d);
      if (pick(rng_, 0, 1)) {
        src_ += "} else {\n";
        block(1, d + 1, budget - 1);
        indent(d);
      }
      src_ += "}\n";
      return;
    }
    if (budget > 0 && r == 1) {
      // Loop on a decreasing counter so most runs terminate.
      std::string v = var();
      indent(d);
      src_ += "while (" + v + " > 0) {\n";
      indent(d + 1);
      src_ += v + " := " + v + " - 1;\n";
      block(pick(rng_, 0, 1), d + 1, budget - 1);
      indent(d);
      src_ += "}\n";
      return;
    }
    if (with_mutex_ && r == 2) {
      indent(d);
      src_ += "lock m;\n";
      stmt(d, 0);
      indent(d);
      src_ += "unlock m;\n";
      return;
    }
    if (r == 3 && !has_error_) {
      has_error_ = true;
      indent(d);
      src_ += "if (" + cond() + ") {\n";
      indent(d + 1);
      src_ += "error;\n";
      indent(d);
      src_ += "}\n";
      return;
    }
    indent(d);
    src_ += var() + " := " + expr() + ";\n";
  }

  Rng& rng_;
  std::string src_;
  int nglobals_ = 2;
  bool with_mutex_ = false;
  bool has_error_ = false;
};

// Random checkable formula over a generated program's vocabulary.
inline std::string random_program_formula(Rng& rng, int nglobals, bool has_error) {
  auto atom = [&]() -> std::string {
    if (has_error && pick(rng, 0, 2) == 0) return "fireable(err)";
    static const char* ops[] = {"<", "<=", "=", "!=", ">", ">="};
    return "tok(g" + std::to_string(pick(rng, 0, nglobals - 1)) + ") " +
           ops[pick(rng, 0, 5)] + " " + std::to_string(pick(rng, -2, 2));
  };
  switch (pick(rng, 0, 5)) {
    case 0: return "G !(" + atom() + ")";
    case 1: return "G (" + atom() + ")";
    case 2: return "F (" + atom() + ")";
    case 3: return "G ((" + atom() + ") -> F (" + atom() + "))";
    case 4: return "(" + atom() + ") U (" + atom() + ")";
    default: return "F G (" + atom() + ")";
  }
}

// ---------------------------------------------------------------------------
// Re-slicing support: project a Translation onto a slice so the slicer can
// run on its own output.
// ---------------------------------------------------------------------------

inline pdnet::Translation restrict_translation(const pdnet::Translation& tr,
                                               const pdnet::SlicedNet& sl) {
  using namespace pdnet;
  Translation out;
  out.net = sl.net;
  auto p = [&](int id) {
    auto it = sl.place_new.find(id);
    return it == sl.place_new.end() ? -1 : it->second;
  };
  auto t = [&](int id) {
    auto it = sl.trans_new.find(id);
    return it == sl.trans_new.end() ? -1 : it->second;
  };
  for (const auto& [loc, ts] : tr.map.loc_transitions) {
    std::vector<int> kept;
    for (int x : ts)
      if (t(x) >= 0) kept.push_back(t(x));
    if (!kept.empty()) out.map.loc_transitions[loc] = kept;
  }
  for (const auto& [name, id] : tr.map.var_place)
    if (p(id) >= 0) {
      out.map.var_place[name] = p(id);
      out.map.var_global[name] = tr.map.var_global.at(name);
    }
  for (const auto& [x, c] : tr.map.trans_control)
    if (t(x) >= 0) out.map.trans_control[t(x)] = c >= 0 ? p(c) : -1;
  for (const auto& [x, f] : tr.map.trans_exec)
    if (t(x) >= 0 && p(f) >= 0) out.map.trans_exec[t(x)] = p(f);
  for (auto [e, x] : tr.map.thread_enter_exit)
    out.map.thread_enter_exit.emplace_back(t(e), t(x));
  for (const auto& in : tr.map.instances) {
    InstanceNet n;
    n.inst = in.inst;
    n.enter_t = t(in.enter_t);
    n.exit_t = t(in.exit_t);
    n.entry_p = p(in.entry_p);
    n.exitloc_p = p(in.exitloc_p);
    n.terminal_p = p(in.terminal_p);
    out.map.instances.push_back(n);
  }
  for (const auto& [x, i] : tr.map.trans_instance)
    if (t(x) >= 0) out.map.trans_instance[t(x)] = i;
  for (const auto& [name, id] : tr.map.mutex_place)
    if (p(id) >= 0) out.map.mutex_place[name] = p(id);
  for (const auto& [key, id] : tr.map.waitflag_place)
    if (p(id) >= 0) out.map.waitflag_place[key] = p(id);
  for (int x : tr.map.loop_heads)
    if (t(x) >= 0) out.map.loop_heads.push_back(t(x));
  for (int x : tr.map.blocking)
    if (t(x) >= 0) out.map.blocking.insert(t(x));
  for (int x : tr.map.error_transitions)
    if (t(x) >= 0) out.map.error_transitions.push_back(t(x));
  for (const auto& [loc, id] : tr.map.loc_place)
    if (p(id) >= 0) out.map.loc_place[loc] = p(id);
  return out;
}

}  // namespace testsupport
