#pragma once

#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdnet/translate.hpp"

namespace pdnet {

enum class DepKind { Co, Ca, Lo, Po, D, I };

inline const char* to_string(DepKind k) {
  switch (k) {
    case DepKind::Co: return "co";
    case DepKind::Ca: return "ca";
    case DepKind::Lo: return "lo";
    case DepKind::Po: return "po";
    case DepKind::D: return "D";
    case DepKind::I: return "I";
  }
  return "?";
}

struct DependenceEdge {
  int from = -1;  // the transition depended upon
  int to = -1;    // the dependent transition
  DepKind kind = DepKind::Co;
  int witness = -1;  // variable place for D/I

  bool operator<(const DependenceEdge& o) const {
    return std::tie(from, to, kind, witness) <
           std::tie(o.from, o.to, o.kind, o.witness);
  }
};

// Dependence queries over the execution-path graph: the directed graph whose
// nodes are transitions and places and whose edges are the flow-flagged arcs.
class Deps {
 public:
  explicit Deps(const Translation& tr) : tr_(tr), net_(tr.net) {
    nt_ = static_cast<int>(net_.transitions.size());
    np_ = static_cast<int>(net_.places.size());
    out_.assign(nt_ + np_, {});
    for (const auto& a : net_.arcs) {
      if (!a.flow) continue;
      if (a.place_to_trans)
        out_[node_p(a.place)].push_back({a.id, node_t(a.trans)});
      else
        out_[node_t(a.trans)].push_back({a.id, node_p(a.place)});
    }
    for (const auto& [name, pid] : tr_.map.mutex_place) mutex_places_.insert(pid);
    for (const auto& [key, pid] : tr_.map.waitflag_place) wait_places_.insert(pid);
  }

  // R(t_m, t_n): a (non-empty) execution path from t_m to t_n, optionally
  // avoiding one arc on every path.
  bool reachable(int tm, int tn, int excluded_arc = -1) const {
    return search(node_t(tm), node_t(tn), excluded_arc, /*avoid_node=*/-1);
  }

  // C~(t_m, t_n): t_n reachable from t_m, yet some maximal execution path
  // from t_m omits t_n (so firing t_m does not commit to t_n).
  bool control_scope(int tm, int tn) const {
    TransKind k = net_.transitions[tm].kind;
    if (k != TransKind::Branch && k != TransKind::Enter)
      throw std::runtime_error("control_scope: " + net_.transitions[tm].name +
                               " is neither a branch nor an enter transition");
    if (!reachable(tm, tn)) return false;
    // Explore with t_n deleted; a maximal path avoiding t_n exists iff we can
    // reach a flow sink or a cycle of the reduced graph.
    std::vector<int> seen(out_.size(), 0);
    std::vector<int> stack{node_t(tm)};
    std::vector<int> reached;
    seen[node_t(tm)] = 1;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      reached.push_back(x);
      for (const auto& [aid, y] : out_[x]) {
        if (y == node_t(tn) || seen[y]) continue;
        seen[y] = 1;
        stack.push_back(y);
      }
    }
    for (int x : reached)
      if (out_[x].empty()) return true;  // sink of the full graph
    // Cycle within the reduced reachable subgraph.
    std::vector<int> color(out_.size(), 0);
    for (int x : reached)
      if (color[x] == 0 && has_cycle(x, node_t(tn), seen, color)) return true;
    return false;
  }

  // C<(t_m, t_n): t_n reachable from the acquisition t_m with no path between
  // them passing a release of the same mutex.
  bool critical_region(int tm, int tn) const {
    TransKind k = net_.transitions[tm].kind;
    if (k != TransKind::Lock && k != TransKind::Wait3)
      throw std::runtime_error("critical_region: " + net_.transitions[tm].name +
                               " does not acquire a mutex");
    int mp = acquired_mutex(tm);
    if (mp < 0 || !reachable(tm, tn)) return false;
    for (const auto& t : net_.transitions) {
      if (t.id == tm || t.id == tn) continue;
      if (!releases(t.id, mp)) continue;
      if (reachable(tm, t.id) && reachable(t.id, tn)) return false;
    }
    return true;
  }

  struct RefDef {
    std::set<int> ref, def;
  };

  // Partition of •t ∩ variable places by read-write arc-expression equality:
  // a value-preserving pair is a reference, a changing pair is a definition.
  RefDef ref_def_sets(int t) const {
    RefDef rd;
    for (int ain : net_.in_arcs(t)) {
      const Arc& a = net_.arcs[ain];
      if (a.kind != ArcKind::ReadWrite) continue;
      for (int aout : net_.out_arcs(t)) {
        const Arc& b = net_.arcs[aout];
        if (b.kind != ArcKind::ReadWrite || b.place != a.place) continue;
        (a.expr == b.expr ? rd.ref : rd.def).insert(a.place);
      }
    }
    return rd;
  }

  // Variables whose value the transition actually consumes: guard inputs and
  // inputs of produced-token expressions. Unlike ref_def_sets this counts a
  // read-and-write place (x := x+1) as read.
  std::set<std::string> used_vars(int t) const {
    std::set<std::string> out;
    if (net_.transitions[t].guard)
      for (const auto& v : net_.transitions[t].guard->vars()) out.insert(v);
    for (int aid : net_.out_arcs(t)) {
      const Arc& a = net_.arcs[aid];
      if (a.expr.kind == ArcExpr::Kind::Eval)
        for (const auto& v : a.expr.expr.vars()) out.insert(v);
    }
    return out;
  }

  // t_m data-dependent on t_n: a def-use pair on a shared variable place with
  // a connecting path free of intermediate redefinition. Returns the witness.
  std::optional<int> data_dependent(int tn, int tm) const {
    RefDef dn = ref_def_sets(tn), rm = ref_def_sets(tm);
    for (int p : dn.def) {
      if (!rm.ref.count(p)) continue;
      if (undisturbed_path(tn, tm, p, -1)) return p;
    }
    return std::nullopt;
  }

  // t_m interference-dependent on t_n: a def-use pair whose transitions run
  // in different threads (judged statically).
  std::optional<int> interference_dependent(int tn, int tm) const {
    int a = net_.transitions[tn].thread, b = net_.transitions[tm].thread;
    if (a == 0 || b == 0 || a == b) return std::nullopt;
    RefDef dn = ref_def_sets(tn), rm = ref_def_sets(tm);
    for (int p : dn.def)
      if (rm.ref.count(p)) return p;
    return std::nullopt;
  }

  // A path t_n -> ... -> t_m along flow arcs on which no intermediate
  // transition redefines the variable place p (used both by the literal
  // D-dependence and by the slicer's on-demand data-flow capture).
  bool undisturbed_path(int tn, int tm, int p, int excluded_arc) const {
    std::vector<char> seen(out_.size(), 0);
    std::vector<int> stack{node_t(tn)};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (const auto& [aid, y] : out_[x]) {
        if (aid == excluded_arc || seen[y]) continue;
        if (y == node_t(tm)) return true;
        seen[y] = 1;
        if (y < nt_ && defines(y, p)) continue;  // redefinition cuts the path
        stack.push_back(y);
      }
    }
    return false;
  }

  bool defines(int t, int p) const {
    RefDef rd = ref_def_sets(t);
    return rd.def.count(p) != 0;
  }

  // The four control-flow dependence kinds, read off the net structure.
  std::vector<DependenceEdge> control_flow_dependence_edges() const {
    std::set<DependenceEdge> out;
    // co: materialized dominator chains t' -> c -> t over plain control places.
    for (const auto& a : net_.arcs) {
      if (a.kind != ArcKind::Control || a.place_to_trans || a.replenish ||
          a.enter_arc)
        continue;
      const Place& p = net_.places[a.place];
      if (p.roles != kControl) continue;
      for (int bid : net_.place_out_arcs(a.place)) {
        const Arc& b = net_.arcs[bid];
        if (b.kind == ArcKind::Control)
          out.insert({a.trans, b.trans, DepKind::Co, -1});
      }
    }
    // ca: caller -> callee entry, callee exit -> return site.
    for (const auto& a : net_.arcs) {
      if (a.enter_arc) {
        for (int bid : net_.place_out_arcs(a.place))
          out.insert({a.trans, net_.arcs[bid].trans, DepKind::Ca, -1});
      } else if (a.exit_arc) {
        for (int bid : net_.place_in_arcs(a.place))
          out.insert({net_.arcs[bid].trans, a.trans, DepKind::Ca, -1});
      }
    }
    // lo / po: transitions coupled through a mutex or wait-flag place.
    auto couple = [&](const std::set<int>& places, DepKind kind) {
      for (int pid : places) {
        for (int ain : net_.place_in_arcs(pid)) {
          for (int aout : net_.place_out_arcs(pid)) {
            int from = net_.arcs[ain].trans, to = net_.arcs[aout].trans;
            if (from != to) out.insert({from, to, kind, -1});
          }
        }
      }
    };
    couple(mutex_places_, DepKind::Lo);
    couple(wait_places_, DepKind::Po);
    return {out.begin(), out.end()};
  }

  std::vector<DependenceEdge> all_dependence_edges() const {
    auto out = control_flow_dependence_edges();
    std::set<DependenceEdge> extra;
    for (const auto& tn : net_.transitions) {
      if (ref_def_sets(tn.id).def.empty()) continue;
      for (const auto& tm : net_.transitions) {
        if (tn.id != tm.id)
          if (auto w = data_dependent(tn.id, tm.id))
            extra.insert({tn.id, tm.id, DepKind::D, *w});
        if (auto w = interference_dependent(tn.id, tm.id))
          extra.insert({tn.id, tm.id, DepKind::I, *w});
      }
    }
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
  }

  // Dependence overlay: transitions plus one styled edge per dependence.
  std::string to_dot_overlay() const {
    std::ostringstream os;
    os << "digraph deps {\n  rankdir=TB;\n";
    for (const auto& t : net_.transitions)
      os << "  t" << t.id << " [shape=box,label=\"" << t.name << "\"];\n";
    for (const auto& e : all_dependence_edges()) {
      const char* style = e.kind == DepKind::D || e.kind == DepKind::I
                              ? "bold"
                              : "dotted";
      os << "  t" << e.from << " -> t" << e.to << " [style=" << style
         << ",label=\"" << to_string(e.kind);
      if (e.witness >= 0) os << ":" << net_.places[e.witness].name;
      os << "\"];\n";
    }
    os << "}\n";
    return os.str();
  }

  const std::set<int>& mutex_places() const { return mutex_places_; }
  const std::set<int>& wait_places() const { return wait_places_; }

  bool releases(int t, int mutex_place) const {
    bool in_held = false, out_free = false;
    for (int aid : net_.in_arcs(t)) {
      const Arc& a = net_.arcs[aid];
      if (a.place == mutex_place && a.expr.kind == ArcExpr::Kind::Const &&
          a.expr.value != 0)
        in_held = true;
    }
    for (int aid : net_.out_arcs(t)) {
      const Arc& a = net_.arcs[aid];
      if (a.place == mutex_place && a.expr.kind == ArcExpr::Kind::Const &&
          a.expr.value == 0)
        out_free = true;
    }
    return in_held && out_free;
  }

  int acquired_mutex(int t) const {
    for (int aid : net_.out_arcs(t)) {
      const Arc& a = net_.arcs[aid];
      if (mutex_places_.count(a.place) && a.expr.kind == ArcExpr::Kind::Const &&
          a.expr.value != 0)
        return a.place;
    }
    return -1;
  }

 private:
  int node_t(int t) const { return t; }
  int node_p(int p) const { return nt_ + p; }

  bool search(int from, int to, int excluded_arc, int avoid_node) const {
    std::vector<char> seen(out_.size(), 0);
    std::vector<int> stack{from};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (const auto& [aid, y] : out_[x]) {
        if (aid == excluded_arc || y == avoid_node || seen[y]) continue;
        if (y == to) return true;
        seen[y] = 1;
        stack.push_back(y);
      }
    }
    return false;
  }

  bool has_cycle(int x, int banned, const std::vector<int>& in_set,
                 std::vector<int>& color) const {
    color[x] = 1;
    for (const auto& [aid, y] : out_[x]) {
      if (y == banned || !in_set[y]) continue;
      if (color[y] == 1) return true;
      if (color[y] == 0 && has_cycle(y, banned, in_set, color)) return true;
    }
    color[x] = 2;
    return false;
  }

  const Translation& tr_;
  const PDNet& net_;
  int nt_ = 0, np_ = 0;
  std::vector<std::vector<std::pair<int, int>>> out_;  // (arc id, node)
  std::set<int> mutex_places_, wait_places_;
};

}  // namespace pdnet
