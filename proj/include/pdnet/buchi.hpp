#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pdnet/ltl.hpp"

namespace pdnet {

// Büchi automaton with state-based acceptance. Edges carry a conjunction of
// literals over atom ids; a run consumes the valuation of the state it moves
// into (the initial state's outgoing edges read the word's first letter).
struct BuchiAutomaton {
  struct Edge {
    int to = 0;
    std::vector<std::pair<int, bool>> literals;  // (atom id, required value)
  };
  int initial = 0;
  std::vector<std::vector<Edge>> edges;  // by state
  std::vector<bool> accepting;

  static bool satisfied(const Edge& e, const std::vector<bool>& val) {
    for (auto [atom, want] : e.literals)
      if (val[static_cast<std::size_t>(atom)] != want) return false;
    return true;
  }

  std::string to_dot() const {
    std::ostringstream os;
    os << "digraph buchi {\n  rankdir=LR;\n";
    for (std::size_t q = 0; q < edges.size(); ++q)
      os << "  q" << q << " [shape="
         << (accepting[q] ? "doublecircle" : "circle")
         << (static_cast<int>(q) == initial ? ",style=bold" : "") << "];\n";
    for (std::size_t q = 0; q < edges.size(); ++q)
      for (const auto& e : edges[q]) {
        os << "  q" << q << " -> q" << e.to << " [label=\"";
        if (e.literals.empty()) os << "true";
        for (std::size_t i = 0; i < e.literals.size(); ++i)
          os << (i ? " && " : "") << (e.literals[i].second ? "" : "!") << "a"
             << e.literals[i].first;
        os << "\"];\n";
      }
    os << "}\n";
    return os.str();
  }
};

namespace detail {

// Tableau construction: expand each obligation set into (literals-now,
// obligations-next) disjuncts; states are the distinct expansions.
class BuchiBuilder {
 public:
  explicit BuchiBuilder(const Formula& f) : root_(f) {
    collect_eventualities(root_);
    build();
  }

  BuchiAutomaton take() { return std::move(aut_); }

 private:
  using FSet = std::set<Formula>;
  using GState = std::pair<FSet, FSet>;  // (processed closure, next obligations)

  void collect_eventualities(const Formula& f) {
    if (f.kind == Formula::Kind::Until || f.kind == Formula::Kind::Future)
      eventualities_.insert(f);
    for (const auto& a : f.args) collect_eventualities(a);
  }

  // All consistent ways to satisfy `unproc` now: each result is a processed
  // closure plus the obligations deferred to the next position.
  void expand(FSet unproc, FSet proc, FSet next, std::vector<GState>& out) {
    using K = Formula::Kind;
    while (!unproc.empty()) {
      Formula f = *unproc.begin();
      unproc.erase(unproc.begin());
      if (proc.count(f)) continue;
      switch (f.kind) {
        case K::True:
          // Recorded so an eventuality with a trivially true goal (F true,
          // a U true) is seen as discharged by the acceptance check.
          proc.insert(f);
          continue;
        case K::False: return;  // inconsistent branch
        case K::Fireable:
        case K::TokCmp:
          if (proc.count(Formula::un(K::Not, f))) return;
          proc.insert(f);
          continue;
        case K::Not:
          if (proc.count(f.args[0])) return;
          proc.insert(f);
          continue;
        case K::And:
          proc.insert(f);
          unproc.insert(f.args[0]);
          unproc.insert(f.args[1]);
          continue;
        case K::Or: {
          proc.insert(f);
          FSet u2 = unproc;
          u2.insert(f.args[1]);
          expand(std::move(u2), proc, next, out);
          unproc.insert(f.args[0]);
          continue;
        }
        case K::Imp: {  // kept total although NNF input never contains it
          proc.insert(f);
          FSet u2 = unproc;
          u2.insert(f.args[1]);
          expand(std::move(u2), proc, next, out);
          unproc.insert(Formula::un(K::Not, f.args[0]));
          continue;
        }
        case K::Until: {
          proc.insert(f);
          FSet u2 = unproc;
          u2.insert(f.args[1]);
          expand(std::move(u2), proc, next, out);
          unproc.insert(f.args[0]);
          next.insert(f);
          continue;
        }
        case K::Future: {
          proc.insert(f);
          FSet u2 = unproc;
          u2.insert(f.args[0]);
          expand(std::move(u2), proc, next, out);
          next.insert(f);
          continue;
        }
        case K::Globally:
          proc.insert(f);
          unproc.insert(f.args[0]);
          next.insert(f);
          continue;
      }
    }
    out.push_back({std::move(proc), std::move(next)});
  }

  int state_id(const GState& g, std::vector<GState>& pending) {
    auto it = ids_.find(g);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(states_.size());
    ids_[g] = id;
    states_.push_back(g);
    pending.push_back(g);
    return id;
  }

  std::vector<std::pair<int, bool>> literals_of(const FSet& proc) const {
    std::vector<std::pair<int, bool>> out;
    for (const auto& f : proc) {
      if (f.is_atom())
        out.emplace_back(f.atom_id, true);
      else if (f.kind == Formula::Kind::Not && f.args[0].is_atom())
        out.emplace_back(f.args[0].atom_id, false);
    }
    return out;
  }

  void build() {
    // Generalized automaton over GStates, then counting degeneralization.
    std::vector<GState> pending;
    std::vector<GState> init_targets;
    expand({root_}, {}, {}, init_targets);

    std::map<int, std::vector<int>> gsucc;  // generalized successor ids
    std::vector<int> init_ids;
    for (const auto& g : init_targets) init_ids.push_back(state_id(g, pending));
    while (!pending.empty()) {
      GState g = pending.back();
      pending.pop_back();
      int id = ids_.at(g);
      std::vector<GState> succs;
      expand(g.second, {}, {}, succs);
      for (const auto& s : succs) gsucc[id].push_back(state_id(s, pending));
    }

    std::vector<Formula> evs(eventualities_.begin(), eventualities_.end());
    int k = std::max<int>(1, static_cast<int>(evs.size()));
    auto passes = [&](int q, int layer) {
      if (layer >= static_cast<int>(evs.size())) return true;
      const Formula& g = evs[static_cast<std::size_t>(layer)];
      const FSet& proc = states_[static_cast<std::size_t>(q)].first;
      const Formula& goal = g.kind == Formula::Kind::Until ? g.args[1] : g.args[0];
      return !proc.count(g) || proc.count(goal);
    };

    // Product states (q, layer); the layer advances when the source state
    // discharges the layer's eventuality; acceptance = discharging layer 0.
    std::map<std::pair<int, int>, int> did;
    auto dstate = [&](int q, int layer) {
      auto key = std::make_pair(q, layer);
      auto it = did.find(key);
      if (it != did.end()) return it->second;
      int id = static_cast<int>(aut_.edges.size());
      did[key] = id;
      aut_.edges.emplace_back();
      aut_.accepting.push_back(layer == 0 && passes(q, 0));
      dpending_.push_back(key);
      return id;
    };

    aut_.initial = 0;
    aut_.edges.emplace_back();  // the dedicated initial state
    aut_.accepting.push_back(false);
    for (int q : init_ids) {
      BuchiAutomaton::Edge e;
      e.to = dstate(q, 0);
      e.literals = literals_of(states_[static_cast<std::size_t>(q)].first);
      aut_.edges[0].push_back(std::move(e));
    }
    while (!dpending_.empty()) {
      auto [q, layer] = dpending_.back();
      dpending_.pop_back();
      int from = did.at({q, layer});
      int next_layer = passes(q, layer) ? (layer + 1) % k : layer;
      for (int q2 : gsucc[q]) {
        BuchiAutomaton::Edge e;
        e.to = dstate(q2, next_layer);
        e.literals = literals_of(states_[static_cast<std::size_t>(q2)].first);
        aut_.edges[static_cast<std::size_t>(from)].push_back(std::move(e));
      }
    }
  }

  Formula root_;
  std::set<Formula> eventualities_;
  std::map<GState, int> ids_;
  std::vector<GState> states_;
  std::vector<std::pair<int, int>> dpending_;
  BuchiAutomaton aut_;
};

}  // namespace detail

// The input must be in negation-normal form (see nnf/negate) with atoms
// resolved if edge labels are to be evaluated later.
inline BuchiAutomaton translate_to_buchi(const Formula& f) {
  return detail::BuchiBuilder(f).take();
}

}  // namespace pdnet
