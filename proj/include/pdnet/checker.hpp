#pragma once

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <vector>

#include "pdnet/buchi.hpp"
#include "pdnet/ltl.hpp"
#include "pdnet/net.hpp"

namespace pdnet {

// ---------------------------------------------------------------------------
// Reachability graph
// ---------------------------------------------------------------------------

struct RGraph {
  std::vector<Marking> nodes;  // node 0 = initial marking
  // (transition, target); transition -1 is the stutter self-loop added to
  // dead markings so that every path is infinite.
  std::vector<std::vector<std::pair<int, int>>> edges;
  bool truncated = false;
  std::size_t fired = 0;
};

// Successor exploration order. The default explores a function's exit
// transition after everything else that is enabled, which makes the search
// surface racing statements before thread wind-down; kById is the plain
// ascending-transition-id order.
enum class SuccOrder { kExitLast, kById };

inline RGraph reachability_graph(const PDNet& net, std::size_t bound,
                                 SuccOrder order = SuccOrder::kExitLast) {
  RGraph g;
  std::unordered_map<std::vector<std::int32_t>, int, MarkingKeyHash> ids;
  Marking m0 = Marking::initial(net);
  ids[m0.pack()] = 0;
  g.nodes.push_back(m0);
  g.edges.emplace_back();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    auto succ = successors(net, g.nodes[i]);
    if (order == SuccOrder::kExitLast)
      std::stable_partition(succ.begin(), succ.end(), [&](const NetStep& s) {
        return net.transitions[s.trans].kind != TransKind::Exit;
      });
    g.fired += succ.size();
    if (succ.empty()) {
      g.edges[i].emplace_back(-1, static_cast<int>(i));
      continue;
    }
    for (auto& s : succ) {
      auto key = s.marking.pack();
      auto it = ids.find(key);
      int to;
      if (it != ids.end()) {
        to = it->second;
      } else {
        if (g.nodes.size() >= bound) {
          g.truncated = true;
          return g;
        }
        to = static_cast<int>(g.nodes.size());
        ids.emplace(std::move(key), to);
        g.nodes.push_back(s.marking);
        g.edges.emplace_back();
      }
      g.edges[i].emplace_back(s.trans, to);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Product of the reachability graph with a (negated-formula) automaton
// ---------------------------------------------------------------------------

// Product states pair a reachability-graph node with an automaton state that
// has already read the node's atom valuation. Explored lazily.
class ProductSpace {
 public:
  ProductSpace(const PDNet& net, const RGraph& rg, const BuchiAutomaton& aut,
               const std::vector<Atom>& atoms)
      : net_(net), rg_(rg), aut_(aut), atoms_(atoms) {
    val_.resize(rg.nodes.size());
    for (const auto& e : aut_.edges[static_cast<std::size_t>(aut_.initial)])
      if (BuchiAutomaton::satisfied(e, valuation(0))) roots_.push_back(id(0, e.to));
  }

  const std::vector<int>& roots() const { return roots_; }
  std::size_t size() const { return states_.size(); }
  bool accepting(int s) const {
    return aut_.accepting[static_cast<std::size_t>(states_[s].second)];
  }
  std::pair<int, int> state(int s) const { return states_[s]; }

  // (successor id, fired transition; -1 = stutter)
  const std::vector<std::pair<int, int>>& succ(int s) {
    if (computed_.insert(s).second) {
      // Built locally: id() may grow succ_ and invalidate references.
      std::vector<std::pair<int, int>> memo;
      auto [node, q] = states_[s];
      for (const auto& [trans, node2] : rg_.edges[static_cast<std::size_t>(node)]) {
        const auto& val = valuation(node2);
        for (const auto& e : aut_.edges[static_cast<std::size_t>(q)])
          if (BuchiAutomaton::satisfied(e, val))
            memo.emplace_back(id(node2, e.to), trans);
      }
      succ_[s] = std::move(memo);
    }
    return succ_[s];
  }

  const std::vector<bool>& valuation(int node) {
    auto& v = val_[static_cast<std::size_t>(node)];
    if (v.size() != atoms_.size()) {
      v.clear();
      for (const auto& a : atoms_)
        v.push_back(eval_atom(net_, rg_.nodes[static_cast<std::size_t>(node)], a));
    }
    return v;
  }

 private:
  int id(int node, int q) {
    auto key = std::make_pair(node, q);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    int s = static_cast<int>(states_.size());
    ids_[key] = s;
    states_.push_back(key);
    succ_.emplace_back();
    return s;
  }

  const PDNet& net_;
  const RGraph& rg_;
  const BuchiAutomaton& aut_;
  const std::vector<Atom>& atoms_;
  std::vector<std::vector<bool>> val_;
  std::map<std::pair<int, int>, int> ids_;
  std::vector<std::pair<int, int>> states_;
  std::vector<std::vector<std::pair<int, int>>> succ_;
  std::set<int> computed_;
  std::vector<int> roots_;
};

// ---------------------------------------------------------------------------
// Nested-DFS emptiness check (iterative, with lasso extraction)
// ---------------------------------------------------------------------------

struct LassoResult {
  bool empty = true;
  // Step = (state, label of the edge taken INTO the state).
  std::vector<std::pair<int, int>> prefix;  // from a root to the loop entry
  std::vector<std::pair<int, int>> loop;    // back to the loop entry
  int loop_entry = -1;
};

// G must provide: roots() -> vector<int>; succ(int) -> vector<pair<int,int>>
// of (target, edge label); accepting(int) -> bool.
template <class G>
LassoResult ndfs_emptiness(G& g) {
  enum : char { kWhite = 0, kCyan = 1, kBlue = 2 };
  std::vector<char> color;
  std::vector<char> red;
  auto ensure = [&](int s) {
    if (s >= static_cast<int>(color.size())) {
      color.resize(static_cast<std::size_t>(s) + 1, kWhite);
      red.resize(static_cast<std::size_t>(s) + 1, 0);
    }
  };

  struct Frame {
    int state;
    int in_label;  // label of the edge that entered this state (-2 at roots)
    std::size_t next = 0;
  };
  std::vector<Frame> blue;

  LassoResult res;

  // Assembles the result once a cycle through `cyan_target` is found. The
  // current blue stack spells the path root -> ... -> blue.back(); extra is
  // the red-search path blue.back() -> ... -> cyan_target.
  auto assemble = [&](int cyan_target, int closing_label,
                      const std::vector<Frame>& extra) {
    res.empty = false;
    std::size_t cut = 0;
    while (blue[cut].state != cyan_target) ++cut;
    for (std::size_t i = 0; i <= cut; ++i)
      res.prefix.emplace_back(blue[i].state, blue[i].in_label);
    for (std::size_t i = cut + 1; i < blue.size(); ++i)
      res.loop.emplace_back(blue[i].state, blue[i].in_label);
    for (std::size_t i = 1; i < extra.size(); ++i)
      res.loop.emplace_back(extra[i].state, extra[i].in_label);
    res.loop.emplace_back(cyan_target, closing_label);
    res.loop_entry = cyan_target;
  };

  // Red search from the accepting seed (the current top of the blue stack).
  auto dfs_red = [&](int seed) {
    std::vector<Frame> stack{{seed, -2}};
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& succ = g.succ(f.state);
      if (f.next >= succ.size()) {
        stack.pop_back();
        continue;
      }
      auto [t, label] = succ[f.next++];
      ensure(t);
      if (color[t] == kCyan) {
        // Cycle: it passes through the seed, which is accepting.
        std::vector<Frame> path = stack;
        assemble(t, label, path);
        return true;
      }
      if (!red[t]) {
        red[t] = 1;
        stack.push_back({t, label});
      }
    }
    return false;
  };

  for (int root : g.roots()) {
    ensure(root);
    if (color[root] != kWhite) continue;
    color[root] = kCyan;
    blue.push_back({root, -2});
    while (!blue.empty()) {
      Frame& f = blue.back();
      const auto& succ = g.succ(f.state);
      if (f.next < succ.size()) {
        auto [t, label] = succ[f.next++];
        ensure(t);
        if (color[t] == kCyan &&
            (g.accepting(f.state) || g.accepting(t))) {
          assemble(t, label, {});
          return res;
        }
        if (color[t] == kWhite) {
          color[t] = kCyan;
          blue.push_back({t, label});
        }
        continue;
      }
      int s = f.state;
      if (g.accepting(s)) {
        red[s] = 1;
        if (dfs_red(s)) return res;
      }
      color[s] = kBlue;
      blue.pop_back();
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

enum class Verdict { Holds, Violated, BoundExceeded };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::BoundExceeded: return "bound-exceeded";
  }
  return "?";
}

struct CheckResult {
  Verdict verdict = Verdict::Holds;
  // Counterexample lasso as fired transitions (-1 = deadlock stutter step).
  std::vector<int> prefix, loop;
  std::size_t markings = 0;
  std::size_t product_states = 0;
  std::size_t fired = 0;
};

// Core check: is some accepting lasso of (reachability graph × automaton of
// the NEGATED formula) reachable? `psi` must already be resolved against the
// net the atoms refer to.
inline CheckResult model_check(const PDNet& net, const Formula& psi,
                               const std::vector<Atom>& atoms,
                               std::size_t max_states,
                               SuccOrder order = SuccOrder::kExitLast) {
  CheckResult r;
  RGraph rg = reachability_graph(net, max_states, order);
  r.markings = rg.nodes.size();
  r.fired = rg.fired;
  if (rg.truncated) {
    r.verdict = Verdict::BoundExceeded;
    return r;
  }
  BuchiAutomaton aut = translate_to_buchi(negate(psi));
  ProductSpace prod(net, rg, aut, atoms);
  LassoResult lasso = ndfs_emptiness(prod);
  r.product_states = prod.size();
  if (lasso.empty) {
    r.verdict = Verdict::Holds;
    return r;
  }
  r.verdict = Verdict::Violated;
  for (std::size_t i = 1; i < lasso.prefix.size(); ++i)
    r.prefix.push_back(lasso.prefix[i].second);
  for (const auto& [s, label] : lasso.loop) r.loop.push_back(label);
  return r;
}

}  // namespace pdnet
