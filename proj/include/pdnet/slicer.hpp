#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pdnet/deps.hpp"
#include "pdnet/translate.hpp"

namespace pdnet {

// ---------------------------------------------------------------------------
// Slice result
// ---------------------------------------------------------------------------

struct SliceIteration {
  int processed_place = -1;           // control place consumed this iteration
  std::vector<int> added_places;      // original ids
  std::vector<int> added_transitions;
};

struct SlicedNet {
  PDNet net;  // rebuilt net over the kept nodes plus repair arcs
  std::set<int> kept_places, kept_transitions;     // original ids
  std::vector<int> place_orig, trans_orig;         // new id -> original id
  std::map<int, int> place_new, trans_new;         // original id -> new id
  std::vector<std::pair<int, int>> repair_arcs;    // original (trans, place)
  std::vector<SliceIteration> trace;

  bool keeps_place(int p) const { return kept_places.count(p) != 0; }
  bool keeps_transition(int t) const { return kept_transitions.count(t) != 0; }
};

// Atoms resolved against the original net, rewritten to sliced ids.
inline std::vector<Atom> remap_atoms(const SlicedNet& s,
                                     const std::vector<Atom>& atoms) {
  std::vector<Atom> out = atoms;
  for (auto& a : out) {
    if (a.kind == Atom::Kind::Tok) {
      auto it = s.place_new.find(a.place);
      if (it == s.place_new.end())
        throw std::runtime_error("tok(" + a.name + "): place not in slice");
      a.place = it->second;
    } else {
      for (auto& t : a.trans) {
        auto it = s.trans_new.find(t);
        if (it == s.trans_new.end())
          throw std::runtime_error("fireable(" + a.name +
                                   "): transition not in slice");
        t = it->second;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slicing algorithm
// ---------------------------------------------------------------------------

namespace detail {

class Slicer {
 public:
  Slicer(const Translation& tr, const Deps& deps, const std::set<int>& crit)
      : tr_(tr), net_(tr.net), deps_(deps) {
    for (int p : crit) add_place(p);
    // A loop that can diverge delays or forever withholds everything after
    // it, so loop branches are always part of the temporal behavior.
    for (int t : tr.map.loop_heads) {
      auto it = tr.map.trans_control.find(t);
      if (it != tr.map.trans_control.end() && it->second >= 0)
        add_place(it->second);
    }
    closure();
    post_process();
  }

  SlicedNet take() {
    build();
    return std::move(out_);
  }

 private:
  bool is_control(int p) const { return net_.places[p].has_role(kControl); }

  void add_place(int p) {
    if (!P_.insert(p).second) return;
    if (cur_) cur_->added_places.push_back(p);
  }

  void add_trans(int t) {
    if (!T_.insert(t).second) return;
    if (cur_) cur_->added_transitions.push_back(t);
    // Every input place stays with the transition — including the variable
    // places it reads or writes. Dropping a written place would also drop the
    // arc expressions that justify the reads, and a later re-slice could no
    // longer reconstruct why the writers were kept.
    for (int aid : net_.in_arcs(t)) add_place(net_.arcs[aid].place);
    data_capture(t);
    keep_instance(t);
  }

  // On-demand data-flow: every variable place the transition reads is kept,
  // and each of its writers that can reach the reader undisturbed (or runs
  // in another thread) contributes its control places.
  void data_capture(int t) {
    for (const auto& var : deps_.used_vars(t)) {
      int p = tr_.map.place_of_var(var);
      if (p < 0) continue;
      add_place(p);
      for (const auto& w : net_.transitions) {
        if (!deps_.defines(w.id, p)) continue;
        bool cross = w.thread != 0 &&
                     net_.transitions[t].thread != 0 &&
                     w.thread != net_.transitions[t].thread;
        if (!cross && !deps_.undisturbed_path(w.id, t, p, -1)) continue;
        for (int aid : net_.in_arcs(w.id)) {
          const Arc& a = net_.arcs[aid];
          if (a.kind == ArcKind::Control) add_place(a.place);
        }
      }
    }
  }

  // A function activation participates as a whole: its boundary transitions
  // and boundary places come along with any kept inner transition.
  void keep_instance(int t) {
    auto it = tr_.map.trans_instance.find(t);
    if (it == tr_.map.trans_instance.end()) return;
    const InstanceNet& in = tr_.map.instances[static_cast<std::size_t>(it->second)];
    if (in.enter_t < 0) return;
    add_place(in.entry_p);
    add_place(in.exitloc_p);
    add_place(in.terminal_p);
    add_trans(in.enter_t);
    add_trans(in.exit_t);
  }

  void closure() {
    for (;;) {
      int p = next_unprocessed();
      if (p >= 0) {
        Pd_.insert(p);
        trace_.push_back({});
        trace_.back().processed_place = p;
        cur_ = &trace_.back();
        // Producers across control arcs (the dominator pattern), then
        // consumers with their local pattern.
        for (int aid : net_.place_in_arcs(p))
          if (net_.arcs[aid].kind == ArcKind::Control)
            add_trans(net_.arcs[aid].trans);
        for (int aid : net_.place_out_arcs(p))
          if (net_.arcs[aid].kind == ArcKind::Control)
            add_trans(net_.arcs[aid].trans);
        cur_ = nullptr;
        continue;
      }
      if (!blocking_sweep()) return;
    }
  }

  int next_unprocessed() const {
    for (int p : P_)  // std::set iterates in ascending place-id order
      if (is_control(p) && !Pd_.count(p)) return p;
    return -1;
  }

  // A transition that can block (or forever refuse to fire) upstream of a
  // kept transition shapes when — and whether — the kept one fires; its
  // control place joins the slice so the verdict cannot drift. Error
  // transitions get the same treatment: an error aborts its whole thread,
  // so it decides whether anything later in that thread ever fires — yet it
  // is never flow-reachable forward to those transitions, so it needs its
  // own thread-wide rule.
  bool blocking_sweep() {
    bool grew = false;
    auto keep_control_of = [&](int b) {
      auto it = tr_.map.trans_control.find(b);
      if (it == tr_.map.trans_control.end() || it->second < 0) return;
      if (!P_.count(it->second)) {
        add_place(it->second);
        grew = true;
      }
    };
    for (int t : std::vector<int>(T_.begin(), T_.end())) {
      for (int b : tr_.map.blocking) {
        if (net_.transitions[b].thread != net_.transitions[t].thread) continue;
        if (b != t && !deps_.reachable(b, t)) continue;
        keep_control_of(b);
      }
      for (int e : tr_.map.error_transitions)
        if (net_.transitions[e].thread == net_.transitions[t].thread)
          keep_control_of(e);
    }
    return grew;
  }

  // Executability repair: every inbound flow path of a kept execution place
  // that was severed by the slice is re-routed from its nearest kept flow
  // predecessors. A place may keep one feeder (say, the then-branch) while
  // another path (the else-branch) was cut; both must deliver the program
  // counter or the sliced thread dead-ends and verdicts drift.
  void post_process() {
    for (int p : std::vector<int>(P_.begin(), P_.end())) {
      const Place& place = net_.places[p];
      if (!place.has_role(kExecution) || !place.init.empty()) continue;
      std::set<int> direct;  // feeders that survived with their arc intact
      std::set<int> seen_places{p};
      std::vector<int> frontier;
      for (int aid : net_.place_in_arcs(p)) {
        const Arc& a = net_.arcs[aid];
        if (!a.flow) continue;
        if (T_.count(a.trans)) {
          direct.insert(a.trans);
          continue;
        }
        for (int bid : net_.in_arcs(a.trans)) {
          const Arc& b = net_.arcs[bid];
          if (b.flow && seen_places.insert(b.place).second)
            frontier.push_back(b.place);
        }
      }
      // Backward search over flow arcs through removed nodes.
      std::set<int> feeders;
      while (!frontier.empty()) {
        int q = frontier.back();
        frontier.pop_back();
        for (int aid : net_.place_in_arcs(q)) {
          const Arc& a = net_.arcs[aid];
          if (!a.flow) continue;
          if (T_.count(a.trans)) {
            feeders.insert(a.trans);
            continue;
          }
          for (int bid : net_.in_arcs(a.trans)) {
            const Arc& b = net_.arcs[bid];
            if (b.flow && seen_places.insert(b.place).second)
              frontier.push_back(b.place);
          }
        }
      }
      if (direct.empty() && feeders.empty())
        throw std::runtime_error("slice: no kept feeder for place " +
                                 place.name);
      for (int t : feeders)
        if (!direct.count(t)) repair_.emplace_back(t, p);
    }
  }

  void build() {
    out_.kept_places = P_;
    out_.kept_transitions = T_;
    out_.trace = std::move(trace_);
    out_.repair_arcs = repair_;
    for (int p : P_) {
      const Place& src = net_.places[p];
      int id = out_.net.add_place(src.name, src.roles, src.color, src.init);
      out_.place_orig.push_back(p);
      out_.place_new[p] = id;
    }
    for (int t : T_) {
      const Transition& src = net_.transitions[t];
      int id = out_.net.add_transition(src.name, src.kind, src.guard,
                                       src.thread, src.src_label);
      out_.trans_orig.push_back(t);
      out_.trans_new[t] = id;
    }
    for (const auto& a : net_.arcs) {
      if (!P_.count(a.place) || !T_.count(a.trans)) continue;
      Arc& n = out_.net.add_arc(out_.place_new[a.place], out_.trans_new[a.trans],
                                a.place_to_trans, a.kind, a.expr);
      n.flow = a.flow;
      n.enter_arc = a.enter_arc;
      n.exit_arc = a.exit_arc;
      n.replenish = a.replenish;
    }
    for (const auto& [t, p] : repair_) {
      Arc& n = out_.net.add_arc(out_.place_new[p], out_.trans_new[t], false,
                                ArcKind::Execution, ArcExpr::unit());
      n.flow = true;
      n.repair = true;
    }
    out_.net.freeze();
  }

  const Translation& tr_;
  const PDNet& net_;
  const Deps& deps_;
  std::set<int> P_, T_, Pd_;
  std::vector<SliceIteration> trace_;
  SliceIteration* cur_ = nullptr;
  std::vector<std::pair<int, int>> repair_;
  SlicedNet out_;
};

}  // namespace detail

inline SlicedNet slice(const Translation& tr, const Deps& deps,
                       const std::set<int>& crit) {
  return detail::Slicer(tr, deps, crit).take();
}

inline SlicedNet slice(const Translation& tr, const std::set<int>& crit) {
  Deps deps(tr);
  return detail::Slicer(tr, deps, crit).take();
}

// ---------------------------------------------------------------------------
// Stuttering-equivalence spot check (bounded, test-sized nets only)
// ---------------------------------------------------------------------------

namespace detail {

using Projection = std::vector<std::vector<std::int64_t>>;

inline Projection project(const Marking& m, const std::vector<int>& places) {
  Projection out;
  for (int p : places) out.push_back(m.tokens[static_cast<std::size_t>(p)]);
  return out;
}

inline std::vector<Projection> destutter(const std::vector<Projection>& seq) {
  std::vector<Projection> out;
  for (const auto& s : seq)
    if (out.empty() || !(out.back() == s)) out.push_back(s);
  return out;
}

// Can the net walk through the projected sequence (allowing stutter steps)?
inline bool realizable(const PDNet& net, const std::vector<int>& places,
                       const std::vector<Projection>& seq, std::size_t bound) {
  if (seq.empty()) return true;
  Marking m0 = Marking::initial(net);
  if (!(project(m0, places) == seq.front())) return false;
  std::set<std::pair<std::vector<std::int32_t>, std::size_t>> seen;
  std::vector<std::pair<Marking, std::size_t>> stack{{m0, 0}};
  seen.insert({m0.pack(), 0});
  while (!stack.empty()) {
    auto [m, i] = stack.back();
    stack.pop_back();
    if (i + 1 == seq.size()) return true;
    if (seen.size() > bound) return false;
    for (const auto& s : successors(net, m)) {
      Projection pr = project(s.marking, places);
      std::size_t j;
      if (pr == seq[i]) j = i;
      else if (pr == seq[i + 1]) j = i + 1;
      else continue;
      if (seen.insert({s.marking.pack(), j}).second) stack.emplace_back(s.marking, j);
    }
  }
  return false;
}

}  // namespace detail

// Bounded check that the slice preserves the criterion-projected behaviors:
// projected initial markings agree, and every (bounded) maximal projected
// run of either net is realizable in the other.
inline bool stuttering_equivalent(const PDNet& original, const SlicedNet& s,
                                  const std::set<int>& crit,
                                  std::size_t bound) {
  std::vector<int> orig_places, slice_places;
  for (int p : crit) {
    if (!s.keeps_place(p)) return false;
    orig_places.push_back(p);
    slice_places.push_back(s.place_new.at(p));
  }
  Marking m0 = Marking::initial(original), s0 = Marking::initial(s.net);
  if (!(detail::project(m0, orig_places) == detail::project(s0, slice_places)))
    return false;
  for (const auto& seq : maximal_sequences(original, m0, bound)) {
    std::vector<detail::Projection> proj;
    for (const auto& m : seq.markings)
      proj.push_back(detail::project(m, orig_places));
    if (!detail::realizable(s.net, slice_places, detail::destutter(proj),
                            10000))
      return false;
  }
  for (const auto& seq : maximal_sequences(s.net, s0, bound)) {
    std::vector<detail::Projection> proj;
    for (const auto& m : seq.markings)
      proj.push_back(detail::project(m, slice_places));
    if (!detail::realizable(original, orig_places, detail::destutter(proj),
                            10000))
      return false;
  }
  return true;
}

}  // namespace pdnet
