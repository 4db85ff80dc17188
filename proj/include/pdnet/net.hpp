#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pdnet/program.hpp"

namespace pdnet {

// ---------------------------------------------------------------------------
// Structure
// ---------------------------------------------------------------------------

// Place roles form a set, not a partition: entry/terminal places and the
// mutex/condvar places act as execution places as well as control places.
enum PlaceRole : unsigned {
  kControl = 1u,
  kVariable = 2u,
  kExecution = 4u,
};

enum class TransKind {
  Assign,
  Jump,
  Exit,
  Branch,
  Call,
  Return,
  Enter,
  Lock,
  Unlock,
  Signal,
  Wait1,
  Wait2,
  Wait3,
  Error,
};

inline const char* to_string(TransKind k) {
  switch (k) {
    case TransKind::Assign: return "assign";
    case TransKind::Jump: return "jump";
    case TransKind::Exit: return "exit";
    case TransKind::Branch: return "branch";
    case TransKind::Call: return "call";
    case TransKind::Return: return "return";
    case TransKind::Enter: return "enter";
    case TransKind::Lock: return "lock";
    case TransKind::Unlock: return "unlock";
    case TransKind::Signal: return "signal";
    case TransKind::Wait1: return "wait1";
    case TransKind::Wait2: return "wait2";
    case TransKind::Wait3: return "wait3";
    case TransKind::Error: return "error";
  }
  return "?";
}

enum class ArcKind { Control, ReadWrite, Execution };

// Arc inscription. Unit is the black token (encoded as value 0); Const is a
// ground integer token; Var binds the (unique) token on the place to a net
// variable; Eval produces a token by evaluating a program expression under
// the transition's binding.
struct ArcExpr {
  enum class Kind { Unit, Const, Var, Eval };
  Kind kind = Kind::Unit;
  std::int64_t value = 0;
  std::string var;
  Expr expr;

  static ArcExpr unit() { return {}; }
  static ArcExpr constant(std::int64_t v) {
    ArcExpr a;
    a.kind = Kind::Const;
    a.value = v;
    return a;
  }
  static ArcExpr binder(std::string name) {
    ArcExpr a;
    a.kind = Kind::Var;
    a.var = std::move(name);
    return a;
  }
  static ArcExpr eval(Expr e) {
    ArcExpr a;
    a.kind = Kind::Eval;
    a.expr = std::move(e);
    return a;
  }

  bool operator==(const ArcExpr& o) const {
    return kind == o.kind && value == o.value && var == o.var && expr == o.expr;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Unit: return "•";
      case Kind::Const: return std::to_string(value);
      case Kind::Var: return var;
      case Kind::Eval: {
        std::ostringstream os;
        detail_print(os, expr);
        return os.str();
      }
    }
    return "?";
  }

 private:
  static void detail_print(std::ostream& os, const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Const: os << e.value; break;
      case Expr::Kind::Var: os << e.var; break;
      case Expr::Kind::Unary:
        os << (e.uop == UnOp::Neg ? "-" : "!");
        os << "(";
        detail_print(os, e.args[0]);
        os << ")";
        break;
      case Expr::Kind::Binary:
        os << "(";
        detail_print(os, e.args[0]);
        os << " " << pdnet::to_string(e.bop) << " ";
        detail_print(os, e.args[1]);
        os << ")";
        break;
    }
  }
};

struct ColorSet {
  enum class Kind { Unit, Int, Thread };
  Kind kind = Kind::Unit;
  std::int64_t lo = 0, hi = 0;  // Int bounds

  bool admits(std::int64_t v) const {
    return kind != Kind::Int || (v >= lo && v <= hi);
  }
};

struct Place {
  int id = 0;
  std::string name;
  unsigned roles = kExecution;
  ColorSet color;
  std::vector<std::int64_t> init;  // initial tokens (ground)

  bool has_role(PlaceRole r) const { return (roles & r) != 0; }
};

struct Transition {
  int id = 0;
  std::string name;
  TransKind kind = TransKind::Assign;
  std::optional<Expr> guard;
  int thread = 0;     // 1-based owning thread, 0 = none
  int src_label = 0;  // source statement location label (0 if synthetic)
};

struct Arc {
  int id = 0;
  int place = 0;
  int trans = 0;
  bool place_to_trans = true;
  ArcKind kind = ArcKind::Execution;
  ArcExpr expr;
  // Structural flags, orthogonal to the Def-1 arc kind:
  bool flow = false;       // moves the program counter (execution-path graph)
  bool enter_arc = false;  // caller -> callee entry place
  bool exit_arc = false;   // callee terminal place -> return transition
  bool replenish = false;  // loop-head self-arc re-arming the loop's control place
  bool repair = false;     // added by the slicing post-process
};

class PDNet {
 public:
  std::vector<Place> places;
  std::vector<Transition> transitions;
  std::vector<Arc> arcs;

  int add_place(std::string name, unsigned roles, ColorSet color,
                std::vector<std::int64_t> init = {}) {
    int id = static_cast<int>(places.size());
    places.push_back({id, std::move(name), roles, color, std::move(init)});
    return id;
  }

  int add_transition(std::string name, TransKind kind,
                     std::optional<Expr> guard = std::nullopt, int thread = 0,
                     int src_label = 0) {
    int id = static_cast<int>(transitions.size());
    transitions.push_back(
        {id, std::move(name), kind, std::move(guard), thread, src_label});
    return id;
  }

  Arc& add_arc(int place, int trans, bool place_to_trans, ArcKind kind,
               ArcExpr expr) {
    Arc a;
    a.id = static_cast<int>(arcs.size());
    a.place = place;
    a.trans = trans;
    a.place_to_trans = place_to_trans;
    a.kind = kind;
    a.expr = std::move(expr);
    arcs.push_back(std::move(a));
    index_valid_ = false;
    return arcs.back();
  }

  int find_place(const std::string& name) const {
    for (const auto& p : places)
      if (p.name == name) return p.id;
    return -1;
  }
  int find_transition(const std::string& name) const {
    for (const auto& t : transitions)
      if (t.name == name) return t.id;
    return -1;
  }

  // Adjacency (built lazily, reused by all queries).
  const std::vector<int>& in_arcs(int trans) const {
    build_index();
    return in_arcs_[trans];
  }
  const std::vector<int>& out_arcs(int trans) const {
    build_index();
    return out_arcs_[trans];
  }
  const std::vector<int>& place_in_arcs(int place) const {
    build_index();
    return place_in_[place];
  }
  const std::vector<int>& place_out_arcs(int place) const {
    build_index();
    return place_out_[place];
  }

  void freeze() const { build_index(); }

 private:
  void build_index() const {
    if (index_valid_) return;
    in_arcs_.assign(transitions.size(), {});
    out_arcs_.assign(transitions.size(), {});
    place_in_.assign(places.size(), {});
    place_out_.assign(places.size(), {});
    for (const auto& a : arcs) {
      if (a.place_to_trans) {
        in_arcs_[a.trans].push_back(a.id);
        place_out_[a.place].push_back(a.id);
      } else {
        out_arcs_[a.trans].push_back(a.id);
        place_in_[a.place].push_back(a.id);
      }
    }
    index_valid_ = true;
  }

  mutable bool index_valid_ = false;
  mutable std::vector<std::vector<int>> in_arcs_, out_arcs_, place_in_, place_out_;
};

// ---------------------------------------------------------------------------
// Markings and firing
// ---------------------------------------------------------------------------

// Dense marking: one sorted token multiset per place (canonical by
// construction: insertions keep the vectors sorted).
struct Marking {
  std::vector<std::vector<std::int64_t>> tokens;

  static Marking initial(const PDNet& net) {
    Marking m;
    m.tokens.resize(net.places.size());
    for (const auto& p : net.places) {
      m.tokens[p.id] = p.init;
      std::sort(m.tokens[p.id].begin(), m.tokens[p.id].end());
    }
    return m;
  }

  bool operator==(const Marking& o) const { return tokens == o.tokens; }
  bool operator<(const Marking& o) const { return tokens < o.tokens; }

  std::size_t count(int place, std::int64_t tok) const {
    const auto& v = tokens[place];
    auto r = std::equal_range(v.begin(), v.end(), tok);
    return static_cast<std::size_t>(r.second - r.first);
  }
  void add(int place, std::int64_t tok) {
    auto& v = tokens[place];
    v.insert(std::upper_bound(v.begin(), v.end(), tok), tok);
  }
  bool remove(int place, std::int64_t tok) {
    auto& v = tokens[place];
    auto it = std::lower_bound(v.begin(), v.end(), tok);
    if (it == v.end() || *it != tok) return false;
    v.erase(it);
    return true;
  }

  // Canonical flat serialization: per place, token count then sorted tokens.
  std::vector<std::int32_t> pack() const {
    std::vector<std::int32_t> out;
    out.reserve(tokens.size() * 2);
    for (const auto& v : tokens) {
      out.push_back(static_cast<std::int32_t>(v.size()));
      for (auto t : v) out.push_back(static_cast<std::int32_t>(t));
    }
    return out;
  }
  static Marking unpack(const PDNet& net, const std::vector<std::int32_t>& key) {
    Marking m;
    m.tokens.resize(net.places.size());
    std::size_t i = 0;
    for (auto& v : m.tokens) {
      std::int32_t n = key[i++];
      v.reserve(static_cast<std::size_t>(n));
      for (std::int32_t k = 0; k < n; ++k) v.push_back(key[i++]);
    }
    return m;
  }
};

struct MarkingKeyHash {
  std::size_t operator()(const std::vector<std::int32_t>& key) const {
    std::size_t h = 1469598103934665603ull;  // FNV-1a
    for (auto v : key) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ull;
    }
    return h;
  }
};

using Binding = std::map<std::string, std::int64_t>;

namespace detail {

inline std::int64_t arc_token(const ArcExpr& e, const Binding& b) {
  switch (e.kind) {
    case ArcExpr::Kind::Unit: return 0;
    case ArcExpr::Kind::Const: return e.value;
    case ArcExpr::Kind::Var: return b.at(e.var);
    case ArcExpr::Kind::Eval: return eval_expr(e.expr, b);
  }
  return 0;
}

}  // namespace detail

// A binding element (t, b) is enabled when the guard holds under b and every
// input-arc demand is covered by the marking; additionally every produced
// token must lie in its place's color set (out-of-domain assignments block,
// in lockstep with the interpreter's overflow rule).
inline std::vector<Binding> enabled_bindings(const PDNet& net, const Marking& m,
                                             int trans) {
  Binding b;
  // Pass 1: bind net variables by pattern-matching the unique token on each
  // Var-inscribed input place.
  for (int aid : net.in_arcs(trans)) {
    const Arc& a = net.arcs[aid];
    if (a.expr.kind != ArcExpr::Kind::Var) continue;
    const auto& toks = m.tokens[a.place];
    if (toks.empty()) return {};
    std::int64_t tok = toks.front();
    auto it = b.find(a.expr.var);
    if (it != b.end()) {
      if (it->second != tok) return {};
    } else {
      b[a.expr.var] = tok;
    }
  }
  // Pass 2: guard.
  const auto& t = net.transitions[trans];
  if (t.guard && eval_expr(*t.guard, b) == 0) return {};
  // Pass 3: accumulate input demands and check coverage.
  std::map<std::pair<int, std::int64_t>, std::size_t> demand;
  for (int aid : net.in_arcs(trans)) {
    const Arc& a = net.arcs[aid];
    std::int64_t tok = detail::arc_token(a.expr, b);
    auto key = std::make_pair(a.place, tok);
    if (++demand[key] > m.count(a.place, tok)) return {};
  }
  // Pass 4: produced tokens must respect place colors.
  for (int aid : net.out_arcs(trans)) {
    const Arc& a = net.arcs[aid];
    std::int64_t tok = detail::arc_token(a.expr, b);
    if (!net.places[a.place].color.admits(tok)) return {};
  }
  return {b};
}

inline Marking fire(const PDNet& net, const Marking& m, int trans,
                    const Binding& b) {
  Marking n = m;
  for (int aid : net.in_arcs(trans)) {
    const Arc& a = net.arcs[aid];
    if (!n.remove(a.place, detail::arc_token(a.expr, b)))
      throw std::runtime_error("fire: binding not enabled (underflow) at " +
                               net.transitions[trans].name);
  }
  for (int aid : net.out_arcs(trans)) {
    const Arc& a = net.arcs[aid];
    n.add(a.place, detail::arc_token(a.expr, b));
  }
  return n;
}

struct NetStep {
  int trans;
  Binding binding;
  Marking marking;
};

// Deterministic: ascending transition id (binding per transition is unique
// because every variable place holds a single token).
inline std::vector<NetStep> successors(const PDNet& net, const Marking& m) {
  std::vector<NetStep> out;
  for (const auto& t : net.transitions) {
    for (auto& b : enabled_bindings(net, m, t.id))
      out.push_back({t.id, b, fire(net, m, t.id, b)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Occurrence sequences
// ---------------------------------------------------------------------------

struct OccurrenceSequence {
  std::vector<std::pair<int, Binding>> steps;
  std::vector<Marking> markings;  // markings.size() == steps.size() + 1
  bool truncated = false;         // hit the length bound
};

// Depth-first enumeration of maximal occurrence sequences (each either ends
// in a dead marking or is cut at the length bound and flagged).
inline std::vector<OccurrenceSequence> maximal_sequences(const PDNet& net,
                                                         const Marking& m0,
                                                         std::size_t bound) {
  std::vector<OccurrenceSequence> out;
  OccurrenceSequence cur;
  cur.markings.push_back(m0);
  struct Rec {
    const PDNet& net;
    std::size_t bound;
    std::vector<OccurrenceSequence>& out;
    void run(OccurrenceSequence& cur) {
      if (cur.steps.size() >= bound) {
        OccurrenceSequence done = cur;
        done.truncated = true;
        out.push_back(std::move(done));
        return;
      }
      auto succ = successors(net, cur.markings.back());
      if (succ.empty()) {
        out.push_back(cur);
        return;
      }
      for (auto& s : succ) {
        cur.steps.emplace_back(s.trans, s.binding);
        cur.markings.push_back(s.marking);
        run(cur);
        cur.steps.pop_back();
        cur.markings.pop_back();
      }
    }
  } rec{net, bound, out};
  rec.run(cur);
  return out;
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

inline std::string role_string(unsigned roles) {
  std::string s;
  if (roles & kControl) s += "c";
  if (roles & kVariable) s += "v";
  if (roles & kExecution) s += "f";
  return s;
}

inline std::string to_dot(const PDNet& net, const Marking* m = nullptr) {
  std::ostringstream os;
  os << "digraph pdnet {\n  rankdir=TB;\n";
  for (const auto& p : net.places) {
    os << "  p" << p.id << " [shape=circle,label=\"" << p.name << "\\n["
       << role_string(p.roles) << "]";
    if (m && !m->tokens[p.id].empty()) {
      os << "\\n{";
      for (std::size_t i = 0; i < m->tokens[p.id].size(); ++i)
        os << (i ? "," : "") << m->tokens[p.id][i];
      os << "}";
    }
    os << "\"];\n";
  }
  for (const auto& t : net.transitions) {
    os << "  t" << t.id << " [shape=box,label=\"" << t.name << "\\n("
       << to_string(t.kind) << ")\"];\n";
  }
  for (const auto& a : net.arcs) {
    const char* style = a.kind == ArcKind::Control     ? "dashed"
                        : a.kind == ArcKind::ReadWrite ? "dotted"
                                                       : "solid";
    std::string from = a.place_to_trans ? "p" + std::to_string(a.place)
                                        : "t" + std::to_string(a.trans);
    std::string to = a.place_to_trans ? "t" + std::to_string(a.trans)
                                      : "p" + std::to_string(a.place);
    os << "  " << from << " -> " << to << " [style=" << style << ",label=\""
       << a.expr.to_string() << "\"";
    if (a.repair) os << ",color=red";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace pdnet
