#pragma once

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pdnet/translate.hpp"

namespace pdnet {

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

// LTL-X over two atomic proposition forms: fireable(<transition-or-error
// label>) and tok(<variable>) <relation> <constant>. No next operator.
struct Formula {
  enum class Kind {
    True,
    False,
    Fireable,
    TokCmp,
    Not,
    And,
    Or,
    Imp,
    Future,
    Globally,
    Until,
  };
  Kind kind = Kind::True;
  std::string name;             // Fireable / TokCmp: source spelling
  BinOp op = BinOp::Eq;         // TokCmp relation
  std::int64_t value = 0;       // TokCmp constant
  int atom_id = -1;             // assigned by resolve_atoms
  std::vector<Formula> args;

  static Formula t() { return {}; }
  static Formula f() {
    Formula x;
    x.kind = Kind::False;
    return x;
  }
  static Formula fireable(std::string n) {
    Formula x;
    x.kind = Kind::Fireable;
    x.name = std::move(n);
    return x;
  }
  static Formula tok(std::string n, BinOp op, std::int64_t v) {
    Formula x;
    x.kind = Kind::TokCmp;
    x.name = std::move(n);
    x.op = op;
    x.value = v;
    return x;
  }
  static Formula un(Kind k, Formula a) {
    Formula x;
    x.kind = k;
    x.args.push_back(std::move(a));
    return x;
  }
  static Formula bin(Kind k, Formula a, Formula b) {
    Formula x;
    x.kind = k;
    x.args.push_back(std::move(a));
    x.args.push_back(std::move(b));
    return x;
  }

  bool operator==(const Formula& o) const {
    return kind == o.kind && name == o.name && op == o.op && value == o.value &&
           args == o.args;
  }
  bool operator<(const Formula& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (name != o.name) return name < o.name;
    if (op != o.op) return op < o.op;
    if (value != o.value) return value < o.value;
    return args < o.args;
  }

  bool is_atom() const { return kind == Kind::Fireable || kind == Kind::TokCmp; }

  std::string to_string() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }

 private:
  void print(std::ostream& os) const {
    switch (kind) {
      case Kind::True: os << "true"; break;
      case Kind::False: os << "false"; break;
      case Kind::Fireable: os << "fireable(" << name << ")"; break;
      case Kind::TokCmp:
        os << "tok(" << name << ") " << pdnet::to_string(op) << " " << value;
        break;
      case Kind::Not:
        os << "!(";
        args[0].print(os);
        os << ")";
        break;
      case Kind::And:
      case Kind::Or:
      case Kind::Imp:
      case Kind::Until:
        os << "(";
        args[0].print(os);
        os << (kind == Kind::And   ? " && "
               : kind == Kind::Or  ? " || "
               : kind == Kind::Imp ? " -> "
                                   : " U ");
        args[1].print(os);
        os << ")";
        break;
      case Kind::Future:
      case Kind::Globally:
        os << (kind == Kind::Future ? "F (" : "G (");
        args[0].print(os);
        os << ")";
        break;
    }
  }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

class FormulaParser {
 public:
  explicit FormulaParser(const std::string& s) : s_(s) {}

  Formula parse() {
    Formula f = imp();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("formula: " + msg + " at offset " +
                             std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }
  bool eat(const std::string& tok) {
    skip();
    if (s_.compare(pos_, tok.size(), tok) != 0) return false;
    // Word tokens must not swallow a prefix of an identifier.
    if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
      std::size_t end = pos_ + tok.size();
      if (end < s_.size() &&
          (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_'))
        return false;
    }
    pos_ += tok.size();
    return true;
  }
  std::string ident() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '_' || s_[pos_] == '\'' || s_[pos_] == '.'))
      ++pos_;
    if (start == pos_) fail("expected identifier");
    return s_.substr(start, pos_ - start);
  }
  std::int64_t integer() {
    skip();
    std::size_t start = pos_;
    if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    if (start == pos_) fail("expected integer");
    return std::stoll(s_.substr(start, pos_ - start));
  }

  Formula imp() {
    Formula a = disj();
    if (eat("->")) return Formula::bin(Formula::Kind::Imp, a, imp());
    return a;
  }
  Formula disj() {
    Formula a = conj();
    while (eat("||")) a = Formula::bin(Formula::Kind::Or, a, conj());
    return a;
  }
  Formula conj() {
    Formula a = until();
    while (eat("&&")) a = Formula::bin(Formula::Kind::And, a, until());
    return a;
  }
  Formula until() {
    Formula a = unary();
    if (eat("U")) return Formula::bin(Formula::Kind::Until, a, until());
    return a;
  }
  Formula unary() {
    if (eat("!")) return Formula::un(Formula::Kind::Not, unary());
    if (eat("F")) return Formula::un(Formula::Kind::Future, unary());
    if (eat("G")) return Formula::un(Formula::Kind::Globally, unary());
    if (eat("(")) {
      Formula a = imp();
      if (!eat(")")) fail("expected )");
      return a;
    }
    if (eat("true")) return Formula::t();
    if (eat("false")) return Formula::f();
    if (eat("fireable")) {
      if (!eat("(")) fail("expected ( after fireable");
      std::string n = ident();
      if (!eat(")")) fail("expected )");
      return Formula::fireable(n);
    }
    if (eat("tok")) {
      if (!eat("(")) fail("expected ( after tok");
      std::string n = ident();
      if (!eat(")")) fail("expected )");
      BinOp op;
      if (eat("<=")) op = BinOp::Le;
      else if (eat(">=")) op = BinOp::Ge;
      else if (eat("!=")) op = BinOp::Ne;
      else if (eat("<")) op = BinOp::Lt;
      else if (eat(">")) op = BinOp::Gt;
      else if (eat("==") || eat("=")) op = BinOp::Eq;
      else fail("expected comparison after tok(...)");
      return Formula::tok(n, op, integer());
    }
    fail("expected formula");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse_formula(const std::string& s) {
  return detail::FormulaParser(s).parse();
}

// ---------------------------------------------------------------------------
// Negation-normal form (X-free)
// ---------------------------------------------------------------------------

inline Formula nnf(const Formula& f, bool neg = false);

inline Formula negate(const Formula& f) { return nnf(f, true); }

inline Formula nnf(const Formula& f, bool neg) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True: return neg ? Formula::f() : Formula::t();
    case K::False: return neg ? Formula::t() : Formula::f();
    case K::Fireable:
    case K::TokCmp:
      return neg ? Formula::un(K::Not, f) : f;
    case K::Not: return nnf(f.args[0], !neg);
    case K::And:
      return Formula::bin(neg ? K::Or : K::And, nnf(f.args[0], neg),
                          nnf(f.args[1], neg));
    case K::Or:
      return Formula::bin(neg ? K::And : K::Or, nnf(f.args[0], neg),
                          nnf(f.args[1], neg));
    case K::Imp:  // a -> b == !a || b
      return Formula::bin(neg ? K::And : K::Or, nnf(f.args[0], !neg),
                          nnf(f.args[1], neg));
    case K::Future:
      return Formula::un(neg ? K::Globally : K::Future, nnf(f.args[0], neg));
    case K::Globally:
      return Formula::un(neg ? K::Future : K::Globally, nnf(f.args[0], neg));
    case K::Until: {
      Formula a = nnf(f.args[0], neg), b = nnf(f.args[1], neg);
      if (!neg) return Formula::bin(K::Until, a, b);
      // !(x U y) == (!y) R (!x); the X-free release expansion is
      // G !y  ||  (!y U (!x && !y)).
      return Formula::bin(K::Or, Formula::un(K::Globally, b),
                          Formula::bin(K::Until, b, Formula::bin(K::And, a, b)));
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Atom resolution and evaluation
// ---------------------------------------------------------------------------

struct Atom {
  enum class Kind { Fireable, Tok };
  Kind kind = Kind::Fireable;
  std::string name;
  std::vector<int> trans;  // Fireable: any-of these transitions
  int place = -1;          // Tok
  BinOp op = BinOp::Eq;
  std::int64_t value = 0;
};

namespace detail {

inline void collect_error_stmts(const std::vector<InstStmt>& body,
                                const std::string& name,
                                std::vector<int>& locs) {
  for (const auto& s : body) {
    if (s.kind == Stmt::Kind::ErrorMark && s.target == name)
      locs.push_back(s.loc);
    collect_error_stmts(s.body, name, locs);
    collect_error_stmts(s.else_body, name, locs);
  }
}

inline void resolve_rec(Formula& f, const Translation& tr,
                        std::vector<Atom>& atoms,
                        std::map<std::tuple<int, std::string, int, std::int64_t>,
                                 int>& cache) {
  if (f.is_atom()) {
    auto key = std::make_tuple(static_cast<int>(f.kind), f.name,
                               static_cast<int>(f.op), f.value);
    auto it = cache.find(key);
    if (it != cache.end()) {
      f.atom_id = it->second;
      return;
    }
    Atom a;
    a.name = f.name;
    if (f.kind == Formula::Kind::Fireable) {
      a.kind = Atom::Kind::Fireable;
      int t = tr.net.find_transition(f.name);
      if (t >= 0) {
        a.trans.push_back(t);
      } else {
        std::vector<int> locs;
        for (const auto& inst : tr.ex.instances)
          collect_error_stmts(inst->body, f.name, locs);
        for (int loc : locs)
          for (int tid : tr.map.loc_transitions.at(loc)) a.trans.push_back(tid);
        if (a.trans.empty())
          throw std::runtime_error("fireable(" + f.name +
                                   "): no such transition or error label");
      }
    } else {
      a.kind = Atom::Kind::Tok;
      a.place = tr.map.place_of_var(f.name);
      if (a.place < 0)
        throw std::runtime_error("tok(" + f.name + "): no such variable");
      a.op = f.op;
      a.value = f.value;
    }
    f.atom_id = static_cast<int>(atoms.size());
    cache[key] = f.atom_id;
    atoms.push_back(std::move(a));
    return;
  }
  for (auto& sub : f.args) resolve_rec(sub, tr, atoms, cache);
}

}  // namespace detail

// Assigns atom ids in-place and returns the atom table.
inline std::vector<Atom> resolve_atoms(Formula& f, const Translation& tr) {
  std::vector<Atom> atoms;
  std::map<std::tuple<int, std::string, int, std::int64_t>, int> cache;
  detail::resolve_rec(f, tr, atoms, cache);
  return atoms;
}

inline bool eval_atom(const PDNet& net, const Marking& m, const Atom& a) {
  if (a.kind == Atom::Kind::Fireable) {
    for (int t : a.trans)
      if (!enabled_bindings(net, m, t).empty()) return true;
    return false;
  }
  const auto& toks = m.tokens[a.place];
  if (toks.empty())
    throw std::runtime_error("tok(" + a.name + "): variable place is empty");
  std::int64_t v = toks.front();
  switch (a.op) {
    case BinOp::Lt: return v < a.value;
    case BinOp::Le: return v <= a.value;
    case BinOp::Gt: return v > a.value;
    case BinOp::Ge: return v >= a.value;
    case BinOp::Eq: return v == a.value;
    case BinOp::Ne: return v != a.value;
    default: throw std::runtime_error("tok: not a comparison");
  }
}

// ---------------------------------------------------------------------------
// Slicing criterion
// ---------------------------------------------------------------------------

// Crit(fireable(t)) = •t minus execution places; Crit(tok(p) r c) = p plus,
// for every transition that changes p's token, its •t minus execution places.
inline std::set<int> extract_criterion(const Translation& tr,
                                       const std::vector<Atom>& atoms) {
  const PDNet& net = tr.net;
  std::set<int> crit;
  auto add_inputs = [&](int t) {
    for (int aid : net.in_arcs(t)) {
      const Arc& a = net.arcs[aid];
      if (!net.places[a.place].has_role(kExecution)) crit.insert(a.place);
    }
  };
  for (const auto& a : atoms) {
    if (a.kind == Atom::Kind::Fireable) {
      for (int t : a.trans) add_inputs(t);
      continue;
    }
    crit.insert(a.place);
    for (const auto& t : net.transitions) {
      bool writes = false;
      for (int ain : net.in_arcs(t.id)) {
        const Arc& in = net.arcs[ain];
        if (in.place != a.place || in.kind != ArcKind::ReadWrite) continue;
        for (int aout : net.out_arcs(t.id)) {
          const Arc& out = net.arcs[aout];
          if (out.place == a.place && out.kind == ArcKind::ReadWrite &&
              !(out.expr == in.expr))
            writes = true;
        }
      }
      if (writes) add_inputs(t.id);
    }
  }
  return crit;
}

// ---------------------------------------------------------------------------
// Direct lasso evaluation (semantic ground truth for the automaton path)
// ---------------------------------------------------------------------------

// Word: per position, one truth value per atom id; positions prefix_len..end
// repeat forever. Evaluates by fixpoint over the lasso's positions.
inline bool eval_lasso(const Formula& f,
                       const std::vector<std::vector<bool>>& word,
                       std::size_t prefix_len, std::size_t pos = 0) {
  using K = Formula::Kind;
  std::size_t n = word.size();
  auto succ = [&](std::size_t i) { return i + 1 < n ? i + 1 : prefix_len; };
  switch (f.kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Fireable:
    case K::TokCmp: return word[pos][static_cast<std::size_t>(f.atom_id)];
    case K::Not: return !eval_lasso(f.args[0], word, prefix_len, pos);
    case K::And:
      return eval_lasso(f.args[0], word, prefix_len, pos) &&
             eval_lasso(f.args[1], word, prefix_len, pos);
    case K::Or:
      return eval_lasso(f.args[0], word, prefix_len, pos) ||
             eval_lasso(f.args[1], word, prefix_len, pos);
    case K::Imp:
      return !eval_lasso(f.args[0], word, prefix_len, pos) ||
             eval_lasso(f.args[1], word, prefix_len, pos);
    case K::Future: {
      std::size_t i = pos;
      for (std::size_t k = 0; k <= n; ++k, i = succ(i))
        if (eval_lasso(f.args[0], word, prefix_len, i)) return true;
      return false;
    }
    case K::Globally: {
      std::size_t i = pos;
      for (std::size_t k = 0; k <= n; ++k, i = succ(i))
        if (!eval_lasso(f.args[0], word, prefix_len, i)) return false;
      return true;
    }
    case K::Until: {
      std::size_t i = pos;
      for (std::size_t k = 0; k <= n; ++k, i = succ(i)) {
        if (eval_lasso(f.args[1], word, prefix_len, i)) return true;
        if (!eval_lasso(f.args[0], word, prefix_len, i)) return false;
      }
      return false;
    }
  }
  return false;
}

}  // namespace pdnet
