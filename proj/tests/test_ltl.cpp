#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "pdnet/buchi.hpp"
#include "pdnet/ltl.hpp"
#include "pdnet/parser.hpp"
#include "support.hpp"

using namespace pdnet;
using K = Formula::Kind;

namespace {

const char* kTwoThreads = R"(
global x in [-8, 8];
global y in [-8, 8];
global z in [-8, 8];
fn thr1() {
  x := 1;
  y := 3;
  z := y + 2;
}
fn thr2() {
  if (x < 1) {
    error;
  }
}
thread thr1;
thread thr2;
)";

Formula atom(int id) {
  Formula a = Formula::fireable("a" + std::to_string(id));
  a.atom_id = id;
  return a;
}

// Enumerate every lasso word with `natoms` atoms and total length `total`,
// for every prefix split, and call fn(word, prefix_len).
template <typename Fn>
void for_all_words(int natoms, std::size_t total, Fn fn) {
  std::size_t letters = std::size_t{1} << natoms;
  std::vector<std::size_t> w(total);
  for (;;) {
    std::vector<std::vector<bool>> word(total);
    for (std::size_t i = 0; i < total; ++i) {
      word[i].resize(static_cast<std::size_t>(natoms));
      for (int b = 0; b < natoms; ++b)
        word[i][static_cast<std::size_t>(b)] = (w[i] >> b) & 1;
    }
    for (std::size_t pl = 0; pl < total; ++pl) fn(word, pl);
    std::size_t i = 0;
    for (; i < total; ++i) {
      if (++w[i] < letters) break;
      w[i] = 0;
    }
    if (i == total) return;
  }
}

void check_language(const Formula& f, int natoms, std::size_t total) {
  BuchiAutomaton aut = translate_to_buchi(nnf(f));
  for_all_words(natoms, total,
                [&](const std::vector<std::vector<bool>>& word, std::size_t pl) {
                  CHECK(testsupport::word_accepted(aut, word, pl) ==
                        eval_lasso(f, word, pl));
                });
}

}  // namespace

TEST_CASE("formula parsing respects precedence") {
  Formula f = parse_formula("fireable(a) U fireable(b) -> G fireable(c)");
  REQUIRE(f.kind == K::Imp);
  CHECK(f.args[0].kind == K::Until);
  CHECK(f.args[1].kind == K::Globally);

  Formula g = parse_formula("!fireable(a) && fireable(b) || fireable(c)");
  REQUIRE(g.kind == K::Or);  // && binds tighter than ||
  CHECK(g.args[0].kind == K::And);
  CHECK(g.args[0].args[0].kind == K::Not);

  Formula t = parse_formula("tok(v) >= -2");
  CHECK(t.kind == K::TokCmp);
  CHECK(t.op == BinOp::Ge);
  CHECK(t.value == -2);

  CHECK(parse_formula("G (tok(x) = 1)").to_string() == "G (tok(x) = 1)");
  CHECK_THROWS(parse_formula("G tok(x)"));
  CHECK_THROWS(parse_formula("F fireable(a) trailing"));
}

TEST_CASE("negation normal form pushes negations to the atoms") {
  Formula a = atom(0), b = atom(1);
  CHECK(negate(Formula::un(K::Globally, a)) ==
        Formula::un(K::Future, Formula::un(K::Not, a)));
  CHECK(nnf(Formula::un(K::Not, Formula::un(K::Not, a))) == a);
  CHECK(negate(Formula::bin(K::And, a, b)) ==
        Formula::bin(K::Or, Formula::un(K::Not, a), Formula::un(K::Not, b)));
  // !(a U b) = G !b || (!b U (!a && !b)), the X-free release expansion.
  Formula na = Formula::un(K::Not, a), nb = Formula::un(K::Not, b);
  CHECK(negate(Formula::bin(K::Until, a, b)) ==
        Formula::bin(K::Or, Formula::un(K::Globally, nb),
                     Formula::bin(K::Until, nb, Formula::bin(K::And, na, nb))));
  CHECK(negate(Formula::t()) == Formula::f());
}

TEST_CASE("negation flips lasso evaluation on every word") {
  testsupport::Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Formula f = testsupport::random_formula(rng, 2, 3);
    Formula nf = negate(f);
    for_all_words(2, 3,
                  [&](const std::vector<std::vector<bool>>& word, std::size_t pl) {
                    CHECK(eval_lasso(f, word, pl) != eval_lasso(nf, word, pl));
                  });
  }
}

TEST_CASE("atoms resolve against the net and deduplicate") {
  Program prog = parse(kTwoThreads);
  Translation tr = translate(prog);

  Formula f = parse_formula("G !fireable(err)");
  auto atoms = resolve_atoms(f, tr);
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].trans == std::vector<int>{tr.net.find_transition("t21")});

  Formula g = parse_formula("fireable(t10)");
  auto ga = resolve_atoms(g, tr);
  CHECK(ga[0].trans == std::vector<int>{tr.net.find_transition("t10")});

  Formula h = parse_formula("F (tok(x) = 1) && G (tok(x) = 1)");
  CHECK(resolve_atoms(h, tr).size() == 1);  // shared atom id
  CHECK(h.args[0].args[0].atom_id == h.args[1].args[0].atom_id);

  Formula bad1 = parse_formula("fireable(nosuch)");
  CHECK_THROWS(resolve_atoms(bad1, tr));
  Formula bad2 = parse_formula("tok(nosuch) = 0");
  CHECK_THROWS(resolve_atoms(bad2, tr));
}

TEST_CASE("atom evaluation reads markings, fireability, and empty places") {
  Program prog = parse(kTwoThreads);
  Translation tr = translate(prog);
  Formula f = parse_formula("fireable(t1b) && tok(x) = 0");
  auto atoms = resolve_atoms(f, tr);
  Marking m0 = Marking::initial(tr.net);
  CHECK(eval_atom(tr.net, m0, atoms[0]));  // t1b enabled initially
  CHECK(eval_atom(tr.net, m0, atoms[1]));  // x starts at 0
  Marking fired = fire(tr.net, m0, tr.net.find_transition("t1b"), {});
  CHECK(!eval_atom(tr.net, fired, atoms[0]));
  // Draining a variable place makes tok undefined.
  Marking broken = m0;
  broken.tokens[static_cast<std::size_t>(atoms[1].place)].clear();
  CHECK_THROWS(eval_atom(tr.net, broken, atoms[1]));
}

TEST_CASE("criterion of a fireability query is the transition's control input") {
  Program prog = parse(kTwoThreads);
  Translation tr = translate(prog);
  Formula f = parse_formula("G !fireable(err)");
  auto atoms = resolve_atoms(f, tr);
  std::set<std::string> names;
  for (int p : extract_criterion(tr, atoms)) names.insert(tr.net.places[p].name);
  CHECK(names == std::set<std::string>{"c21"});
}

TEST_CASE("criterion of a token query adds the writers' control inputs") {
  Program prog = parse(
      "global a in [-8, 8];\nglobal b in [-8, 8];\nglobal c in [-8, 8];\n"
      "fn t() {\n  if (a != 0) {\n    a := 1;\n    b := 2;\n    c := 3;\n  }\n"
      "}\nthread t;\n");
  Translation tr = translate(prog);
  Formula f = parse_formula("G (tok(c) = 3)");
  auto atoms = resolve_atoms(f, tr);
  std::set<std::string> names;
  for (int p : extract_criterion(tr, atoms)) names.insert(tr.net.places[p].name);
  CHECK(names == std::set<std::string>{"v2", "c13"});
}

TEST_CASE("criterion grows monotonically with the atom set") {
  Program prog = parse(kTwoThreads);
  Translation tr = translate(prog);
  Formula f1 = parse_formula("G (tok(y) = 3)");
  Formula f2 = parse_formula("G (tok(y) = 3) && F fireable(err)");
  auto c1 = extract_criterion(tr, resolve_atoms(f1, tr));
  auto c2 = extract_criterion(tr, resolve_atoms(f2, tr));
  CHECK(std::includes(c2.begin(), c2.end(), c1.begin(), c1.end()));
}

TEST_CASE("automata of the basic operators recognize the right languages") {
  Formula a = atom(0), b = atom(1);
  check_language(Formula::un(K::Globally, a), 1, 4);
  check_language(Formula::un(K::Future, a), 1, 4);
  check_language(Formula::bin(K::Until, a, b), 2, 3);
  check_language(Formula::un(K::Future, Formula::un(K::Globally, a)), 1, 4);
  check_language(Formula::bin(K::Or, Formula::un(K::Globally, a),
                              Formula::un(K::Future, b)),
                 2, 3);
  check_language(Formula::t(), 1, 3);
}

TEST_CASE("the automaton for false accepts nothing") {
  BuchiAutomaton aut = translate_to_buchi(Formula::f());
  for_all_words(1, 3,
                [&](const std::vector<std::vector<bool>>& word, std::size_t pl) {
                  CHECK(!testsupport::word_accepted(aut, word, pl));
                });
}
