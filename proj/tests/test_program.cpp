#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <functional>
#include <map>
#include <set>

#include "doctest.h"
#include "pdnet/parser.hpp"

using namespace pdnet;

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

}  // namespace

TEST_CASE("two-thread program parses with sequential labels") {
  Program p = parse(kTwoThreads);
  REQUIRE(p.functions.size() == 2);
  CHECK(p.threads == std::vector<std::string>{"thr1", "thr2"});
  const Function& f1 = p.functions[0];
  CHECK(f1.enter_label == 1);
  REQUIRE(f1.body.size() == 3);
  CHECK(f1.body[0].label == 2);
  CHECK(f1.body[2].label == 4);
  CHECK(f1.exit_label == 5);
  CHECK(f1.done_label == 6);
  const Function& f2 = p.functions[1];
  CHECK(f2.enter_label == 7);
  CHECK(f2.body[0].label == 8);
  CHECK(f2.body[0].body[0].label == 9);
  CHECK(f2.body[0].body[0].kind == Stmt::Kind::ErrorMark);
  CHECK(p.label_count == 11);
  CHECK(validate(p).empty());
}

TEST_CASE("labels enumerate 1..n with no gaps or duplicates") {
  Program p = parse(kTwoThreads);
  std::set<int> seen;
  std::function<void(const Block&)> walk = [&](const Block& b) {
    for (const auto& s : b) {
      seen.insert(s.label);
      walk(s.body);
      walk(s.else_body);
    }
  };
  for (const auto& f : p.functions) {
    seen.insert(f.enter_label);
    walk(f.body);
    seen.insert(f.exit_label);
    seen.insert(f.done_label);
  }
  REQUIRE(static_cast<int>(seen.size()) == p.label_count);
  CHECK(*seen.begin() == 1);
  CHECK(*seen.rbegin() == p.label_count);
}

TEST_CASE("parse then pretty-print then parse is a fixpoint") {
  for (const char* src :
       {kTwoThreads,
        "global a in [0, 3] = 2;\nmutex m;\nfn f(p in [0, 1]) {\n  lock m;\n"
        "  while (a > 0) {\n    a := a - p;\n  }\n  unlock m;\n}\n"
        "fn g() {\n  call f(1) -> a;\n}\nthread g;\n"}) {
    Program p1 = parse(src);
    Program p2 = parse(pretty_print(p1));
    CHECK(same_structure(p1, p2));
    CHECK(pretty_print(p1) == pretty_print(p2));
  }
}

TEST_CASE("while with empty body and comments") {
  Program p = parse("# a comment\nfn t() {\n  while (0 < 1) { }\n}\nthread t;\n");
  REQUIRE(p.functions[0].body.size() == 1);
  CHECK(p.functions[0].body[0].kind == Stmt::Kind::While);
  CHECK(p.functions[0].body[0].body.empty());
}

TEST_CASE("syntax errors carry a position") {
  CHECK_THROWS_AS(parse("fn t() { x := ; }\nthread t;\n"), ParseError);
  CHECK_THROWS_AS(parse("fn t() { if x { } }\nthread t;\n"), ParseError);
  CHECK_THROWS_AS(parse("banana;"), ParseError);
}

TEST_CASE("validate reports unknown functions, variables, and recursion") {
  Program p1 = parse("fn t() { call f(1) -> t0; }\nthread t;\n");
  CHECK(!validate(p1).empty());

  Program p2 = parse("fn t() { x := 1; }\nthread t;\n");  // x undeclared
  CHECK(!validate(p2).empty());

  Program p3 = parse(
      "global a in [0, 1];\n"
      "fn f(p in [0, 1]) { call g(p); }\n"
      "fn g(q in [0, 1]) { call f(q); }\n"
      "fn t() { call f(a); }\nthread t;\n");
  CHECK(!validate(p3).empty());

  Program p4 = parse("fn t() { }\nthread u;\n");  // unknown thread entry
  CHECK(!validate(p4).empty());
}

TEST_CASE("expression precedence and negative literals") {
  Program p = parse(
      "global a in [-8, 8] = -2;\n"
      "fn t() { a := 1 + 2 * 3 - -1; }\nthread t;\n");
  CHECK(p.globals[0].init == -2);
  const Expr& e = p.functions[0].body[0].expr;
  std::map<std::string, std::int64_t> env;
  CHECK(eval_expr(e, env) == 8);
}
