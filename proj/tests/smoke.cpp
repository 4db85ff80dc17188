#include "pdnet/buchi.hpp"
#include "pdnet/checker.hpp"
#include "pdnet/deps.hpp"
#include "pdnet/interp.hpp"
#include "pdnet/parser.hpp"
#include "pdnet/slicer.hpp"

int main() {
  auto prog = pdnet::parse("global x in [-8, 8];\nthread t1;\nfn t1() { x := 1; }\n");
  pdnet::Translation tr = pdnet::translate(prog);
  (void)tr;
  return 0;
}
