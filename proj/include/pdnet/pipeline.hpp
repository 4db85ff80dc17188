#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pdnet/checker.hpp"
#include "pdnet/deps.hpp"
#include "pdnet/parser.hpp"
#include "pdnet/slicer.hpp"
#include "pdnet/translate.hpp"

namespace pdnet {

// End-to-end driver: parse -> translate -> resolve formula -> (slice) ->
// model-check. Shared by the CLI, the benchmark runner, and the tests.

struct PipelineOptions {
  bool use_slice = true;
  std::size_t max_states = 1'000'000;
  SuccOrder order = SuccOrder::kExitLast;
  // When set, overrides every declared variable domain (lo, hi).
  std::optional<std::pair<std::int64_t, std::int64_t>> int_range;
};

struct PipelineResult {
  Verdict verdict = Verdict::Holds;
  CheckResult check;
  // Statement labels along the counterexample (stutter steps dropped).
  std::vector<int> prefix_labels, loop_labels;
  std::size_t places_total = 0, places_kept = 0;
  std::size_t transitions_total = 0, transitions_kept = 0;
  std::size_t repair_arcs = 0;
  std::vector<std::string> criterion;  // place names
  double seconds = 0.0;
};

inline void override_domains(Program& p, std::int64_t lo, std::int64_t hi) {
  auto fix = [&](VarDecl& d) {
    d.lo = lo;
    d.hi = hi;
    if (d.init < lo || d.init > hi) d.init = lo <= 0 && 0 <= hi ? 0 : lo;
  };
  for (auto& g : p.globals) fix(g);
  for (auto& f : p.functions)
    for (auto& prm : f.params) fix(prm);
}

inline PipelineResult run_check(Program prog, const std::string& formula,
                                const PipelineOptions& opt = {}) {
  auto start = std::chrono::steady_clock::now();
  if (opt.int_range) override_domains(prog, opt.int_range->first, opt.int_range->second);
  PipelineResult r;
  Translation tr = translate(prog);
  r.places_total = tr.net.places.size();
  r.transitions_total = tr.net.transitions.size();

  Formula psi = parse_formula(formula);
  auto atoms = resolve_atoms(psi, tr);

  if (opt.use_slice) {
    Deps deps(tr);
    auto crit = extract_criterion(tr, atoms);
    for (int p : crit) r.criterion.push_back(tr.net.places[static_cast<std::size_t>(p)].name);
    SlicedNet sl = slice(tr, deps, crit);
    r.places_kept = sl.kept_places.size();
    r.transitions_kept = sl.kept_transitions.size();
    r.repair_arcs = sl.repair_arcs.size();
    r.check = model_check(sl.net, psi, remap_atoms(sl, atoms), opt.max_states, opt.order);
    for (int t : r.check.prefix)
      if (t >= 0) r.prefix_labels.push_back(sl.net.transitions[static_cast<std::size_t>(t)].src_label);
    for (int t : r.check.loop)
      if (t >= 0) r.loop_labels.push_back(sl.net.transitions[static_cast<std::size_t>(t)].src_label);
  } else {
    r.places_kept = r.places_total;
    r.transitions_kept = r.transitions_total;
    r.check = model_check(tr.net, psi, atoms, opt.max_states, opt.order);
    for (int t : r.check.prefix)
      if (t >= 0) r.prefix_labels.push_back(tr.net.transitions[static_cast<std::size_t>(t)].src_label);
    for (int t : r.check.loop)
      if (t >= 0) r.loop_labels.push_back(tr.net.transitions[static_cast<std::size_t>(t)].src_label);
  }
  r.verdict = r.check.verdict;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline PipelineResult run_check(const std::string& source, const std::string& formula,
                                const PipelineOptions& opt = {}) {
  return run_check(parse(source), formula, opt);
}

}  // namespace pdnet
