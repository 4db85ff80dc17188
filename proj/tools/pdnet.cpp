// Command-line front end: check a formula against a program, run the
// benchmark corpus, or export intermediate artifacts (net, dependences,
// slice, reachability graph, product) as DOT or JSON.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdnet/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pdnet;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// `--ltl` accepts a formula or @file.
std::string load_formula(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') return slurp(arg.substr(1));
  return arg;
}

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("--int-range expects lo:hi");
  return {std::stoll(s.substr(0, colon)), std::stoll(s.substr(colon + 1))};
}

struct CommonArgs {
  std::string program;
  std::string ltl;
  bool no_slice = false;
  std::size_t max_states = 1'000'000;
  std::string int_range;
  std::string fmt;
  std::string seed_order = "exit-last";
};

PipelineOptions options_of(const CommonArgs& a) {
  PipelineOptions o;
  o.use_slice = !a.no_slice;
  o.max_states = a.max_states;
  if (!a.int_range.empty()) o.int_range = parse_range(a.int_range);
  o.order = a.seed_order == "id" ? SuccOrder::kById : SuccOrder::kExitLast;
  return o;
}

void add_common(CLI::App* cmd, CommonArgs& a, bool need_program) {
  if (need_program)
    cmd->add_option("program", a.program, "program source file")->required();
  cmd->add_option("--ltl", a.ltl, "LTL-X formula, or @file");
  cmd->add_flag("--no-slice", a.no_slice, "check the unsliced net");
  cmd->add_flag_function("--slice", [&a](std::int64_t) { a.no_slice = false; },
                         "slice before checking (default)");
  cmd->add_option("--max-states", a.max_states, "state-space bound")
      ->envname("PDNET_MAX_STATES");
  cmd->add_option("--int-range", a.int_range,
                  "override every variable domain with lo:hi");
  cmd->add_option("--seed-order", a.seed_order,
                  "successor order: exit-last (default) or id");
}

json check_json(const PipelineResult& r) {
  json j;
  j["verdict"] = to_string(r.verdict);
  j["states"] = r.check.markings;
  j["product_states"] = r.check.product_states;
  j["fired"] = r.check.fired;
  j["slice"] = {{"places_kept", r.places_kept},
                {"places_total", r.places_total},
                {"transitions_kept", r.transitions_kept},
                {"transitions_total", r.transitions_total},
                {"repair_arcs", r.repair_arcs},
                {"criterion", r.criterion}};
  j["counterexample"] = {{"prefix", r.prefix_labels}, {"loop", r.loop_labels}};
  return j;
}

int cmd_check(const CommonArgs& a) {
  if (a.ltl.empty()) throw std::runtime_error("check requires --ltl");
  PipelineResult r =
      run_check(parse(slurp(a.program)), load_formula(a.ltl), options_of(a));
  if (a.fmt == "json") {
    std::cout << check_json(r).dump(2) << "\n";
  } else {
    std::cout << "verdict: " << to_string(r.verdict) << "\n"
              << "markings: " << r.check.markings << "\n"
              << "product states: " << r.check.product_states << "\n"
              << "slice: kept " << r.places_kept << "/" << r.places_total
              << " places, " << r.transitions_kept << "/"
              << r.transitions_total << " transitions\n";
    if (r.verdict == Verdict::Violated) {
      std::cout << "counterexample statements:";
      for (int l : r.prefix_labels) std::cout << " " << l;
      std::cout << "\nloop statements:";
      for (int l : r.loop_labels) std::cout << " " << l;
      if (r.loop_labels.empty()) std::cout << " (stutter)";
      std::cout << "\n";
    }
  }
  switch (r.verdict) {
    case Verdict::Holds: return 0;
    case Verdict::Violated: return 1;
    case Verdict::BoundExceeded: return 2;
  }
  return 2;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int cmd_bench(const std::string& dir, const CommonArgs& a) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".cpl" &&
        fs::exists(e.path().parent_path() /
                   (e.path().stem().string() + ".psi1.ltl")))
      names.push_back(e.path().stem().string());
  std::sort(names.begin(), names.end());

  json report = json::array();
  int mismatches = 0;
  for (const auto& n : names) {
    std::string base = dir + "/" + n;
    Program prog = parse(slurp(base + ".cpl"));
    std::string expect;
    if (fs::exists(base + ".expect")) expect = slurp(base + ".expect");
    std::istringstream exp(expect);
    for (int k = 1; k <= 2; ++k) {
      std::string psik = base + ".psi" + std::to_string(k) + ".ltl";
      if (!fs::exists(psik)) continue;
      std::string psi = slurp(psik);
      PipelineOptions o = options_of(a);
      o.use_slice = false;
      PipelineResult u = run_check(prog, psi, o);
      o.use_slice = true;
      PipelineResult s = run_check(prog, psi, o);
      auto letter = [](Verdict v) {
        return v == Verdict::Holds ? "T" : v == Verdict::Violated ? "F" : "B";
      };
      std::string want;
      exp >> want;
      bool agree = u.verdict == s.verdict;
      bool expected_ok = want.empty() || want == letter(s.verdict);
      if (!agree || !expected_ok) {
        ++mismatches;
        std::cerr << n << " psi" << k << ": expected "
                  << (want.empty() ? "?" : want) << ", sliced "
                  << letter(s.verdict) << ", unsliced " << letter(u.verdict)
                  << "\n";
      }
      json row;
      row["case"] = n;
      row["formula"] = "psi" + std::to_string(k);
      row["expected"] = want;
      row["verdict_sliced"] = letter(s.verdict);
      row["verdict_unsliced"] = letter(u.verdict);
      row["states_sliced"] = s.check.markings;
      row["states_unsliced"] = u.check.markings;
      row["places"] = {s.places_kept, s.places_total};
      row["transitions"] = {s.transitions_kept, s.transitions_total};
      row["seconds_sliced"] = s.seconds;
      row["seconds_unsliced"] = u.seconds;
      report.push_back(std::move(row));
    }
  }
  if (a.fmt == "json") {
    std::cout << report.dump(2) << "\n";
  } else {
    printf("%-12s %-5s %-4s %-7s %-9s %9s %11s %11s\n", "case", "psi", "want",
           "sliced", "unsliced", "states", "states(un)", "net(p/t)");
    for (const auto& row : report)
      printf("%-12s %-5s %-4s %-7s %-9s %9zu %11zu %5zu/%zu\n",
             row["case"].get<std::string>().c_str(),
             row["formula"].get<std::string>().c_str(),
             row["expected"].get<std::string>().c_str(),
             row["verdict_sliced"].get<std::string>().c_str(),
             row["verdict_unsliced"].get<std::string>().c_str(),
             row["states_sliced"].get<std::size_t>(),
             row["states_unsliced"].get<std::size_t>(),
             row["places"][0].get<std::size_t>(),
             row["places"][1].get<std::size_t>());
  }
  return mismatches == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

json net_json(const PDNet& net) {
  json j;
  j["places"] = json::array();
  for (const auto& p : net.places)
    j["places"].push_back({{"name", p.name},
                           {"roles", role_string(p.roles)},
                           {"init", p.init}});
  j["transitions"] = json::array();
  for (const auto& t : net.transitions)
    j["transitions"].push_back(
        {{"name", t.name}, {"kind", to_string(t.kind)}, {"label", t.src_label}});
  j["arcs"] = json::array();
  for (const auto& a : net.arcs)
    j["arcs"].push_back({{"from", a.place_to_trans
                                      ? net.places[a.place].name
                                      : net.transitions[a.trans].name},
                         {"to", a.place_to_trans ? net.transitions[a.trans].name
                                                 : net.places[a.place].name},
                         {"expr", a.expr.to_string()},
                         {"repair", a.repair}});
  return j;
}

std::string rg_dot(const PDNet& net, const RGraph& rg) {
  std::ostringstream os;
  os << "digraph rg {\n  // nodes=" << rg.nodes.size();
  std::size_t edges = 0;
  for (const auto& e : rg.edges) edges += e.size();
  os << " edges=" << edges << "\n";
  for (std::size_t i = 0; i < rg.nodes.size(); ++i)
    os << "  n" << i << " [shape=circle];\n";
  for (std::size_t i = 0; i < rg.edges.size(); ++i)
    for (auto [t, to] : rg.edges[i])
      os << "  n" << i << " -> n" << to << " [label=\""
         << (t >= 0 ? net.transitions[static_cast<std::size_t>(t)].name : "~")
         << "\"];\n";
  os << "}\n";
  return os.str();
}

json rg_json(const PDNet& net, const RGraph& rg) {
  json j;
  j["nodes"] = rg.nodes.size();
  j["markings"] = json::array();
  for (const auto& m : rg.nodes) {
    json mk;
    for (const auto& p : net.places)
      if (!m.tokens[static_cast<std::size_t>(p.id)].empty())
        mk[p.name] = m.tokens[static_cast<std::size_t>(p.id)];
    j["markings"].push_back(std::move(mk));
  }
  j["edges"] = json::array();
  for (std::size_t i = 0; i < rg.edges.size(); ++i)
    for (auto [t, to] : rg.edges[i])
      j["edges"].push_back(
          {{"from", i},
           {"trans", t >= 0 ? net.transitions[static_cast<std::size_t>(t)].name
                            : "~"},
           {"to", to}});
  return j;
}

int cmd_export(const std::string& stage, const CommonArgs& a) {
  Program prog = parse(slurp(a.program));
  if (!a.int_range.empty()) {
    auto [lo, hi] = parse_range(a.int_range);
    override_domains(prog, lo, hi);
  }
  Translation tr = translate(prog);
  bool dot = a.fmt != "json";

  auto sliced = [&]() {
    if (a.ltl.empty())
      throw std::runtime_error("--stage " + stage + " requires --ltl");
    Formula psi = parse_formula(load_formula(a.ltl));
    auto atoms = resolve_atoms(psi, tr);
    Deps deps(tr);
    auto crit = extract_criterion(tr, atoms);
    return std::make_tuple(slice(tr, deps, crit), psi, atoms, crit);
  };

  if (stage == "net") {
    std::cout << (dot ? to_dot(tr.net) : net_json(tr.net).dump(2) + "\n");
  } else if (stage == "deps") {
    Deps deps(tr);
    if (dot) {
      std::cout << deps.to_dot_overlay();
    } else {
      json j = json::array();
      for (const auto& e : deps.all_dependence_edges())
        j.push_back({{"from", tr.net.transitions[static_cast<std::size_t>(e.from)].name},
                     {"to", tr.net.transitions[static_cast<std::size_t>(e.to)].name},
                     {"kind", to_string(e.kind)}});
      std::cout << j.dump(2) << "\n";
    }
  } else if (stage == "slice") {
    auto [sl, psi, atoms, crit] = sliced();
    if (dot) {
      std::cout << to_dot(sl.net);
    } else {
      json j;
      j["criterion"] = json::array();
      for (int p : crit)
        j["criterion"].push_back(tr.net.places[static_cast<std::size_t>(p)].name);
      j["kept_places"] = json::array();
      j["removed_places"] = json::array();
      for (const auto& p : tr.net.places)
        j[sl.keeps_place(p.id) ? "kept_places" : "removed_places"].push_back(p.name);
      j["kept_transitions"] = json::array();
      j["removed_transitions"] = json::array();
      for (const auto& t : tr.net.transitions)
        j[sl.keeps_transition(t.id) ? "kept_transitions" : "removed_transitions"]
            .push_back(t.name);
      j["repair_arcs"] = json::array();
      for (auto [t, p] : sl.repair_arcs)
        j["repair_arcs"].push_back(
            {tr.net.transitions[static_cast<std::size_t>(t)].name,
             tr.net.places[static_cast<std::size_t>(p)].name});
      std::cout << j.dump(2) << "\n";
    }
  } else if (stage == "rg") {
    PipelineOptions o = options_of(a);
    const PDNet* net = &tr.net;
    SlicedNet sl;
    if (o.use_slice && !a.ltl.empty()) {
      auto [s, psi, atoms, crit] = sliced();
      sl = std::move(s);
      net = &sl.net;
    }
    RGraph rg = reachability_graph(*net, o.max_states, o.order);
    std::cout << (dot ? rg_dot(*net, rg) : rg_json(*net, rg).dump(2) + "\n");
  } else if (stage == "product") {
    if (a.ltl.empty()) throw std::runtime_error("--stage product requires --ltl");
    PipelineOptions o = options_of(a);
    Formula psi = parse_formula(load_formula(a.ltl));
    auto atoms = resolve_atoms(psi, tr);
    const PDNet* net = &tr.net;
    SlicedNet sl;
    if (o.use_slice) {
      Deps deps(tr);
      sl = slice(tr, deps, extract_criterion(tr, atoms));
      net = &sl.net;
      atoms = remap_atoms(sl, atoms);
    }
    RGraph rg = reachability_graph(*net, o.max_states, o.order);
    BuchiAutomaton aut = translate_to_buchi(negate(psi));
    ProductSpace prod(*net, rg, aut, atoms);
    // Explore everything reachable, then dump.
    std::vector<int> todo = prod.roots();
    std::set<int> seen(todo.begin(), todo.end());
    while (!todo.empty()) {
      int s = todo.back();
      todo.pop_back();
      for (auto [t, lbl] : prod.succ(s))
        if (seen.insert(t).second) todo.push_back(t);
    }
    std::ostringstream os;
    os << "digraph product {\n  // states=" << prod.size() << "\n";
    for (int s : seen) {
      auto [node, q] = prod.state(s);
      os << "  s" << s << " [label=\"m" << node << ",q" << q << "\""
         << (prod.accepting(s) ? ",shape=doublecircle" : ",shape=circle")
         << "];\n";
    }
    for (int s : seen)
      for (auto [t, lbl] : prod.succ(s))
        os << "  s" << s << " -> s" << t << " [label=\""
           << (lbl >= 0 ? net->transitions[static_cast<std::size_t>(lbl)].name : "~")
           << "\"];\n";
    os << "}\n";
    std::cout << os.str();
  } else {
    throw std::runtime_error("unknown stage '" + stage + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTL-X verification of concurrent programs via sliced "
               "program dependence nets"};
  app.require_subcommand(1);

  CommonArgs check_args, bench_args, export_args;
  std::string bench_dir, stage;

  CLI::App* check = app.add_subcommand("check", "verify a formula");
  add_common(check, check_args, true);
  check->add_option("--fmt", check_args.fmt, "output format: text|json");

  CLI::App* bench = app.add_subcommand("bench", "run a benchmark corpus");
  bench->add_option("dir", bench_dir, "corpus directory")->required();
  bench->add_option("--max-states", bench_args.max_states, "state-space bound")
      ->envname("PDNET_MAX_STATES");
  bench->add_option("--int-range", bench_args.int_range, "domain override lo:hi");
  bench->add_option("--seed-order", bench_args.seed_order, "successor order");
  bench->add_option("--fmt", bench_args.fmt, "output format: text|json");

  CLI::App* exp = app.add_subcommand("export", "emit intermediate artifacts");
  add_common(exp, export_args, true);
  exp->add_option("--stage", stage, "net|deps|slice|rg|product")->required();
  exp->add_option("--fmt", export_args.fmt, "output format: dot|json");

  CLI11_PARSE(app, argc, argv);
  try {
    if (check->parsed()) return cmd_check(check_args);
    if (bench->parsed()) return cmd_bench(bench_dir, bench_args);
    return cmd_export(stage, export_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
