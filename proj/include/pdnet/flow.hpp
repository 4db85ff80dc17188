#pragma once

#include <map>
#include <vector>

#include "pdnet/expand.hpp"

namespace pdnet {

// Location-level control flow of an expanded program, shared by the
// interpreter and the net translation. Every location gets one site:
//   Enter - function entry, advances into the body
//   Stmt  - a statement; branches carry both targets
//   Exit  - fall-through exit point, advances to the done location
//   Rets  - a callee's done location as seen by its caller (return site)
//   Done  - a thread root's terminal location
struct FlowSite {
  enum class Kind { Enter, Stmt, Exit, Rets, Done };
  Kind kind = Kind::Done;
  const Instance* inst = nullptr;
  const InstStmt* stmt = nullptr;  // Stmt; for Rets: the call statement
  int succ = -1;                   // fall-through / taken-branch target
  int succ_false = -1;             // branch false target
  int abort_loc = -1;              // thread-root done location (error target)
};

using FlowMap = std::map<int, FlowSite>;

namespace detail {

class FlowBuilder {
 public:
  explicit FlowBuilder(const Expansion& ex) {
    for (const auto* root : ex.thread_roots) {
      link_instance(*root, root->done_loc);
      FlowSite done;
      done.kind = FlowSite::Kind::Done;
      done.inst = root;
      map_[root->done_loc] = done;
    }
  }

  FlowMap take() { return std::move(map_); }

 private:
  static int block_entry(const std::vector<InstStmt>& b, int cont) {
    return b.empty() ? cont : b.front().loc;
  }

  void link_instance(const Instance& inst, int abort_loc) {
    FlowSite enter;
    enter.kind = FlowSite::Kind::Enter;
    enter.inst = &inst;
    enter.succ = block_entry(inst.body, inst.exit_loc);
    map_[inst.enter_loc] = enter;

    std::vector<std::pair<int, int>> loops;
    link_block(inst, inst.body, inst.exit_loc, loops, abort_loc);

    FlowSite exit;
    exit.kind = FlowSite::Kind::Exit;
    exit.inst = &inst;
    exit.succ = inst.done_loc;
    map_[inst.exit_loc] = exit;
  }

  void link_block(const Instance& inst, const std::vector<InstStmt>& b, int cont,
                  std::vector<std::pair<int, int>>& loops, int abort_loc) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const InstStmt& s = b[i];
      int next = i + 1 < b.size() ? b[i + 1].loc : cont;
      FlowSite site;
      site.kind = FlowSite::Kind::Stmt;
      site.inst = &inst;
      site.stmt = &s;
      site.succ = next;
      site.abort_loc = abort_loc;
      switch (s.kind) {
        case Stmt::Kind::If:
          site.succ = block_entry(s.body, next);
          site.succ_false = block_entry(s.else_body, next);
          link_block(inst, s.body, next, loops, abort_loc);
          link_block(inst, s.else_body, next, loops, abort_loc);
          break;
        case Stmt::Kind::While:
          site.succ = block_entry(s.body, s.loc);
          site.succ_false = next;
          loops.emplace_back(s.loc, next);
          link_block(inst, s.body, s.loc, loops, abort_loc);
          loops.pop_back();
          break;
        case Stmt::Kind::Jump:
          if (s.jump == JumpKind::Return || loops.empty()) {
            site.succ = inst.exit_loc;
          } else {
            site.succ = s.jump == JumpKind::Break ? loops.back().second
                                                  : loops.back().first;
          }
          break;
        case Stmt::Kind::Call: {
          site.succ = s.callee->enter_loc;
          link_instance(*s.callee, abort_loc);
          FlowSite rets;
          rets.kind = FlowSite::Kind::Rets;
          rets.inst = &inst;
          rets.stmt = &s;
          rets.succ = next;
          map_[s.callee->done_loc] = rets;
          break;
        }
        default:
          break;
      }
      map_[s.loc] = site;
    }
  }

  FlowMap map_;
};

}  // namespace detail

inline FlowMap build_flow(const Expansion& ex) {
  return detail::FlowBuilder(ex).take();
}

}  // namespace pdnet
