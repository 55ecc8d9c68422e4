#pragma once

// Projection of annotated choreographies into PRISM networks.
//
// Two styles are provided:
//  * Formal: the textbook definitions. Every role keeps a counter over the
//    global node numbering, roles that do not take part in a step project
//    its continuations at shifted offsets, and each Call becomes a silent
//    reset command. This reproduces the worked examples but can deadlock
//    when a role's first action sits in a non-first branch.
//  * Folded (default): each role's commands are guarded by the set of
//    counter values the role can hold at that point (a per-role dataflow
//    over the choreography), Calls are folded into the preceding command's
//    counter target and no reset commands are produced. Counter values are
//    the definition indices followed by fresh values in preorder.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chorprism/ast.hpp"
#include "chorprism/error.hpp"
#include "chorprism/prism.hpp"

namespace chorprism {

enum class ProjectionStyle { Formal, Folded };

std::string_view to_string(ProjectionStyle style);

struct ProjectionContext {
  ModelKind kind = ModelKind::Ctmc;
  ProjectionStyle style = ProjectionStyle::Folded;
  std::map<std::string, int> defs_start;
  std::map<std::string, std::string> counter_var;  // role -> counter name
  std::map<std::string, int> counter_max;          // role -> largest counter value
  // interaction annotation -> per-branch synchronisation labels
  std::map<std::string, std::vector<std::string>> label_map;
  ConstEnv consts;
};

// Counter layout for `prog`. Formal: main starts at 0 and each further
// definition after the nodes() of all earlier bodies. Folded: definition
// indices, main first.
ProjectionContext alloc_defs(const ChorProgram& prog, ProjectionStyle style = ProjectionStyle::Formal,
                             const ConstEnv& consts = {});

// Assignments of `u` whose target `role` owns, order preserved.
UpdateList proj_update(const UpdateList& u, const std::string& role, const ChorProgram& prog);

// Formal projection of one term for one role at counter value `iota`.
std::vector<PrismCommand> proj_role(const std::string& role, const ChorTerm& term, int iota,
                                    const ProjectionContext& ctx, const ChorProgram& prog);

struct ProjectOptions {
  ProjectionStyle style = ProjectionStyle::Folded;
  bool override_sconn = false;  // project anyway, report a warning
  ConstEnv consts;              // extra/overriding constants
  // Test hook: redirect the n-th counter assignment (0-based, module order)
  // to a different value.
  std::optional<std::size_t> inject_fault;
};

struct Projection {
  std::vector<PrismModule> modules;
  NetworkPtr network;
  ProjectionContext ctx;
  std::vector<Diagnostic> warnings;
};

// Validates (well-formedness, annotations, strong connectedness) and
// projects every role. Throws IllFormed, DuplicateAnnotation or
// NotStronglyConnected with the diagnostics in the message.
Projection project(const ChorProgram& prog, const ProjectOptions& opts = {});

// Extends a program state with the counters at their initial values, in the
// network's variable order.
State lift_state(const VarSpace& network_space, const VarSpace& program_space, const State& s,
                 const Projection& proj);

}  // namespace chorprism
