#pragma once

// Operational semantics of choreographies.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "chorprism/ast.hpp"
#include "chorprism/markov.hpp"

namespace chorprism {

// Program variables in declaration order.
VarSpace var_space(const ChorProgram& prog);
State initial_state(const ChorProgram& prog);

// Integer/boolean evaluation. Names resolve to state variables first, then
// to constants (which must be integral here). `/` and mod are floored.
Value eval(const Expr& e, const VarSpace& space, const State& s, const ConstEnv& consts);

bool eval_guard(const Expr& e, const VarSpace& space, const State& s, const ConstEnv& consts);

// Real-valued evaluation of weights: only literals and constants.
double eval_weight(const Expr& e, const ConstEnv& consts);

// Sequential update: each right-hand side sees the previous assignments.
State apply_update(const VarSpace& space, const State& s, const UpdateList& u,
                   const ConstEnv& consts);

struct ChorConfig {
  State state;
  TermPtr term;
};

struct ChorStep {
  double weight;
  ChorConfig next;
  bool silent;  // Call and conditional steps
};

std::vector<ChorStep> step(const ChorConfig& config, const ChorProgram& prog, const VarSpace& space,
                           const ConstEnv& consts);

struct ChainOptions {
  std::size_t max_states = kDefaultMaxStates;
  std::optional<State> init;  // defaults to declared initial values
};

MarkovChain build_chain(const ChorProgram& prog, const ConstEnv& consts, const ChainOptions& opts = {});

}  // namespace chorprism
