#pragma once

// The PRISM fragment: modules of guarded probabilistic commands composed by
// CSP-style alphabetized parallel composition.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "chorprism/ast.hpp"
#include "chorprism/markov.hpp"

namespace chorprism {

// A rate or probability. `symbolic` keeps the source expression (over
// constants) for emission; `value` is what the semantics uses.
struct Weight {
  double value = 1.0;
  std::optional<Expr> symbolic;

  static Weight of(double v) { return Weight{v, std::nullopt}; }
};

Weight operator*(const Weight& a, const Weight& b);

struct PrismBranch {
  Weight weight;
  UpdateList update;
};

struct PrismCommand {
  std::optional<std::string> label;  // nullopt: silent
  Expr guard;
  std::vector<PrismBranch> branches;
};

struct PrismModule {
  std::string name;
  std::vector<VarDecl> locals;
  std::vector<PrismCommand> commands;
};

struct PrismNetwork;
using NetworkPtr = std::shared_ptr<const PrismNetwork>;

struct PrismNetwork {
  struct Nil {};
  struct Par {
    std::set<std::string> sync;
    NetworkPtr left;
    NetworkPtr right;
  };
  std::variant<Nil, PrismModule, Par> node;
};

NetworkPtr nil_network();
NetworkPtr module_network(PrismModule m);
NetworkPtr par(std::set<std::string> sync, NetworkPtr left, NetworkPtr right);

// Left fold with sync set = alphabet(acc) ∩ alphabet(next).
NetworkPtr compose(const std::vector<PrismModule>& modules);

std::set<std::string> alphabet(const PrismNetwork& net);
std::set<std::string> alphabet(const PrismModule& m);

// Modules in left-to-right order.
std::vector<const PrismModule*> modules_of(const PrismNetwork& net);

// Closure of rules M, P1 and P2.
std::vector<PrismCommand> derive_commands(const PrismNetwork& net);

// All module-local variables, in module order, and their initial values.
VarSpace network_vars(const PrismNetwork& net);
State network_initial_state(const PrismNetwork& net);

// Σ of λ_i over branches i with s[u_i] = s2; 0 when the guard is false.
double mu(const PrismCommand& cmd, const VarSpace& space, const State& s, const State& s2, const ConstEnv& consts);

struct NetworkStep {
  double weight;
  State next;
  bool silent;  // every contributing command was unlabeled
};

struct StepOutcome {
  std::vector<NetworkStep> steps;  // ordered by first appearance
  double raw_mass = 0;             // Σ before DTMC normalisation
};

StepOutcome step_network(const std::vector<PrismCommand>& derived, ModelKind kind, const VarSpace& space,
                         const State& s, const ConstEnv& consts);

struct NetworkChainOptions {
  std::size_t max_states = kDefaultMaxStates;
  std::optional<State> init;
};

struct NetworkChain {
  MarkovChain chain;
  // DTMC states whose outgoing mass before normalisation differed from 1.
  std::vector<std::pair<std::size_t, double>> unnormalised;
};

NetworkChain build_network_chain(const PrismNetwork& net, ModelKind kind, const ConstEnv& consts,
                                 const NetworkChainOptions& opts = {});

}  // namespace chorprism
