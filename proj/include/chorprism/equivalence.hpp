#pragma once

// Checking a projection against its choreography: both chains are observed
// through the program variables, administrative steps are collapsed, and
// the results are compared by weight-preserving bisimulation.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "chorprism/ast.hpp"
#include "chorprism/error.hpp"
#include "chorprism/markov.hpp"
#include "chorprism/projection.hpp"

namespace chorprism {

inline constexpr double kBisimTolerance = 1e-9;

struct LabeledChain {
  ModelKind kind = ModelKind::Ctmc;
  VarSpace obs_vars;
  std::vector<State> obs;            // observation per state
  std::vector<std::string> origin;   // full description of the original state
  std::size_t initial = 0;
  std::vector<Transition> transitions;

  std::size_t size() const { return obs.size(); }
};

// Restricts every state to `observed` (all of them must exist in the chain).
LabeledChain label_chain(const MarkovChain& chain, const VarSpace& observed);

// Removes administrative steps. A state is administrative when it has a
// single exit to another state that is taken with certainty (DTMC) or keeps
// the observation (CTMC, weight 1 or silent). Every edge u -> v is redirected
// past administrative v as long as the step through v is a stutter, i.e. v
// carries the observation of u or of its successor. Only states reachable
// from the (likewise redirected) initial state are kept; parallel edges are
// merged.
LabeledChain collapse(const LabeledChain& chain);

// Quotient by strong bisimulation (the coarsest lumping).
LabeledChain lump(const LabeledChain& chain);

// collapse and lump alternated until neither shrinks the chain. Lumping
// merges copies that differ only in hidden variables, which can leave new
// administrative states for the next collapse.
LabeledChain normalise(const LabeledChain& chain);

struct BisimResult {
  bool equivalent = false;
  std::size_t blocks = 0;
  std::vector<std::size_t> block_a;  // witness: block of every state
  std::vector<std::size_t> block_b;
  std::string counterexample;        // empty when equivalent
};

BisimResult bisimilar(const LabeledChain& a, const LabeledChain& b, double tolerance = kBisimTolerance);

struct VerifyOptions {
  ProjectionStyle style = ProjectionStyle::Folded;
  bool override_sconn = false;
  ConstEnv consts;
  std::optional<State> init;  // over program variables
  std::size_t max_states = kDefaultMaxStates;
  std::optional<std::size_t> inject_fault;
  bool parallel = true;       // build the two chains concurrently
};

struct VerifyReport {
  bool equivalent = false;
  ModelKind kind = ModelKind::Ctmc;
  ProjectionStyle style = ProjectionStyle::Folded;
  std::size_t chor_states = 0;
  std::size_t prism_states = 0;
  std::size_t chor_collapsed = 0;
  std::size_t prism_collapsed = 0;
  std::size_t blocks = 0;
  std::vector<Diagnostic> findings;
  std::string counterexample;

  std::string to_text() const;
  std::string to_key_values() const;
};

VerifyReport verify_projection(const ChorProgram& prog, const VerifyOptions& opts = {});

}  // namespace chorprism
