#pragma once

// Explicit-state Markov chains shared by both semantics.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chorprism/ast.hpp"

namespace chorprism {

// Ordered set of state variables; a State holds one value per entry.
struct VarSpace {
  std::vector<std::string> names;
  std::vector<VarType> types;

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t size() const { return names.size(); }
  void add(std::string name, VarType type);
};

using State = std::vector<Value>;

// StateValuation with its variable names attached, for display and tests.
std::string to_string(const VarSpace& space, const State& s);

struct ChainState {
  State values;
  std::string location;  // opaque tag: remaining term, or empty
};

struct Transition {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 0.0;
  // Produced only by administrative steps (Call unfolding, conditional
  // resolution, unlabeled network commands).
  bool silent = false;
};

struct MarkovChain {
  ModelKind kind = ModelKind::Ctmc;
  VarSpace vars;
  std::vector<ChainState> states;
  std::size_t initial = 0;
  std::vector<Transition> transitions;

  std::vector<std::vector<std::size_t>> out_edges() const;  // transition indices per state
  double out_weight(std::size_t state) const;
};

// STATE <id> <var=val,...> [init] / TRANS <src> <dst> <weight>
std::string to_text(const MarkovChain& chain);
std::string to_dot(const MarkovChain& chain);

// Budget default shared by both chain builders.
inline constexpr std::size_t kDefaultMaxStates = 100000;

}  // namespace chorprism
