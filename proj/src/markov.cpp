#include "chorprism/markov.hpp"

#include <cstdio>
#include <sstream>

namespace chorprism {

std::optional<std::size_t> VarSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

void VarSpace::add(std::string name, VarType type) {
  names.push_back(std::move(name));
  types.push_back(type);
}

std::string to_string(const VarSpace& space, const State& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += (i < space.names.size() ? space.names[i] : "?") + "=" + to_string(s[i]);
  }
  return out;
}

std::vector<std::vector<std::size_t>> MarkovChain::out_edges() const {
  std::vector<std::vector<std::size_t>> out(states.size());
  for (std::size_t t = 0; t < transitions.size(); ++t) out[transitions[t].src].push_back(t);
  return out;
}

double MarkovChain::out_weight(std::size_t state) const {
  double sum = 0;
  for (const auto& t : transitions)
    if (t.src == state) sum += t.weight;
  return sum;
}

namespace {
std::string weight_text(double w) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", w);
  return buf;
}
}  // namespace

std::string to_text(const MarkovChain& chain) {
  std::ostringstream os;
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    os << "STATE " << i << ' ' << to_string(chain.vars, chain.states[i].values);
    if (i == chain.initial) os << " init";
    os << '\n';
  }
  for (const auto& t : chain.transitions)
    os << "TRANS " << t.src << ' ' << t.dst << ' ' << weight_text(t.weight) << '\n';
  return os.str();
}

std::string to_dot(const MarkovChain& chain) {
  std::ostringstream os;
  os << "digraph " << to_string(chain.kind) << " {\n";
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    os << "  s" << i << " [label=\"" << to_string(chain.vars, chain.states[i].values);
    if (!chain.states[i].location.empty()) os << "\\n" << chain.states[i].location;
    os << '"';
    if (i == chain.initial) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (const auto& t : chain.transitions) {
    os << "  s" << t.src << " -> s" << t.dst << " [label=\"" << weight_text(t.weight) << '"';
    if (t.silent) os << ", style=dashed";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace chorprism
