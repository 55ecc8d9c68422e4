#include "chorprism/prism.hpp"

#include <cmath>
#include <deque>
#include <map>

#include "chorprism/error.hpp"
#include "chorprism/semantics.hpp"

namespace chorprism {

namespace {
Expr weight_expr(const Weight& w) {
  if (w.symbolic) return *w.symbolic;
  if (std::floor(w.value) == w.value && std::abs(w.value) < 1e15) return Expr::integer(static_cast<std::int64_t>(w.value));
  return Expr::real(w.value);
}
}  // namespace

Weight operator*(const Weight& a, const Weight& b) {
  Weight out{a.value * b.value, std::nullopt};
  if (!a.symbolic && !b.symbolic) return out;
  if (!a.symbolic && a.value == 1.0) out.symbolic = b.symbolic;
  else if (!b.symbolic && b.value == 1.0) out.symbolic = a.symbolic;
  else out.symbolic = Expr::apply(Op::Mul, {weight_expr(a), weight_expr(b)});
  return out;
}

NetworkPtr nil_network() { return std::make_shared<const PrismNetwork>(PrismNetwork{PrismNetwork::Nil{}}); }

NetworkPtr module_network(PrismModule m) { return std::make_shared<const PrismNetwork>(PrismNetwork{std::move(m)}); }

NetworkPtr par(std::set<std::string> sync, NetworkPtr left, NetworkPtr right) {
  return std::make_shared<const PrismNetwork>(
      PrismNetwork{PrismNetwork::Par{std::move(sync), std::move(left), std::move(right)}});
}

std::set<std::string> alphabet(const PrismModule& m) {
  std::set<std::string> out;
  for (const auto& c : m.commands)
    if (c.label) out.insert(*c.label);
  return out;
}

std::set<std::string> alphabet(const PrismNetwork& net) {
  if (const auto* m = std::get_if<PrismModule>(&net.node)) return alphabet(*m);
  if (const auto* p = std::get_if<PrismNetwork::Par>(&net.node)) {
    auto out = alphabet(*p->left);
    auto right = alphabet(*p->right);
    out.insert(right.begin(), right.end());
    return out;
  }
  return {};
}

NetworkPtr compose(const std::vector<PrismModule>& modules) {
  if (modules.empty()) return nil_network();
  NetworkPtr acc = module_network(modules.front());
  std::set<std::string> acc_alpha = alphabet(modules.front());
  for (std::size_t i = 1; i < modules.size(); ++i) {
    const auto next_alpha = alphabet(modules[i]);
    std::set<std::string> sync;
    for (const auto& l : next_alpha)
      if (acc_alpha.count(l)) sync.insert(l);
    acc = par(std::move(sync), acc, module_network(modules[i]));
    acc_alpha.insert(next_alpha.begin(), next_alpha.end());
  }
  return acc;
}

std::vector<const PrismModule*> modules_of(const PrismNetwork& net) {
  if (const auto* m = std::get_if<PrismModule>(&net.node)) return {m};
  if (const auto* p = std::get_if<PrismNetwork::Par>(&net.node)) {
    auto out = modules_of(*p->left);
    auto right = modules_of(*p->right);
    out.insert(out.end(), right.begin(), right.end());
    return out;
  }
  return {};
}

std::vector<PrismCommand> derive_commands(const PrismNetwork& net) {
  if (const auto* m = std::get_if<PrismModule>(&net.node)) return m->commands;  // (M)
  const auto* p = std::get_if<PrismNetwork::Par>(&net.node);
  if (!p) return {};
  const auto left = derive_commands(*p->left);
  const auto right = derive_commands(*p->right);
  auto synced = [&](const PrismCommand& c) { return c.label && p->sync.count(*c.label); };
  std::vector<PrismCommand> out;
  for (const auto* side : {&left, &right})  // (P1)
    for (const auto& c : *side)
      if (!synced(c)) out.push_back(c);
  for (const auto& f : left) {  // (P2)
    if (!synced(f)) continue;
    for (const auto& g : right) {
      if (g.label != f.label) continue;
      PrismCommand c;
      c.label = f.label;
      c.guard = Expr::apply(Op::And, {f.guard, g.guard});
      for (const auto& bf : f.branches) {
        for (const auto& bg : g.branches) {
          PrismBranch b{bf.weight * bg.weight, bf.update};
          b.update.insert(b.update.end(), bg.update.begin(), bg.update.end());
          c.branches.push_back(std::move(b));
        }
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

VarSpace network_vars(const PrismNetwork& net) {
  VarSpace space;
  for (const auto* m : modules_of(net))
    for (const auto& v : m->locals) space.add(v.name, v.type);
  return space;
}

State network_initial_state(const PrismNetwork& net) {
  State s;
  for (const auto* m : modules_of(net))
    for (const auto& v : m->locals) s.push_back(v.init);
  return s;
}

double mu(const PrismCommand& cmd, const VarSpace& space, const State& s, const State& s2, const ConstEnv& consts) {
  if (!eval_guard(cmd.guard, space, s, consts)) return 0.0;
  double sum = 0;
  for (const auto& b : cmd.branches)
    if (apply_update(space, s, b.update, consts) == s2) sum += b.weight.value;
  return sum;
}

StepOutcome step_network(const std::vector<PrismCommand>& derived, ModelKind kind, const VarSpace& space,
                         const State& s, const ConstEnv& consts) {
  StepOutcome out;
  std::map<State, std::size_t> slot;
  for (const auto& cmd : derived) {
    if (!eval_guard(cmd.guard, space, s, consts)) continue;
    for (const auto& b : cmd.branches) {
      if (b.weight.value < 0) throw Error(ErrorCode::InvalidArgument, "negative command weight");
      if (b.weight.value == 0) continue;
      State next = apply_update(space, s, b.update, consts);
      auto [it, fresh] = slot.try_emplace(next, out.steps.size());
      if (fresh) out.steps.push_back({0.0, std::move(next), true});
      NetworkStep& st = out.steps[it->second];
      st.weight += b.weight.value;
      st.silent = st.silent && !cmd.label;
      out.raw_mass += b.weight.value;
    }
  }
  if (kind == ModelKind::Dtmc) {
    if (out.steps.empty()) {
      out.steps.push_back({1.0, s, false});
    } else {
      for (auto& st : out.steps) st.weight /= out.raw_mass;
    }
  }
  return out;
}

NetworkChain build_network_chain(const PrismNetwork& net, ModelKind kind, const ConstEnv& consts,
                                 const NetworkChainOptions& opts) {
  NetworkChain result;
  MarkovChain& chain = result.chain;
  chain.kind = kind;
  chain.vars = network_vars(net);
  const auto derived = derive_commands(net);
  std::map<State, std::size_t> index;
  std::deque<std::size_t> queue;
  auto intern = [&](const State& s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    if (chain.states.size() >= opts.max_states)
      throw Error(ErrorCode::StateBudgetExceeded, "more than " + std::to_string(opts.max_states) + " reachable states");
    const std::size_t id = chain.states.size();
    index.emplace(s, id);
    chain.states.push_back({s, ""});
    queue.push_back(id);
    return id;
  };
  chain.initial = intern(opts.init ? *opts.init : network_initial_state(net));
  while (!queue.empty()) {
    const std::size_t src = queue.front();
    queue.pop_front();
    const State here = chain.states[src].values;
    StepOutcome out = step_network(derived, kind, chain.vars, here, consts);
    if (kind == ModelKind::Dtmc && out.raw_mass > 0 && std::abs(out.raw_mass - 1.0) > 1e-9)
      result.unnormalised.emplace_back(src, out.raw_mass);
    for (auto& st : out.steps) chain.transitions.push_back({src, intern(st.next), st.weight, st.silent});
  }
  return result;
}

}  // namespace chorprism
