#include "chorprism/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

#include "chorprism/error.hpp"

namespace chorprism {

VarSpace var_space(const ChorProgram& prog) {
  VarSpace space;
  for (const auto& v : prog.vars) space.add(v.name, v.type);
  return space;
}

State initial_state(const ChorProgram& prog) {
  State s;
  for (const auto& v : prog.vars) s.push_back(v.init);
  return s;
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - b * floor_div(a, b); }

[[noreturn]] void mismatch(const Expr& e, const std::string& what) {
  throw Error(ErrorCode::TypeMismatch, what + " in '" + to_source(e) + "'");
}

std::int64_t as_int(const Value& v, const Expr& e) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  mismatch(e, "expected an integer");
}

bool as_bool(const Value& v, const Expr& e) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  mismatch(e, "expected a boolean");
}

struct Evaluator {
  const VarSpace& space;
  const State& s;
  const ConstEnv& consts;

  Value operator()(const Expr& e) const {
    if (const auto* lit = std::get_if<Expr::Literal>(&e.node)) {
      if (const auto* i = std::get_if<std::int64_t>(&lit->value)) return *i;
      if (const auto* b = std::get_if<bool>(&lit->value)) return *b;
      mismatch(e, "real literal outside a weight");
    }
    if (const auto* var = std::get_if<Expr::Var>(&e.node)) {
      if (var->index) throw Error(ErrorCode::InvalidArgument, "indexed name '" + to_source(e) + "' was not expanded");
      if (auto idx = space.index_of(var->name)) return s[*idx];
      auto c = consts.find(var->name);
      if (c == consts.end()) throw Error(ErrorCode::UnboundName, "unknown name '" + var->name + "'");
      const double d = c->second;
      if (std::floor(d) != d || std::abs(d) > 9.0e15) mismatch(e, "non-integral constant '" + var->name + "'");
      return static_cast<std::int64_t>(d);
    }
    const auto& ap = std::get<Expr::Apply>(e.node);
    const auto& a = ap.args;
    switch (ap.op) {
      case Op::And: return as_bool((*this)(a[0]), e) && as_bool((*this)(a[1]), e);
      case Op::Or: return as_bool((*this)(a[0]), e) || as_bool((*this)(a[1]), e);
      case Op::Not: return !as_bool((*this)(a[0]), e);
      case Op::Neg: return -as_int((*this)(a[0]), e);
      case Op::Eq:
      case Op::Ne: {
        const Value l = (*this)(a[0]);
        const Value r = (*this)(a[1]);
        if (l.index() != r.index()) mismatch(e, "comparing integer with boolean");
        return (l == r) == (ap.op == Op::Eq);
      }
      case Op::Min:
      case Op::Max: {
        std::int64_t acc = as_int((*this)(a[0]), e);
        for (std::size_t i = 1; i < a.size(); ++i) {
          const std::int64_t v = as_int((*this)(a[i]), e);
          acc = ap.op == Op::Min ? std::min(acc, v) : std::max(acc, v);
        }
        return acc;
      }
      default: break;
    }
    const std::int64_t l = as_int((*this)(a[0]), e);
    const std::int64_t r = as_int((*this)(a[1]), e);
    switch (ap.op) {
      case Op::Add: return l + r;
      case Op::Sub: return l - r;
      case Op::Mul: return l * r;
      case Op::Div:
      case Op::Mod:
        if (r == 0) throw Error(ErrorCode::DivisionByZero, "division by zero in '" + to_source(e) + "'");
        return ap.op == Op::Div ? floor_div(l, r) : floor_mod(l, r);
      case Op::Lt: return l < r;
      case Op::Le: return l <= r;
      case Op::Gt: return l > r;
      case Op::Ge: return l >= r;
      default: mismatch(e, "unsupported operator");
    }
  }
};

double weight_of(const Expr& e, const ConstEnv& consts) {
  if (const auto* lit = std::get_if<Expr::Literal>(&e.node)) {
    if (const auto* i = std::get_if<std::int64_t>(&lit->value)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&lit->value)) return *d;
    mismatch(e, "boolean weight");
  }
  if (const auto* var = std::get_if<Expr::Var>(&e.node)) {
    auto c = consts.find(var->name);
    if (c == consts.end() || var->index)
      throw Error(ErrorCode::UnboundName, "weight refers to '" + to_source(e) + "', which is not a defined constant");
    return c->second;
  }
  const auto& ap = std::get<Expr::Apply>(e.node);
  std::vector<double> v;
  for (const auto& arg : ap.args) v.push_back(weight_of(arg, consts));
  switch (ap.op) {
    case Op::Add: return v[0] + v[1];
    case Op::Sub: return v[0] - v[1];
    case Op::Mul: return v[0] * v[1];
    case Op::Div:
      if (v[1] == 0) throw Error(ErrorCode::DivisionByZero, "division by zero in '" + to_source(e) + "'");
      return v[0] / v[1];
    case Op::Neg: return -v[0];
    case Op::Min: return *std::min_element(v.begin(), v.end());
    case Op::Max: return *std::max_element(v.begin(), v.end());
    default: mismatch(e, "non-arithmetic operator in weight");
  }
}

}  // namespace

Value eval(const Expr& e, const VarSpace& space, const State& s, const ConstEnv& consts) {
  return Evaluator{space, s, consts}(e);
}

bool eval_guard(const Expr& e, const VarSpace& space, const State& s, const ConstEnv& consts) {
  return as_bool(eval(e, space, s, consts), e);
}

double eval_weight(const Expr& e, const ConstEnv& consts) { return weight_of(e, consts); }

State apply_update(const VarSpace& space, const State& s, const UpdateList& u, const ConstEnv& consts) {
  State next = s;
  for (const auto& asg : u) {
    auto idx = space.index_of(asg.target);
    if (!idx) throw Error(ErrorCode::UnboundName, "update of unknown variable '" + asg.target + "'");
    Value v = eval(asg.value, space, next, consts);
    const VarType& type = space.types[*idx];
    if (std::holds_alternative<BoolType>(type) != std::holds_alternative<bool>(v))
      throw Error(ErrorCode::TypeMismatch, "update " + asg.target + "' = " + to_source(asg.value) + " has the wrong type");
    if (!in_range(type, v)) {
      const auto& r = std::get<IntRange>(type);
      throw Error(ErrorCode::RangeViolation, "variable " + asg.target + " would become " + to_string(v) +
                                                 ", outside [" + std::to_string(r.lo) + ".." +
                                                 std::to_string(r.hi) + "]");
    }
    next[*idx] = v;
  }
  return next;
}

std::vector<ChorStep> step(const ChorConfig& config, const ChorProgram& prog, const VarSpace& space,
                           const ConstEnv& consts) {
  std::vector<ChorStep> out;
  const ChorTerm& t = *config.term;
  if (const auto* in = std::get_if<Interaction>(&t.node)) {
    for (const auto& b : in->branches) {
      const double w = eval_weight(b.weight, consts);
      if (w < 0) throw Error(ErrorCode::InvalidArgument, "negative weight " + to_source(b.weight));
      if (w == 0) continue;
      out.push_back({w, {apply_update(space, config.state, b.update, consts), b.cont}, false});
    }
  } else if (const auto* c = std::get_if<Conditional>(&t.node)) {
    const bool taken = eval_guard(c->guard, space, config.state, consts);
    out.push_back({1.0, {config.state, taken ? c->then_body : c->else_body}, true});
  } else if (const auto* x = std::get_if<Call>(&t.node)) {
    const Definition* d = prog.find_definition(x->name);
    if (!d) throw Error(ErrorCode::UnboundName, "call to undefined '" + x->name + "'");
    out.push_back({1.0, {config.state, d->body}, true});
  }
  return out;
}

namespace {

// Assigns one id per structurally distinct term.
class TermTable {
 public:
  std::size_t id(const TermPtr& t) {
    auto hit = by_ptr_.find(t.get());
    if (hit != by_ptr_.end()) return hit->second;
    std::string key = to_source(*t);
    auto [it, inserted] = by_text_.emplace(std::move(key), by_text_.size());
    by_ptr_.emplace(t.get(), it->second);
    keep_.push_back(t);
    if (inserted) tags_.push_back(tag(*t, it->second));
    return it->second;
  }
  const std::string& tag_of(std::size_t id) const { return tags_[id]; }

 private:
  static std::string tag(const ChorTerm& t, std::size_t id) {
    if (const auto* c = std::get_if<Call>(&t.node)) return c->name;
    if (std::holds_alternative<Inact>(t.node)) return "end";
    return "t" + std::to_string(id);
  }
  std::unordered_map<const ChorTerm*, std::size_t> by_ptr_;
  std::map<std::string, std::size_t> by_text_;
  std::vector<TermPtr> keep_;
  std::vector<std::string> tags_;
};

}  // namespace

MarkovChain build_chain(const ChorProgram& prog, const ConstEnv& consts, const ChainOptions& opts) {
  MarkovChain chain;
  chain.kind = prog.kind;
  chain.vars = var_space(prog);
  TermTable terms;
  std::map<std::pair<std::size_t, State>, std::size_t> index;
  std::vector<ChorConfig> configs;
  std::deque<std::size_t> queue;

  auto intern = [&](ChorConfig cfg) {
    auto key = std::make_pair(terms.id(cfg.term), cfg.state);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (configs.size() >= opts.max_states)
      throw Error(ErrorCode::StateBudgetExceeded,
                  "more than " + std::to_string(opts.max_states) + " reachable states");
    const std::size_t id = configs.size();
    index.emplace(key, id);
    chain.states.push_back({cfg.state, terms.tag_of(key.first)});
    configs.push_back(std::move(cfg));
    queue.push_back(id);
    return id;
  };

  State init = opts.init ? *opts.init : initial_state(prog);
  chain.initial = intern({std::move(init), call(prog.main)});
  while (!queue.empty()) {
    const std::size_t src = queue.front();
    queue.pop_front();
    std::map<std::size_t, Transition> merged;
    for (auto& s : step(configs[src], prog, chain.vars, consts)) {
      const std::size_t dst = intern(std::move(s.next));
      auto [it, fresh] = merged.try_emplace(dst, Transition{src, dst, 0.0, true});
      it->second.weight += s.weight;
      it->second.silent = it->second.silent && s.silent;
    }
    if (merged.empty() && prog.kind == ModelKind::Dtmc) merged[src] = Transition{src, src, 1.0, false};
    for (auto& [dst, t] : merged) chain.transitions.push_back(t);
  }
  return chain;
}

}  // namespace chorprism
