#include "chorprism/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "chorprism/semantics.hpp"

namespace chorprism {

int nodes(const ChorTerm& term, ModelKind kind) {
  if (const auto* in = std::get_if<Interaction>(&term.node)) {
    int n = 1;
    if (kind == ModelKind::Dtmc) n += static_cast<int>(in->branches.size());
    for (const auto& b : in->branches) n += nodes(*b.cont, kind);
    return n;
  }
  if (const auto* c = std::get_if<Conditional>(&term.node)) {
    return 1 + nodes(*c->then_body, kind) + nodes(*c->else_body, kind);
  }
  return 1;
}

std::set<std::string> h_mods(const ChorTerm& term, const ChorProgram& prog) {
  std::set<std::string> seen;
  const ChorTerm* t = &term;
  while (const auto* c = std::get_if<Call>(&t->node)) {
    if (!seen.insert(c->name).second)
      throw Error(ErrorCode::UnguardedRecursion, "definition '" + c->name + "' unfolds to itself without acting");
    const Definition* d = prog.find_definition(c->name);
    if (!d) throw Error(ErrorCode::UnboundName, "call to undefined '" + c->name + "'");
    t = d->body.get();
  }
  if (const auto* in = std::get_if<Interaction>(&t->node)) {
    std::set<std::string> out(in->receivers.begin(), in->receivers.end());
    out.insert(in->initiator);
    return out;
  }
  if (const auto* c = std::get_if<Conditional>(&t->node)) return {c->at};
  return {};
}

namespace {

std::string describe(const Interaction& in) {
  if (in.label) return "interaction " + *in.label;
  std::string s = "interaction " + in.initiator + " ->";
  for (const auto& r : in.receivers) s += " " + r;
  return s;
}

std::string join(const std::set<std::string>& xs) {
  std::string out = "{";
  for (const auto& x : xs) out += (out.size() > 1 ? ", " : "") + x;
  return out + "}";
}

class ConnChecker {
 public:
  explicit ConnChecker(const ChorProgram& prog) : prog_(prog) {}

  void check(const ChorTerm& t, const std::string& where) {
    if (const auto* in = std::get_if<Interaction>(&t.node)) {
      std::set<std::string> parts(in->receivers.begin(), in->receivers.end());
      parts.insert(in->initiator);
      for (std::size_t j = 0; j < in->branches.size(); ++j) {
        const std::string here = where + ", " + describe(*in) + " branch " + std::to_string(j + 1);
        check(*in->branches[j].cont, here);
        const auto next = h_mods(*in->branches[j].cont, prog_);
        const bool shares = std::any_of(next.begin(), next.end(), [&](const auto& r) { return parts.count(r) > 0; });
        if (!next.empty() && !shares) {
          report(here, "next action involves " + join(next) + ", none of which took part in " + join(parts));
        }
      }
    } else if (const auto* c = std::get_if<Conditional>(&t.node)) {
      const TermPtr bodies[] = {c->then_body, c->else_body};
      for (int j = 0; j < 2; ++j) {
        const std::string here = where + ", conditional at " + c->at + (j == 0 ? " then" : " else");
        check(*bodies[j], here);
        const auto next = h_mods(*bodies[j], prog_);
        if (!next.empty() && !next.count(c->at)) {
          report(here, "next action involves " + join(next) + " but not " + c->at);
        }
      }
    } else if (const auto* x = std::get_if<Call>(&t.node)) {
      // Coinductive reading: a definition under inspection is assumed connected.
      if (!visited_.insert(x->name).second) return;
      if (const Definition* d = prog_.find_definition(x->name)) check(*d->body, "def " + x->name);
    }
  }

  void mark(const std::string& def) { visited_.insert(def); }
  const std::vector<Diagnostic>& found() const { return found_; }

 private:
  void report(const std::string& where, const std::string& msg) {
    for (const auto& d : found_)
      if (d.where == where) return;
    found_.push_back({"NotStronglyConnected", msg, where});
  }

  const ChorProgram& prog_;
  std::set<std::string> visited_;
  std::vector<Diagnostic> found_;
};

}  // namespace

bool s_conn(const ChorTerm& term, const ChorProgram& prog) {
  ConnChecker checker(prog);
  checker.check(term, "term");
  return checker.found().empty();
}

std::vector<Diagnostic> s_conn_violations(const ChorProgram& prog) {
  ConnChecker checker(prog);
  for (const auto& d : prog.definitions) {
    checker.mark(d.name);
    checker.check(*d.body, "def " + d.name);
  }
  return checker.found();
}

namespace {

// Visits every interaction with a readable location.
void for_each_interaction(const ChorTerm& t, const std::string& where,
                          const std::function<void(const Interaction&, const std::string&)>& f) {
  if (const auto* in = std::get_if<Interaction>(&t.node)) {
    f(*in, where);
    for (std::size_t j = 0; j < in->branches.size(); ++j)
      for_each_interaction(*in->branches[j].cont, where + ", " + describe(*in) + " branch " + std::to_string(j + 1), f);
  } else if (const auto* c = std::get_if<Conditional>(&t.node)) {
    for_each_interaction(*c->then_body, where + ", then", f);
    for_each_interaction(*c->else_body, where + ", else", f);
  }
}

}  // namespace

AnnotationReport check_annotations(const ChorProgram& prog) {
  std::map<std::string, std::vector<std::string>> seen;
  std::vector<std::string> order;
  auto note = [&](const std::string& label, const std::string& where) {
    auto& v = seen[label];
    if (v.empty()) order.push_back(label);
    v.push_back(where);
  };
  for (const auto& d : prog.definitions) {
    for_each_interaction(*d.body, "def " + d.name, [&](const Interaction& in, const std::string& where) {
      if (!in.label) throw Error(ErrorCode::MissingAnnotation, "unannotated " + describe(in) + " in " + where);
      note(*in.label, where);
      for (std::size_t j = 0; j < in.branches.size(); ++j) {
        const auto& b = in.branches[j];
        note(b.label ? *b.label : *in.label + "_" + std::to_string(j + 1),
             where + ", " + describe(in) + " branch " + std::to_string(j + 1));
      }
    });
  }
  AnnotationReport report;
  for (const auto& label : order) {
    const auto& where = seen[label];
    if (where.size() < 2) continue;
    report.ok = false;
    report.duplicated.push_back(label);
    std::string locs;
    for (const auto& w : where) locs += (locs.empty() ? "" : "; ") + w;
    report.violations.push_back({"DuplicateAnnotation", "label '" + label + "' occurs " +
                                                            std::to_string(where.size()) + " times", locs});
  }
  return report;
}

namespace {

enum class Ty { Int, Bool, Unknown };

class WellFormed {
 public:
  WellFormed(const ChorProgram& prog, const ConstEnv& extra) : prog_(prog), consts_(prog.const_env()) {
    for (const auto& [k, v] : extra) consts_[k] = v;
  }

  std::vector<Diagnostic> run() {
    declarations();
    if (!prog_.find_definition(prog_.main)) add("UnknownMain", "main '" + prog_.main + "' is not defined", "main");
    std::set<std::string> defs;
    for (const auto& d : prog_.definitions) {
      if (!defs.insert(d.name).second) add("DuplicateDefinition", "definition '" + d.name + "' repeated", "def " + d.name);
      term(*d.body, "def " + d.name);
    }
    return out_;
  }

 private:
  void add(std::string code, std::string msg, std::string where) {
    out_.push_back({std::move(code), std::move(msg), std::move(where)});
  }

  void declarations() {
    std::set<std::string> names;
    auto claim = [&](const std::string& n, const std::string& what) {
      if (n.empty()) add("EmptyName", what + " with empty name", what);
      else if (!names.insert(n).second) add("DuplicateName", "'" + n + "' declared more than once", what + " " + n);
    };
    for (const auto& r : prog_.roles) claim(r, "role");
    for (const auto& c : prog_.constants) claim(c.name, "const");
    for (const auto& v : prog_.vars) {
      claim(v.name, "var");
      const std::string where = "var " + v.name;
      if (!prog_.has_role(v.owner)) add("UnknownRole", "owner '" + v.owner + "' is not a declared role", where);
      if (const auto* r = std::get_if<IntRange>(&v.type); r && r->lo > r->hi)
        add("EmptyRange", "range [" + std::to_string(r->lo) + ".." + std::to_string(r->hi) + "] is empty", where);
      else if (!in_range(v.type, v.init))
        add("InitOutOfRange", "initial value " + to_string(v.init) + " is outside the declared type", where);
    }
  }

  Ty type_of(const Expr& e, const std::string& where) {
    if (const auto* lit = std::get_if<Expr::Literal>(&e.node)) {
      if (std::holds_alternative<bool>(lit->value)) return Ty::Bool;
      if (std::holds_alternative<std::int64_t>(lit->value)) return Ty::Int;
      add("TypeMismatch", "real literal " + to_source(e) + " outside a weight", where);
      return Ty::Unknown;
    }
    if (const auto* v = std::get_if<Expr::Var>(&e.node)) {
      if (const VarDecl* d = prog_.find_var(v->name)) return std::holds_alternative<BoolType>(d->type) ? Ty::Bool : Ty::Int;
      if (is_constant(v->name)) {
        auto c = consts_.find(v->name);
        if (c != consts_.end() && std::floor(c->second) != c->second)
          add("TypeMismatch", "non-integral constant '" + v->name + "' used in a state expression", where);
        return Ty::Int;
      }
      add("UnboundName", "unknown name '" + v->name + "'", where);
      return Ty::Unknown;
    }
    const auto& ap = std::get<Expr::Apply>(e.node);
    std::vector<Ty> args;
    for (const auto& a : ap.args) args.push_back(type_of(a, where));
    auto expect = [&](Ty want) {
      for (Ty t : args)
        if (t != Ty::Unknown && t != want) {
          add("TypeMismatch", "operand of '" + std::string(info(ap.op).symbol) + "' has the wrong type in " + to_source(e), where);
          return;
        }
    };
    switch (ap.op) {
      case Op::And: case Op::Or: case Op::Not:
        expect(Ty::Bool);
        return Ty::Bool;
      case Op::Eq: case Op::Ne:
        if (args[0] != Ty::Unknown && args[1] != Ty::Unknown && args[0] != args[1])
          add("TypeMismatch", "comparing integer with boolean in " + to_source(e), where);
        return Ty::Bool;
      case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
        expect(Ty::Int);
        return Ty::Bool;
      default:
        expect(Ty::Int);
        return Ty::Int;
    }
  }

  bool is_constant(const std::string& n) const {
    return std::any_of(prog_.constants.begin(), prog_.constants.end(), [&](const Constant& c) { return c.name == n; }) ||
           consts_.count(n) > 0;
  }

  void role_ref(const std::string& r, const std::string& where) {
    if (!prog_.has_role(r)) add("UnknownRole", "'" + r + "' is not a declared role", where);
  }

  void term(const ChorTerm& t, const std::string& where) {
    if (const auto* in = std::get_if<Interaction>(&t.node)) {
      interaction(*in, where);
    } else if (const auto* c = std::get_if<Conditional>(&t.node)) {
      role_ref(c->at, where + ", conditional");
      if (type_of(c->guard, where + ", conditional") == Ty::Int)
        add("TypeMismatch", "guard " + to_source(c->guard) + " is not boolean", where + ", conditional");
      term(*c->then_body, where + ", then");
      term(*c->else_body, where + ", else");
    } else if (const auto* x = std::get_if<Call>(&t.node)) {
      if (!prog_.find_definition(x->name)) add("UnresolvedCall", "call to undefined '" + x->name + "'", where);
    }
  }

  void interaction(const Interaction& in, const std::string& where) {
    const std::string here = where + ", " + describe(in);
    role_ref(in.initiator, here);
    std::set<std::string> parts{in.initiator};
    if (in.receivers.empty()) add("NoReceivers", "interaction has no receivers", here);
    for (const auto& r : in.receivers) {
      role_ref(r, here);
      if (r == in.initiator) add("InitiatorInReceivers", "initiator " + r + " is also a receiver", here);
      else if (!parts.insert(r).second) add("DuplicateReceiver", "receiver " + r + " listed twice", here);
    }
    if (in.branches.empty()) add("NoBranches", "interaction has no branches", here);
    double sum = 0;
    bool all_known = true;
    for (std::size_t j = 0; j < in.branches.size(); ++j) {
      const Branch& b = in.branches[j];
      const std::string bw = here + " branch " + std::to_string(j + 1);
      std::optional<double> w = weight(b.weight, bw);
      if (w) sum += *w;
      else all_known = false;
      std::set<std::string> targets;
      for (const auto& a : b.update) {
        if (!targets.insert(a.target).second) add("DuplicateTarget", "variable " + a.target + " assigned twice", bw);
        const VarDecl* d = prog_.find_var(a.target);
        const Ty rhs = type_of(a.value, bw);
        if (!d) {
          add("UndeclaredVariable", "update of undeclared variable '" + a.target + "'", bw);
          continue;
        }
        if (!parts.count(d->owner))
          add("NonParticipantWrite", a.target + " is owned by " + d->owner + ", who does not take part", bw);
        const Ty want = std::holds_alternative<BoolType>(d->type) ? Ty::Bool : Ty::Int;
        if (rhs != Ty::Unknown && rhs != want)
          add("TypeMismatch", "update " + a.target + "' = " + to_source(a.value) + " has the wrong type", bw);
      }
      term(*b.cont, bw);
    }
    if (prog_.kind == ModelKind::Dtmc && all_known && !in.branches.empty() && std::abs(sum - 1.0) > 1e-9) {
      add("ProbSumNotOne", "branch probabilities sum to " + std::to_string(sum), here);
    }
  }

  std::optional<double> weight(const Expr& e, const std::string& where) {
    bool constant = true;
    for (const auto& n : names_in(e)) {
      if (prog_.find_var(n)) {
        add("StateDependentWeight", "weight " + to_source(e) + " reads variable " + n, where);
        constant = false;
      } else if (!is_constant(n)) {
        add("UnboundName", "unknown name '" + n + "' in weight", where);
        constant = false;
      } else if (!consts_.count(n)) {
        add("UndefinedConstant", "constant '" + n + "' has no value", where);
        constant = false;
      }
    }
    if (!constant) return std::nullopt;
    double w;
    try {
      w = eval_weight(e, consts_);
    } catch (const Error& err) {
      add(std::string(to_string(err.code())), err.what(), where);
      return std::nullopt;
    }
    if (!std::isfinite(w) || w < 0) {
      add("NegativeWeight", "weight " + to_source(e) + " evaluates to " + std::to_string(w), where);
    } else if (prog_.kind == ModelKind::Dtmc && w > 1.0 + 1e-9) {
      add("ProbOutOfRange", "probability " + to_source(e) + " exceeds 1", where);
    }
    return w;
  }

  const ChorProgram& prog_;
  ConstEnv consts_;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> check_well_formed(const ChorProgram& prog, const ConstEnv& extra) {
  return WellFormed(prog, extra).run();
}

}  // namespace chorprism
