// Index expansion, foreach instantiation, allsynch expansion, lowering to the
// core syntax and automatic annotation.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "chorprism/frontend.hpp"
#include "chorprism/semantics.hpp"

namespace chorprism {

namespace s = surface;

namespace {

std::string where(SourcePos pos) {
  return pos.line ? " at " + std::to_string(pos.line) + ":" + std::to_string(pos.column) : "";
}

std::int64_t static_int(const Expr& e, const ConstEnv& consts, const std::string& what) {
  const double d = eval_weight(e, consts);
  if (std::floor(d) != d) throw Error(ErrorCode::InvalidArgument, what + " must be an integer, got " + to_source(e));
  return static_cast<std::int64_t>(d);
}

using Bindings = std::map<std::string, std::int64_t>;

// Shared state of the index passes.
struct Families {
  ConstEnv consts;
  std::map<std::string, IntRange> roles;
  std::map<std::string, IntRange> vars;

  bool known_name(const std::string& n, const std::set<std::string>& plain_vars) const {
    return consts.count(n) || plain_vars.count(n) || vars.count(n) || roles.count(n);
  }
};

std::int64_t wrap(std::int64_t v, const IntRange& r) {
  const std::int64_t size = r.hi - r.lo + 1;
  std::int64_t off = (v - r.lo) % size;
  if (off < 0) off += size;
  return r.lo + off;
}

bool mentions_any(const Expr& e, const Bindings& b) {
  for (const auto& n : names_in(e))
    if (b.count(n)) return true;
  return false;
}

// Resolves name[index] once the index is static. Returns nullopt while the
// index still depends on an unbound name (e.g. a foreach variable).
std::optional<std::string> resolve_name(const std::string& name, const Expr& index, bool wraps,
                                        const std::map<std::string, IntRange>& families, const ConstEnv& consts,
                                        SourcePos pos) {
  for (const auto& n : names_in(index))
    if (!consts.count(n)) return std::nullopt;
  auto fam = families.find(name);
  if (fam == families.end())
    throw Error(ErrorCode::IndexOutOfFamily, "'" + name + "' is not an indexed family" + where(pos), pos);
  std::int64_t v = static_int(index, consts, "index of " + name);
  if (v < fam->second.lo || v > fam->second.hi) {
    if (!wraps)
      throw Error(ErrorCode::IndexOutOfFamily,
                  name + "[" + std::to_string(v) + "] is outside [" + std::to_string(fam->second.lo) + ".." +
                      std::to_string(fam->second.hi) + "]" + where(pos),
                  pos);
    v = wrap(v, fam->second);
  }
  return name + std::to_string(v);
}

Expr subst(const Expr& e, const Bindings& b, const Families& f, SourcePos pos) {
  if (const auto* v = std::get_if<Expr::Var>(&e.node)) {
    if (!v->index) {
      auto it = b.find(v->name);
      return it != b.end() ? Expr::integer(it->second) : e;
    }
    const bool wraps = mentions_any(*v->index, b);
    Expr idx = subst(*v->index, b, f, pos);
    if (auto name = resolve_name(v->name, idx, wraps, f.vars, f.consts, pos)) return Expr::var(*name);
    return Expr{Expr::Var{v->name, std::make_shared<const Expr>(std::move(idx))}};
  }
  if (const auto* ap = std::get_if<Expr::Apply>(&e.node)) {
    std::vector<Expr> args;
    for (const auto& a : ap->args) args.push_back(subst(a, b, f, pos));
    return Expr::apply(ap->op, std::move(args));
  }
  return e;
}

s::RoleRef subst_role(const s::RoleRef& r, const Bindings& b, const Families& f, bool must_resolve) {
  if (!r.index) return r;
  const bool wraps = mentions_any(*r.index, b);
  Expr idx = subst(*r.index, b, f, r.pos);
  if (auto name = resolve_name(r.name, idx, wraps, f.roles, f.consts, r.pos)) return {*name, std::nullopt, r.pos};
  if (must_resolve)
    throw Error(ErrorCode::NonStaticIndex, "role index " + to_source(idx) + " is not static" + where(r.pos), r.pos);
  return {r.name, idx, r.pos};
}

std::vector<s::Update> subst_updates(const std::vector<s::Update>& us, const Bindings& b, const Families& f) {
  std::vector<s::Update> out;
  for (const auto& u : us) {
    s::Update n = u;
    if (u.kind == s::Update::Kind::Assign) {
      n.value = subst(u.value, b, f, u.pos);
      if (u.index) {
        const bool wraps = mentions_any(*u.index, b);
        Expr idx = subst(*u.index, b, f, u.pos);
        if (auto name = resolve_name(u.target, idx, wraps, f.vars, f.consts, u.pos)) {
          n.target = *name;
          n.index.reset();
        } else {
          n.index = std::move(idx);
        }
      }
    } else {
      Bindings inner = b;
      inner.erase(u.var);  // the loop variable shadows
      if (u.lo) n.lo = subst(*u.lo, inner, f, u.pos);
      if (u.hi) n.hi = subst(*u.hi, inner, f, u.pos);
      if (u.pred) n.pred = subst(*u.pred, inner, f, u.pos);
      n.body = subst_updates(u.body, inner, f);
    }
    out.push_back(std::move(n));
  }
  return out;
}

// Names that act as statement-level index variables: unbound identifiers in
// index positions (or foreach bounds/predicates).
void index_candidates(const Expr& e, bool in_index, const std::set<std::string>& bound, const Families& f,
                      const std::set<std::string>& plain_vars, std::vector<std::string>& out) {
  if (const auto* v = std::get_if<Expr::Var>(&e.node)) {
    if (in_index && !v->index && !bound.count(v->name) && !f.known_name(v->name, plain_vars) &&
        std::find(out.begin(), out.end(), v->name) == out.end())
      out.push_back(v->name);
    if (v->index) index_candidates(*v->index, true, bound, f, plain_vars, out);
  } else if (const auto* ap = std::get_if<Expr::Apply>(&e.node)) {
    for (const auto& a : ap->args) index_candidates(a, in_index, bound, f, plain_vars, out);
  }
}

void update_candidates(const std::vector<s::Update>& us, std::set<std::string> bound, const Families& f,
                       const std::set<std::string>& plain_vars, std::vector<std::string>& out) {
  for (const auto& u : us) {
    if (u.kind == s::Update::Kind::Assign) {
      if (u.index) index_candidates(*u.index, true, bound, f, plain_vars, out);
      index_candidates(u.value, false, bound, f, plain_vars, out);
    } else {
      auto inner = bound;
      inner.insert(u.var);
      for (const auto* e : {&u.lo, &u.hi, &u.pred})
        if (*e) index_candidates(**e, true, inner, f, plain_vars, out);
      update_candidates(u.body, inner, f, plain_vars, out);
    }
  }
}

// The family whose index mentions `var`; all such families must agree.
std::optional<IntRange> family_of(const std::string& var, const std::vector<std::pair<std::string, const Expr*>>& refs,
                                  const Families& f, SourcePos pos) {
  std::optional<IntRange> found;
  for (const auto& [name, idx] : refs) {
    const auto ns = names_in(*idx);
    if (std::find(ns.begin(), ns.end(), var) == ns.end()) continue;
    std::optional<IntRange> r;
    if (auto it = f.roles.find(name); it != f.roles.end()) r = it->second;
    else if (auto jt = f.vars.find(name); jt != f.vars.end()) r = jt->second;
    if (!r) continue;
    if (found && !(*found == *r))
      throw Error(ErrorCode::UnsupportedSugar, "index '" + var + "' ranges over families of different sizes" + where(pos), pos);
    found = r;
  }
  return found;
}

void indexed_refs(const Expr& e, std::vector<std::pair<std::string, const Expr*>>& out) {
  if (const auto* v = std::get_if<Expr::Var>(&e.node)) {
    if (v->index) {
      out.emplace_back(v->name, v->index.get());
      indexed_refs(*v->index, out);
    }
  } else if (const auto* ap = std::get_if<Expr::Apply>(&e.node)) {
    for (const auto& a : ap->args) indexed_refs(a, out);
  }
}

void update_refs(const std::vector<s::Update>& us, std::vector<std::pair<std::string, const Expr*>>& out) {
  for (const auto& u : us) {
    if (u.kind == s::Update::Kind::Assign) {
      if (u.index) out.emplace_back(u.target, &*u.index);
      indexed_refs(u.value, out);
    } else {
      update_refs(u.body, out);
    }
  }
}

s::TermPtr make(s::Term t) { return std::make_shared<const s::Term>(std::move(t)); }

class IndexExpander {
 public:
  IndexExpander(const Families& f, std::set<std::string> plain_vars) : f_(f), plain_vars_(std::move(plain_vars)) {}

  s::TermPtr term(const s::TermPtr& t) {
    if (const auto* in = std::get_if<s::Interaction>(&t->node)) return interaction(*in, t->pos);
    if (const auto* c = std::get_if<s::Conditional>(&t->node)) {
      std::vector<std::string> cand;
      index_candidates(c->guard, false, {}, f_, plain_vars_, cand);
      if (c->at.index) index_candidates(*c->at.index, true, {}, f_, plain_vars_, cand);
      if (!cand.empty())
        throw Error(ErrorCode::UnsupportedSugar, "index '" + cand.front() + "' in a conditional" + where(t->pos), t->pos);
      s::Conditional n{subst(c->guard, {}, f_, t->pos), subst_role(c->at, {}, f_, true), term(c->then_body),
                       term(c->else_body)};
      return make({std::move(n), t->pos});
    }
    if (const auto* a = std::get_if<s::AllSynch>(&t->node)) return allsynch(*a, t->pos);
    return t;
  }

 private:
  std::vector<std::string> candidates(const s::Interaction& in) const {
    std::vector<std::string> out;
    for (const auto* r : roles_of(in))
      if (r->index) index_candidates(*r->index, true, {}, f_, plain_vars_, out);
    for (const auto& b : in.branches) {
      index_candidates(b.weight, false, {}, f_, plain_vars_, out);
      update_candidates(b.update, {}, f_, plain_vars_, out);
    }
    return out;
  }

  static std::vector<const s::RoleRef*> roles_of(const s::Interaction& in) {
    std::vector<const s::RoleRef*> out{&in.initiator};
    for (const auto& r : in.receivers) out.push_back(&r);
    return out;
  }

  s::Interaction instantiate(const s::Interaction& in, const Bindings& b) {
    s::Interaction n;
    n.label = in.label;
    n.initiator = subst_role(in.initiator, b, f_, true);
    for (const auto& r : in.receivers) n.receivers.push_back(subst_role(r, b, f_, true));
    for (const auto& br : in.branches) {
      s::Branch nb = br;
      nb.weight = subst(br.weight, b, f_, br.pos);
      nb.update = subst_updates(br.update, b, f_);
      n.branches.push_back(std::move(nb));
    }
    return n;
  }

  s::TermPtr interaction(const s::Interaction& in, SourcePos pos) {
    const auto cand = candidates(in);
    if (cand.size() > 1)
      throw Error(ErrorCode::UnsupportedSugar, "more than one index variable in one interaction" + where(pos), pos);
    std::vector<s::TermPtr> conts;
    for (const auto& b : in.branches) conts.push_back(term(b.cont));
    if (cand.empty()) {
      s::Interaction n = instantiate(in, {});
      for (std::size_t j = 0; j < conts.size(); ++j) n.branches[j].cont = conts[j];
      return make({std::move(n), pos});
    }
    const std::string& var = cand.front();
    std::vector<std::pair<std::string, const Expr*>> refs;
    for (const auto* r : roles_of(in))
      if (r->index) refs.emplace_back(r->name, &*r->index);
    for (const auto& b : in.branches) {
      indexed_refs(b.weight, refs);
      update_refs(b.update, refs);
    }
    auto range = family_of(var, refs, f_, pos);
    if (!range) throw Error(ErrorCode::NonStaticIndex, "cannot tell which family '" + var + "' indexes" + where(pos), pos);
    // Replicas run in sequence; the last one continues as the original.
    s::TermPtr next;
    for (std::int64_t k = range->hi; k >= range->lo; --k) {
      s::Interaction rep = instantiate(in, {{var, k}});
      const std::string suffix = "_" + std::to_string(k);
      if (rep.label) *rep.label += suffix;
      for (std::size_t j = 0; j < rep.branches.size(); ++j) {
        if (rep.branches[j].label) *rep.branches[j].label += suffix;
        rep.branches[j].cont = next ? next : conts[j];
      }
      next = make({std::move(rep), pos});
    }
    return next;
  }

  s::TermPtr allsynch(const s::AllSynch& a, SourcePos pos) {
    s::AllSynch n;
    n.label = a.label;
    n.cont = term(a.cont);
    for (const auto& e : a.entries) {
      std::vector<std::string> cand;
      if (e.role.index) index_candidates(*e.role.index, true, {}, f_, plain_vars_, cand);
      index_candidates(e.guard, false, {}, f_, plain_vars_, cand);
      index_candidates(e.weight, false, {}, f_, plain_vars_, cand);
      update_candidates(e.update, {}, f_, plain_vars_, cand);
      if (cand.size() > 1)
        throw Error(ErrorCode::UnsupportedSugar, "more than one index variable in an allsynch entry" + where(e.pos), e.pos);
      auto inst = [&](const Bindings& b) {
        s::SynchEntry ne = e;
        ne.role = subst_role(e.role, b, f_, true);
        ne.guard = subst(e.guard, b, f_, e.pos);
        ne.weight = subst(e.weight, b, f_, e.pos);
        ne.update = subst_updates(e.update, b, f_);
        n.entries.push_back(std::move(ne));
      };
      if (cand.empty()) {
        inst({});
        continue;
      }
      std::vector<std::pair<std::string, const Expr*>> refs;
      if (e.role.index) refs.emplace_back(e.role.name, &*e.role.index);
      indexed_refs(e.guard, refs);
      update_refs(e.update, refs);
      auto range = family_of(cand.front(), refs, f_, e.pos);
      if (!range) throw Error(ErrorCode::NonStaticIndex, "cannot tell which family '" + cand.front() + "' indexes" + where(e.pos), e.pos);
      for (std::int64_t k = range->lo; k <= range->hi; ++k) inst({{cand.front(), k}});
    }
    return make({std::move(n), pos});
  }

  const Families& f_;
  std::set<std::string> plain_vars_;
};

Families families_of(const SurfaceProgram& prog, const ConstEnv& extra) {
  Families f;
  f.consts = surface_consts(prog, extra);
  for (const auto& [name, r] : prog.flattened) f.vars[name] = r;
  for (const auto& r : prog.roles)
    if (r.lo) f.roles[r.name] = {static_int(*r.lo, f.consts, "family bound"), static_int(*r.hi, f.consts, "family bound")};
  for (const auto& v : prog.vars)
    if (v.family_lo)
      f.vars[v.name] = {static_int(*v.family_lo, f.consts, "family bound"), static_int(*v.family_hi, f.consts, "family bound")};
  return f;
}

}  // namespace

ConstEnv surface_consts(const SurfaceProgram& prog, const ConstEnv& extra) {
  ConstEnv env;
  for (const auto& c : prog.constants) {
    if (auto it = extra.find(c.name); it != extra.end()) env[c.name] = it->second;
    else if (c.value) env[c.name] = eval_weight(*c.value, env);
  }
  for (const auto& [k, v] : extra) env[k] = v;
  return env;
}

SurfaceProgram expand_indices(const SurfaceProgram& prog, const ConstEnv& extra) {
  const Families f = families_of(prog, extra);
  SurfaceProgram out = prog;
  out.roles.clear();
  out.vars.clear();
  for (const auto& r : prog.roles) {
    if (!r.lo) {
      out.roles.push_back(r);
      continue;
    }
    const IntRange& range = f.roles.at(r.name);
    for (std::int64_t k = range.lo; k <= range.hi; ++k) out.roles.push_back({r.name + std::to_string(k), {}, {}, r.pos});
  }
  std::set<std::string> plain_vars;
  for (const auto& v : prog.vars) {
    if (!v.family_lo) {
      plain_vars.insert(v.name);
      out.vars.push_back(v);
      continue;
    }
    const IntRange& range = f.vars.at(v.name);
    auto owner_family = f.roles.find(v.owner);
    if (owner_family != f.roles.end() && !(owner_family->second == range))
      throw Error(ErrorCode::UnsupportedSugar, "family " + v.name + " and its owner " + v.owner + " differ in size" + where(v.pos), v.pos);
    for (std::int64_t k = range.lo; k <= range.hi; ++k) {
      s::VarDecl n = v;
      n.name = v.name + std::to_string(k);
      n.family_lo.reset();
      n.family_hi.reset();
      if (owner_family != f.roles.end()) n.owner = v.owner + std::to_string(k);
      plain_vars.insert(n.name);
      out.vars.push_back(std::move(n));
    }
    out.flattened[v.name] = range;
  }
  IndexExpander ex(f, plain_vars);
  for (auto& d : out.definitions) d.body = ex.term(d.body);
  return out;
}

namespace {

class ForeachExpander {
 public:
  explicit ForeachExpander(const Families& f) : f_(f) {}

  s::TermPtr term(const s::TermPtr& t) {
    if (const auto* in = std::get_if<s::Interaction>(&t->node)) {
      s::Interaction n = *in;
      for (auto& b : n.branches) {
        b.update = updates(b.update, {});
        b.cont = term(b.cont);
      }
      return make({std::move(n), t->pos});
    }
    if (const auto* c = std::get_if<s::Conditional>(&t->node)) {
      s::Conditional n = *c;
      n.then_body = term(c->then_body);
      n.else_body = term(c->else_body);
      return make({std::move(n), t->pos});
    }
    if (const auto* a = std::get_if<s::AllSynch>(&t->node)) {
      s::AllSynch n = *a;
      for (auto& e : n.entries) e.update = updates(e.update, {});
      n.cont = term(a->cont);
      return make({std::move(n), t->pos});
    }
    return t;
  }

 private:
  std::vector<s::Update> updates(const std::vector<s::Update>& us, const Bindings& b) {
    std::vector<s::Update> out;
    for (const auto& u : subst_updates(us, b, f_)) {
      if (u.kind == s::Update::Kind::Assign) {
        if (u.index)
          throw Error(ErrorCode::NonStaticIndex, "index " + to_source(*u.index) + " of " + u.target + " is not static" + where(u.pos), u.pos);
        check_static(u.value, u.pos);
        out.push_back(u);
        continue;
      }
      IntRange range;
      if (u.lo) {
        range = {static_index(*u.lo, u), static_index(*u.hi, u)};
      } else {
        std::vector<std::pair<std::string, const Expr*>> refs;
        update_refs(u.body, refs);
        auto r = family_of(u.var, refs, f_, u.pos);
        if (!r) throw Error(ErrorCode::NonStaticIndex, "foreach over '" + u.var + "' indexes no family" + where(u.pos), u.pos);
        range = *r;
      }
      for (std::int64_t k = range.lo; k <= range.hi; ++k) {
        Bindings inner = b;
        inner[u.var] = k;
        if (u.pred) {
          ConstEnv env = f_.consts;
          for (const auto& [name, v] : inner) env[name] = static_cast<double>(v);
          for (const auto& n : names_in(*u.pred))
            if (!env.count(n))
              throw Error(ErrorCode::NonStaticIndex, "foreach condition reads '" + n + "', which is not static" + where(u.pos), u.pos);
          if (!eval_guard(*u.pred, VarSpace{}, State{}, env)) continue;
        }
        for (auto& item : updates(u.body, inner)) out.push_back(std::move(item));
      }
    }
    return out;
  }

  std::int64_t static_index(const Expr& e, const s::Update& u) {
    for (const auto& n : names_in(e))
      if (!f_.consts.count(n))
        throw Error(ErrorCode::NonStaticIndex, "foreach bound reads '" + n + "', which is not static" + where(u.pos), u.pos);
    return static_int(e, f_.consts, "foreach bound");
  }

  void check_static(const Expr& e, SourcePos pos) {
    if (const auto* v = std::get_if<Expr::Var>(&e.node)) {
      if (v->index) throw Error(ErrorCode::NonStaticIndex, "index of " + v->name + " is not static" + where(pos), pos);
    } else if (const auto* ap = std::get_if<Expr::Apply>(&e.node)) {
      for (const auto& a : ap->args) check_static(a, pos);
    }
  }

  const Families& f_;
};

}  // namespace

SurfaceProgram expand_foreach(const SurfaceProgram& prog, const ConstEnv& extra) {
  const Families f = families_of(prog, extra);
  SurfaceProgram out = prog;
  ForeachExpander ex(f);
  for (auto& d : out.definitions) d.body = ex.term(d.body);
  return out;
}

namespace {

bool is_one(const Expr& e) {
  const auto* lit = std::get_if<Expr::Literal>(&e.node);
  if (!lit) return false;
  if (const auto* i = std::get_if<std::int64_t>(&lit->value)) return *i == 1;
  if (const auto* d = std::get_if<double>(&lit->value)) return *d == 1.0;
  return false;
}

Expr times(const Expr& a, const Expr& b) {
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  const auto* la = std::get_if<Expr::Literal>(&a.node);
  const auto* lb = std::get_if<Expr::Literal>(&b.node);
  if (la && lb) {
    const auto* ia = std::get_if<std::int64_t>(&la->value);
    const auto* ib = std::get_if<std::int64_t>(&lb->value);
    if (ia && ib) return Expr::integer(*ia * *ib);
    const auto num = [](const Expr::Literal& l) -> std::optional<double> {
      if (const auto* i = std::get_if<std::int64_t>(&l.value)) return static_cast<double>(*i);
      if (const auto* d = std::get_if<double>(&l.value)) return *d;
      return std::nullopt;
    };
    if (auto x = num(*la), y = num(*lb); x && y) return Expr::real(*x * *y);
  }
  return Expr::apply(Op::Mul, {a, b});
}

bool is_true(const Expr& e) {
  const auto* lit = std::get_if<Expr::Literal>(&e.node);
  return lit && std::holds_alternative<bool>(lit->value) && std::get<bool>(lit->value);
}

class SynchExpander {
 public:
  s::TermPtr term(const s::TermPtr& t) {
    if (const auto* in = std::get_if<s::Interaction>(&t->node)) {
      s::Interaction n = *in;
      for (auto& b : n.branches) b.cont = term(b.cont);
      return make({std::move(n), t->pos});
    }
    if (const auto* c = std::get_if<s::Conditional>(&t->node)) {
      s::Conditional n = *c;
      n.then_body = term(c->then_body);
      n.else_body = term(c->else_body);
      return make({std::move(n), t->pos});
    }
    if (const auto* a = std::get_if<s::AllSynch>(&t->node)) return expand(*a, t->pos);
    return t;
  }

 private:
  struct Group {
    s::RoleRef role;
    std::vector<const s::SynchEntry*> alts;
  };

  s::TermPtr expand(const s::AllSynch& a, SourcePos pos) {
    std::vector<Group> groups;
    for (const auto& e : a.entries) {
      if (e.role.index)
        throw Error(ErrorCode::NonStaticIndex, "allsynch role index is not static" + where(e.pos), e.pos);
      auto g = std::find_if(groups.begin(), groups.end(), [&](const Group& x) { return x.role.name == e.role.name; });
      if (g == groups.end()) groups.push_back({e.role, {&e}});
      else g->alts.push_back(&e);
    }
    if (groups.size() < 2)
      throw Error(ErrorCode::UnsupportedSugar, "allsynch needs at least two distinct roles" + where(pos), pos);
    groups_ = &groups;
    label_ = a.label;
    counter_ = 0;
    pos_ = pos;
    cont_ = term(a.cont);
    return level(0, {});
  }

  s::TermPtr level(std::size_t depth, std::vector<const s::SynchEntry*> chosen) {
    const auto& groups = *groups_;
    if (depth == groups.size()) return combine(chosen);
    const Group& g = groups[depth];
    // Alternatives in source order: if g1 then .. else (if g2 then .. else 0).
    s::TermPtr result = make({s::Inact{}, pos_});
    for (std::size_t i = g.alts.size(); i-- > 0;) {
      auto pick = chosen;
      pick.push_back(g.alts[i]);
      s::TermPtr taken = level(depth + 1, pick);
      if (is_true(g.alts[i]->guard)) {
        result = taken;
      } else {
        result = make({s::Conditional{g.alts[i]->guard, g.role, taken, result}, pos_});
      }
    }
    return result;
  }

  s::TermPtr combine(const std::vector<const s::SynchEntry*>& chosen) {
    s::Interaction in;
    const auto& groups = *groups_;
    in.initiator = groups[0].role;
    for (std::size_t i = 1; i < groups.size(); ++i) in.receivers.push_back(groups[i].role);
    if (label_) in.label = *label_ + "_" + std::to_string(++counter_);
    s::Branch b;
    b.weight = chosen[0]->weight;
    for (std::size_t i = 1; i < chosen.size(); ++i) b.weight = times(b.weight, chosen[i]->weight);
    for (const auto* e : chosen) b.update.insert(b.update.end(), e->update.begin(), e->update.end());
    b.cont = cont_;
    b.pos = chosen[0]->pos;
    in.branches.push_back(std::move(b));
    return make({std::move(in), pos_});
  }

  const std::vector<Group>* groups_ = nullptr;
  std::optional<std::string> label_;
  int counter_ = 0;
  SourcePos pos_;
  s::TermPtr cont_;
};

}  // namespace

SurfaceProgram desugar_allsynch(const SurfaceProgram& prog) {
  SurfaceProgram out = prog;
  for (auto& d : out.definitions) d.body = SynchExpander().term(d.body);
  return out;
}

namespace {

[[noreturn]] void leftover(const std::string& what, SourcePos pos) {
  throw Error(ErrorCode::UnsupportedSugar, what + " left after desugaring" + where(pos), pos);
}

std::string lower_role(const s::RoleRef& r) {
  if (r.index) leftover("indexed role " + r.name, r.pos);
  return r.name;
}

void check_plain(const Expr& e, SourcePos pos) {
  if (const auto* v = std::get_if<Expr::Var>(&e.node)) {
    if (v->index) leftover("indexed name " + to_source(e), pos);
  } else if (const auto* ap = std::get_if<Expr::Apply>(&e.node)) {
    for (const auto& a : ap->args) check_plain(a, pos);
  }
}

UpdateList lower_updates(const std::vector<s::Update>& us) {
  UpdateList out;
  for (const auto& u : us) {
    if (u.kind == s::Update::Kind::Foreach) leftover("foreach", u.pos);
    if (u.index) leftover("indexed update of " + u.target, u.pos);
    check_plain(u.value, u.pos);
    out.push_back({u.target, u.value});
  }
  return out;
}

chorprism::TermPtr lower_term(const s::TermPtr& t) {
  if (const auto* in = std::get_if<s::Interaction>(&t->node)) {
    Interaction n;
    n.label = in->label;
    n.initiator = lower_role(in->initiator);
    for (const auto& r : in->receivers) n.receivers.push_back(lower_role(r));
    for (const auto& b : in->branches) {
      check_plain(b.weight, b.pos);
      n.branches.push_back({b.label, b.weight, lower_updates(b.update), lower_term(b.cont)});
    }
    return make_term(std::move(n));
  }
  if (const auto* c = std::get_if<s::Conditional>(&t->node)) {
    check_plain(c->guard, t->pos);
    return make_term(Conditional{c->guard, lower_role(c->at), lower_term(c->then_body), lower_term(c->else_body)});
  }
  if (const auto* x = std::get_if<s::Call>(&t->node)) return call(x->name);
  if (std::holds_alternative<s::AllSynch>(t->node)) leftover("allsynch", t->pos);
  return inact();
}

}  // namespace

ChorProgram lower(const SurfaceProgram& prog, const ConstEnv& extra) {
  ChorProgram out;
  out.kind = prog.kind;
  const ConstEnv consts = surface_consts(prog, extra);
  for (const auto& c : prog.constants) {
    auto it = consts.find(c.name);
    out.constants.push_back({c.name, it == consts.end() ? std::nullopt : std::optional<double>(it->second)});
  }
  for (const auto& [k, v] : extra)
    if (std::none_of(prog.constants.begin(), prog.constants.end(), [&](const auto& c) { return c.name == k; }))
      out.constants.push_back({k, v});
  for (const auto& r : prog.roles) {
    if (r.lo) leftover("role family " + r.name, r.pos);
    out.roles.push_back(r.name);
  }
  for (const auto& v : prog.vars) {
    if (v.family_lo) leftover("variable family " + v.name, v.pos);
    VarDecl d;
    d.name = v.name;
    d.owner = v.owner;
    if (v.is_bool) {
      d.type = BoolType{};
      d.init = v.init ? eval(*v.init, VarSpace{}, State{}, consts) : Value{false};
    } else {
      IntRange r{static_int(v.lo, consts, "range bound of " + v.name), static_int(v.hi, consts, "range bound of " + v.name)};
      d.type = r;
      d.init = v.init ? eval(*v.init, VarSpace{}, State{}, consts) : Value{r.lo};
    }
    out.vars.push_back(std::move(d));
  }
  for (const auto& d : prog.definitions) out.definitions.push_back({d.name, lower_term(d.body)});
  out.main = prog.main;
  return out;
}

namespace {

void collect_labels(const ChorTerm& t, std::set<std::string>& used) {
  if (const auto* in = std::get_if<Interaction>(&t.node)) {
    if (in->label) used.insert(*in->label);
    for (const auto& b : in->branches) {
      if (b.label) used.insert(*b.label);
      collect_labels(*b.cont, used);
    }
  } else if (const auto* c = std::get_if<Conditional>(&t.node)) {
    collect_labels(*c->then_body, used);
    collect_labels(*c->else_body, used);
  }
}

class Annotator {
 public:
  Annotator(AnnotationScheme scheme, std::uint64_t seed, std::set<std::string> used)
      : scheme_(scheme), rng_(seed), used_(std::move(used)) {}

  chorprism::TermPtr term(const chorprism::TermPtr& t) {
    if (const auto* in = std::get_if<Interaction>(&t->node)) {
      ++count_;
      Interaction n = *in;
      if (!n.label) n.label = fresh_interaction();
      for (std::size_t j = 0; j < n.branches.size(); ++j) {
        auto& b = n.branches[j];
        if (!b.label) b.label = fresh_branch(*n.label, j + 1);
        b.cont = term(b.cont);
      }
      return make_term(std::move(n));
    }
    if (const auto* c = std::get_if<Conditional>(&t->node)) {
      return make_term(Conditional{c->guard, c->at, term(c->then_body), term(c->else_body)});
    }
    return t;
  }

 private:
  std::string claim(std::string label) {
    used_.insert(label);
    return label;
  }

  std::string random_label() {
    std::uniform_int_distribution<int> letter(0, 25);
    for (;;) {
      std::string s;
      for (int i = 0; i < 5; ++i) s += static_cast<char>('A' + letter(rng_));
      if (!used_.count(s)) return claim(s);
    }
  }

  std::string fresh_interaction() {
    if (scheme_ == AnnotationScheme::SeededRandom) return random_label();
    std::size_t k = count_;
    while (used_.count("A" + std::to_string(k))) ++k;
    return claim("A" + std::to_string(k));
  }

  std::string fresh_branch(const std::string& base, std::size_t j) {
    if (scheme_ == AnnotationScheme::SeededRandom) return random_label();
    std::string l = base + "_" + std::to_string(j);
    while (used_.count(l)) l += "_";
    return claim(l);
  }

  AnnotationScheme scheme_;
  std::mt19937_64 rng_;
  std::set<std::string> used_;
  std::size_t count_ = 0;
};

}  // namespace

ChorProgram auto_annotate(const ChorProgram& prog, AnnotationScheme scheme, std::uint64_t seed) {
  std::set<std::string> used;
  for (const auto& d : prog.definitions) collect_labels(*d.body, used);
  Annotator a(scheme, seed, std::move(used));
  ChorProgram out = prog;
  for (auto& d : out.definitions) d.body = a.term(d.body);
  return out;
}

ChorProgram load_program(std::string_view text, const FrontendOptions& opts) {
  SurfaceProgram sp = parse(text);
  if (opts.kind) sp.kind = *opts.kind;
  sp = expand_indices(sp, opts.consts);
  sp = expand_foreach(sp, opts.consts);
  sp = desugar_allsynch(sp);
  return auto_annotate(lower(sp, opts.consts), opts.scheme, opts.seed);
}

ChorProgram load_program_file(const std::string& path, const FrontendOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_program(buf.str(), opts);
}

}  // namespace chorprism
