#include "chorprism/projection.hpp"

#include <algorithm>
#include <deque>
#include <iterator>
#include <set>
#include <tuple>

#include "chorprism/analysis.hpp"
#include "chorprism/semantics.hpp"

namespace chorprism {

std::string_view to_string(ProjectionStyle style) {
  return style == ProjectionStyle::Formal ? "formal" : "folded";
}

namespace {

std::string branch_label(const Interaction& in, std::size_t j) {
  if (in.branches[j].label) return *in.branches[j].label;
  return in.label.value_or("") + "_" + std::to_string(j + 1);
}

Expr counter_is(const std::string& s, int v) { return Expr::apply(Op::Eq, {Expr::var(s), Expr::integer(v)}); }

Weight weight_of(const Expr& w, const ConstEnv& consts) {
  Weight out = Weight::of(eval_weight(w, consts));
  if (!names_in(w).empty()) out.symbolic = w;
  return out;
}

bool involves(const ChorTerm& t, const std::string& role) {
  if (const auto* in = std::get_if<Interaction>(&t.node))
    return in->initiator == role || std::count(in->receivers.begin(), in->receivers.end(), role) > 0;
  if (const auto* c = std::get_if<Conditional>(&t.node)) return c->at == role;
  return false;
}

std::vector<TermPtr> children(const ChorTerm& t) {
  std::vector<TermPtr> out;
  if (const auto* in = std::get_if<Interaction>(&t.node))
    for (const auto& b : in->branches) out.push_back(b.cont);
  if (const auto* c = std::get_if<Conditional>(&t.node)) out = {c->then_body, c->else_body};
  return out;
}

// main first, then the remaining definitions in source order
std::vector<const Definition*> definition_order(const ChorProgram& prog) {
  std::vector<const Definition*> out;
  if (const auto* m = prog.find_definition(prog.main)) out.push_back(m);
  for (const auto& d : prog.definitions)
    if (d.name != prog.main) out.push_back(&d);
  return out;
}

std::string fresh_counter_name(const std::string& role, const std::set<std::string>& taken) {
  std::string name = role + "_STATE";
  while (taken.count(name)) name += "_";
  return name;
}

// ---- formal style ----------------------------------------------------------

struct FormalProjector {
  const std::string& role;
  const ProjectionContext& ctx;
  const ChorProgram& prog;
  const std::string& s;
  std::vector<PrismCommand> out;

  UpdateList with_counter(const UpdateList& u, int target) const {
    UpdateList r = proj_update(u, role, prog);
    r.push_back({s, Expr::integer(target)});
    return r;
  }

  void run(const ChorTerm& t, int iota) {
    if (const auto* in = std::get_if<Interaction>(&t.node)) {
      interaction(*in, iota);
    } else if (const auto* c = std::get_if<Conditional>(&t.node)) {
      const int n1 = nodes(*c->then_body, ctx.kind);
      if (c->at == role) {
        const Expr here = counter_is(s, iota);
        out.push_back({std::nullopt, Expr::apply(Op::And, {here, c->guard}),
                       {{Weight::of(1), {{s, Expr::integer(iota + 1)}}}}});
        out.push_back({std::nullopt, Expr::apply(Op::And, {here, Expr::apply(Op::Not, {c->guard})}),
                       {{Weight::of(1), {{s, Expr::integer(iota + n1 + 1)}}}}});
        run(*c->then_body, iota + 1);
        run(*c->else_body, iota + n1 + 1);
      } else {
        run(*c->then_body, iota);
        run(*c->else_body, iota + n1);
      }
    } else if (const auto* call = std::get_if<Call>(&t.node)) {
      out.push_back({std::nullopt, counter_is(s, iota), {{Weight::of(1), {{s, Expr::integer(ctx.defs_start.at(call->name))}}}}});
    }
  }

  void interaction(const Interaction& in, int iota) {
    const bool initiator = in.initiator == role;
    const bool receiver = std::count(in.receivers.begin(), in.receivers.end(), role) > 0;
    const std::size_t m = in.branches.size();
    if (!initiator && !receiver) {
      int off = 0;
      for (const auto& b : in.branches) {
        run(*b.cont, iota + off);
        off += nodes(*b.cont, ctx.kind);
      }
      return;
    }
    const bool dtmc = ctx.kind == ModelKind::Dtmc;
    if (dtmc && initiator) {
      PrismCommand choice{std::nullopt, counter_is(s, iota), {}};
      for (std::size_t j = 0; j < m; ++j)
        choice.branches.push_back({weight_of(in.branches[j].weight, ctx.consts), {{s, Expr::integer(iota + 1 + static_cast<int>(j))}}});
      out.push_back(std::move(choice));
    }
    int base = iota + 1 + (dtmc ? static_cast<int>(m) : 0);
    for (std::size_t j = 0; j < m; ++j) {
      const Branch& b = in.branches[j];
      PrismCommand cmd;
      cmd.label = branch_label(in, j);
      if (dtmc) {
        cmd.guard = counter_is(s, initiator ? iota + 1 + static_cast<int>(j) : iota);
        cmd.branches.push_back({Weight::of(1), with_counter(b.update, base)});
      } else {
        cmd.guard = counter_is(s, iota);
        cmd.branches.push_back({initiator ? weight_of(b.weight, ctx.consts) : Weight::of(1), with_counter(b.update, base)});
      }
      out.push_back(std::move(cmd));
      run(*b.cont, base);
      base += nodes(*b.cont, ctx.kind);
    }
  }
};

// ---- folded style ----------------------------------------------------------

// Counter values one role can hold at each of its action points.
struct RoleFlow {
  struct Site {
    std::vector<int> mids;     // DTMC initiator: one per branch
    std::vector<int> targets;  // one per continuation
  };
  std::vector<const ChorTerm*> order;  // preorder of the role's action points
  std::map<const ChorTerm*, Site> sites;
  std::map<const ChorTerm*, std::set<int>> entry;
  std::map<const ChorTerm*, std::set<int>> stale;  // values that passed other roles' steps
  int max_value = 0;

  bool current(const ChorTerm* t) const {
    auto it = stale.find(t);
    return it == stale.end() || it->second.empty();
  }
};

RoleFlow analyse_role(const std::string& role, const ChorProgram& prog, const std::map<std::string, int>& defval) {
  RoleFlow flow;
  int next = static_cast<int>(defval.size());
  int done = -1;
  auto target_of = [&](const TermPtr& c) {
    if (const auto* call = std::get_if<Call>(&c->node)) return defval.at(call->name);
    if (std::holds_alternative<Inact>(c->node)) {
      if (done < 0) done = next++;
      return done;
    }
    return next++;
  };

  std::set<const ChorTerm*> seen;
  auto allocate = [&](auto&& self, const TermPtr& t) -> void {
    if (!seen.insert(t.get()).second) return;
    if (involves(*t, role)) {
      RoleFlow::Site site;
      const auto* in = std::get_if<Interaction>(&t->node);
      if (in && prog.kind == ModelKind::Dtmc && in->initiator == role)
        for (std::size_t j = 0; j < in->branches.size(); ++j) site.mids.push_back(next++);
      for (const auto& c : children(*t)) site.targets.push_back(target_of(c));
      flow.order.push_back(t.get());
      flow.sites.emplace(t.get(), std::move(site));
    }
    for (const auto& c : children(*t)) self(self, c);
  };
  for (const auto* d : definition_order(prog)) allocate(allocate, d->body);

  // Propagate entry values; a role's counter is unchanged by steps it does
  // not take part in, so such steps pass values on (marked stale).
  std::set<std::tuple<const ChorTerm*, int, bool>> visited;
  std::deque<std::tuple<TermPtr, int, bool>> work;
  work.emplace_back(prog.find_definition(prog.main)->body, defval.at(prog.main), false);
  while (!work.empty()) {
    auto [t, v, is_stale] = work.front();
    work.pop_front();
    if (!visited.emplace(t.get(), v, is_stale).second) continue;
    if (const auto* call = std::get_if<Call>(&t->node)) {
      work.emplace_back(prog.find_definition(call->name)->body, v, is_stale);
    } else if (involves(*t, role)) {
      auto& e = flow.entry[t.get()];
      const bool first = e.empty();
      e.insert(v);
      if (is_stale) flow.stale[t.get()].insert(v);
      if (first) {
        const auto kids = children(*t);
        const auto& targets = flow.sites.at(t.get()).targets;
        for (std::size_t j = 0; j < kids.size(); ++j) work.emplace_back(kids[j], targets[j], false);
      }
    } else {
      for (const auto& c : children(*t)) work.emplace_back(c, v, true);
    }
  }
  flow.max_value = std::max(0, next - 1);
  return flow;
}

Expr entry_guard(const std::string& s, const std::set<int>& values) {
  std::optional<Expr> out;
  for (int v : values) out = out ? Expr::apply(Op::Or, {*out, counter_is(s, v)}) : counter_is(s, v);
  return *out;
}

std::vector<std::string> participants(const Interaction& in) {
  std::vector<std::string> out{in.initiator};
  out.insert(out.end(), in.receivers.begin(), in.receivers.end());
  return out;
}

// Per-role guards cannot say "these values together". A synchronised step
// is therefore split so that exactly one participant is pinned: variant k
// puts participant k on a value that reached t directly, every earlier
// participant on a value that came through steps it did not take, and
// leaves the later ones free.
struct Variant {
  std::size_t pinned = 0;
  std::vector<std::set<int>> values;  // one per participant
};

std::vector<Variant> variants_of(const ChorTerm* t, const std::vector<std::string>& parts,
                                 const std::map<std::string, RoleFlow>& flows) {
  std::vector<Variant> out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    Variant v{k, {}};
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const RoleFlow& f = flows.at(parts[i]);
      auto e = f.entry.find(t);
      if (e == f.entry.end()) return {};
      auto st = f.stale.find(t);
      const std::set<int> stale = st == f.stale.end() ? std::set<int>{} : st->second;
      std::set<int> vals;
      if (i < k) {
        vals = stale;
      } else if (i == k) {
        std::set_difference(e->second.begin(), e->second.end(), stale.begin(), stale.end(),
                            std::inserter(vals, vals.end()));
      } else {
        vals = e->second;
      }
      if (vals.empty()) break;
      v.values.push_back(std::move(vals));
    }
    if (v.values.size() == parts.size()) out.push_back(std::move(v));
  }
  return out;
}

struct FoldedPlan {
  std::map<std::string, RoleFlow> flows;
  std::map<std::pair<std::string, std::string>, std::string> variant_label;  // (label, pinned role)

  std::string label(const std::string& base, const std::vector<Variant>& vs, const std::string& pinned) const {
    return vs.size() == 1 ? base : variant_label.at({base, pinned});
  }
};

void name_variants(FoldedPlan& plan, const ChorProgram& prog, const ProjectionContext& ctx) {
  std::set<std::string> taken;
  for (const auto& [a, ls] : ctx.label_map) {
    taken.insert(a);
    taken.insert(ls.begin(), ls.end());
  }
  auto name = [&](const std::string& base, const std::string& role) {
    if (plan.variant_label.count({base, role})) return;
    std::string n = base + "_" + role;
    while (taken.count(n)) n += "_";
    taken.insert(n);
    plan.variant_label[{base, role}] = n;
  };
  std::set<const ChorTerm*> seen;
  auto walk = [&](auto&& self, const ChorTerm& t) -> void {
    if (!seen.insert(&t).second) return;
    if (const auto* in = std::get_if<Interaction>(&t.node)) {
      const auto parts = participants(*in);
      const auto vs = variants_of(&t, parts, plan.flows);
      if (vs.size() > 1)
        for (const auto& v : vs) {
          name(in->label.value_or(""), parts[v.pinned]);
          for (std::size_t j = 0; j < in->branches.size(); ++j) name(branch_label(*in, j), parts[v.pinned]);
        }
    }
    for (const auto& c : children(t)) self(self, *c);
  };
  for (const auto* d : definition_order(prog)) walk(walk, *d->body);
}

std::vector<PrismCommand> folded_commands(const std::string& role, const ChorProgram& prog,
                                          const ProjectionContext& ctx, const FoldedPlan& plan) {
  const RoleFlow& flow = plan.flows.at(role);
  const std::string& s = ctx.counter_var.at(role);
  const bool dtmc = ctx.kind == ModelKind::Dtmc;
  std::vector<PrismCommand> out;
  auto with_counter = [&](const UpdateList& u, int target) {
    UpdateList r = proj_update(u, role, prog);
    r.push_back({s, Expr::integer(target)});
    return r;
  };
  for (const ChorTerm* t : flow.order) {
    auto eit = flow.entry.find(t);
    if (eit == flow.entry.end()) continue;  // unreachable for this role
    const Expr guard = entry_guard(s, eit->second);
    const RoleFlow::Site& site = flow.sites.at(t);
    if (const auto* c = std::get_if<Conditional>(&t->node)) {
      out.push_back({std::nullopt, Expr::apply(Op::And, {guard, c->guard}),
                     {{Weight::of(1), {{s, Expr::integer(site.targets[0])}}}}});
      out.push_back({std::nullopt, Expr::apply(Op::And, {guard, Expr::apply(Op::Not, {c->guard})}),
                     {{Weight::of(1), {{s, Expr::integer(site.targets[1])}}}}});
      continue;
    }
    const auto& in = std::get<Interaction>(t->node);
    const bool initiator = in.initiator == role;
    const std::size_t m = in.branches.size();
    const auto parts = participants(in);
    const std::size_t me = static_cast<std::size_t>(std::find(parts.begin(), parts.end(), role) - parts.begin());
    const auto vs = variants_of(t, parts, plan.flows);
    if (!dtmc) {
      for (const auto& v : vs)
        for (std::size_t j = 0; j < m; ++j) {
          const Branch& b = in.branches[j];
          out.push_back({plan.label(branch_label(in, j), vs, parts[v.pinned]), entry_guard(s, v.values[me]),
                         {{initiator ? weight_of(b.weight, ctx.consts) : Weight::of(1),
                           with_counter(b.update, site.targets[j])}}});
        }
      continue;
    }
    // An initiator that always knows it is here chooses on its own; otherwise
    // the choice synchronises with the receivers. Either way the initiator
    // then sits on a value private to the chosen branch.
    if (flow.current(t) && initiator) {
      PrismCommand choice{std::nullopt, guard, {}};
      for (std::size_t j = 0; j < m; ++j)
        choice.branches.push_back({weight_of(in.branches[j].weight, ctx.consts), {{s, Expr::integer(site.mids[j])}}});
      out.push_back(std::move(choice));
    } else if (!plan.flows.at(in.initiator).current(t)) {
      for (const auto& v : vs) {
        const std::string a = plan.label(in.label.value_or(""), vs, parts[v.pinned]);
        if (initiator) {
          PrismCommand choice{a, entry_guard(s, v.values[me]), {}};
          for (std::size_t j = 0; j < m; ++j)
            choice.branches.push_back(
                {weight_of(in.branches[j].weight, ctx.consts), {{s, Expr::integer(site.mids[j])}}});
          out.push_back(std::move(choice));
        } else {
          out.push_back({a, entry_guard(s, v.values[me]), {{Weight::of(1), {}}}});
        }
      }
    }
    if (vs.empty()) continue;
    for (std::size_t j = 0; j < m; ++j) {
      const Branch& b = in.branches[j];
      out.push_back({branch_label(in, j), initiator ? counter_is(s, site.mids[j]) : guard,
                     {{Weight::of(1), with_counter(b.update, site.targets[j])}}});
    }
  }
  return out;
}

void check_counter_range(const PrismModule& m, const std::string& s, int max) {
  for (const auto& c : m.commands)
    for (const auto& b : c.branches)
      for (const auto& a : b.update) {
        if (a.target != s) continue;
        const auto* lit = std::get_if<Expr::Literal>(&a.value.node);
        const auto* v = lit ? std::get_if<std::int64_t>(&lit->value) : nullptr;
        if (!v || *v < 0 || *v > max)
          throw Error(ErrorCode::CounterOverflow, "counter " + s + " assigned " + to_source(a.value) +
                                                      " outside [0.." + std::to_string(max) + "]");
      }
}

void inject(std::vector<PrismModule>& modules, ProjectionContext& ctx, const std::vector<std::string>& roles,
            std::size_t n) {
  std::size_t seen = 0;
  for (std::size_t r = 0; r < modules.size(); ++r) {
    const std::string& s = ctx.counter_var.at(roles[r]);
    for (auto& c : modules[r].commands)
      for (auto& b : c.branches)
        for (auto& a : b.update) {
          if (a.target != s || seen++ != n) continue;
          const auto& lit = std::get<Expr::Literal>(a.value.node);
          const int v = static_cast<int>(std::get<std::int64_t>(lit.value)) + 1;
          a.value = Expr::integer(v);
          int& max = ctx.counter_max[roles[r]];
          if (v > max) {
            max = v;
            std::get<IntRange>(modules[r].locals.front().type).hi = v;
          }
          return;
        }
  }
  throw Error(ErrorCode::InvalidArgument, "fault index " + std::to_string(n) + " exceeds the " + std::to_string(seen) +
                                              " counter assignments");
}

}  // namespace

ProjectionContext alloc_defs(const ChorProgram& prog, ProjectionStyle style, const ConstEnv& consts) {
  ProjectionContext ctx;
  ctx.kind = prog.kind;
  ctx.style = style;
  ctx.consts = prog.const_env();
  for (const auto& [k, v] : consts) ctx.consts[k] = v;

  int acc = 0;
  int index = 0;
  for (const auto* d : definition_order(prog)) {
    if (style == ProjectionStyle::Formal) {
      ctx.defs_start[d->name] = acc;
      acc += nodes(*d->body, prog.kind);
    } else {
      ctx.defs_start[d->name] = index++;
    }
  }

  std::set<std::string> taken(prog.roles.begin(), prog.roles.end());
  for (const auto& v : prog.vars) taken.insert(v.name);
  for (const auto& c : prog.constants) taken.insert(c.name);
  for (const auto& r : prog.roles) {
    const std::string name = fresh_counter_name(r, taken);
    taken.insert(name);
    ctx.counter_var[r] = name;
    ctx.counter_max[r] = std::max(0, acc - 1);
  }

  auto collect = [&](auto&& self, const ChorTerm& t) -> void {
    if (const auto* in = std::get_if<Interaction>(&t.node)) {
      auto& labels = ctx.label_map[in->label.value_or("")];
      labels.clear();
      for (std::size_t j = 0; j < in->branches.size(); ++j) labels.push_back(branch_label(*in, j));
    }
    for (const auto& c : children(t)) self(self, *c);
  };
  for (const auto& d : prog.definitions) collect(collect, *d.body);
  return ctx;
}

UpdateList proj_update(const UpdateList& u, const std::string& role, const ChorProgram& prog) {
  UpdateList out;
  for (const auto& a : u) {
    const VarDecl* v = prog.find_var(a.target);
    if (v && v->owner == role) out.push_back(a);
  }
  return out;
}

std::vector<PrismCommand> proj_role(const std::string& role, const ChorTerm& term, int iota,
                                    const ProjectionContext& ctx, const ChorProgram& prog) {
  FormalProjector p{role, ctx, prog, ctx.counter_var.at(role), {}};
  p.run(term, iota);
  return std::move(p.out);
}

Projection project(const ChorProgram& prog, const ProjectOptions& opts) {
  auto diags = check_well_formed(prog, opts.consts);
  if (!diags.empty()) throw Error(ErrorCode::IllFormed, format(diags));
  const AnnotationReport ann = check_annotations(prog);
  if (!ann.ok) throw Error(ErrorCode::DuplicateAnnotation, format(ann.violations));

  Projection proj;
  const auto sconn = s_conn_violations(prog);
  if (!sconn.empty()) {
    if (!opts.override_sconn) throw Error(ErrorCode::NotStronglyConnected, format(sconn));
    proj.warnings = sconn;
  }

  proj.ctx = alloc_defs(prog, opts.style, opts.consts);
  ProjectionContext& ctx = proj.ctx;

  FoldedPlan plan;
  if (opts.style == ProjectionStyle::Folded) {
    for (const auto& r : prog.roles) {
      plan.flows.emplace(r, analyse_role(r, prog, ctx.defs_start));
      ctx.counter_max[r] = plan.flows.at(r).max_value;
    }
    name_variants(plan, prog, ctx);
  }

  for (const auto& r : prog.roles) {
    PrismModule m;
    m.name = r;
    const std::string& s = ctx.counter_var.at(r);
    m.locals.push_back({s, r, IntRange{0, ctx.counter_max.at(r)}, std::int64_t{0}});
    for (const auto& v : prog.vars)
      if (v.owner == r) m.locals.push_back(v);
    if (opts.style == ProjectionStyle::Folded) {
      m.commands = folded_commands(r, prog, ctx, plan);
    } else {
      for (const auto* d : definition_order(prog)) {
        auto cmds = proj_role(r, *d->body, ctx.defs_start.at(d->name), ctx, prog);
        m.commands.insert(m.commands.end(), cmds.begin(), cmds.end());
      }
    }
    check_counter_range(m, s, ctx.counter_max.at(r));
    proj.modules.push_back(std::move(m));
  }

  if (opts.inject_fault) inject(proj.modules, ctx, prog.roles, *opts.inject_fault);
  proj.network = compose(proj.modules);
  return proj;
}

State lift_state(const VarSpace& network_space, const VarSpace& program_space, const State& s,
                 const Projection& proj) {
  std::map<std::string, Value> counters;
  for (const auto& m : proj.modules) counters[m.locals.front().name] = m.locals.front().init;
  State out;
  out.reserve(network_space.size());
  for (const auto& name : network_space.names) {
    if (auto i = program_space.index_of(name)) out.push_back(s[*i]);
    else out.push_back(counters.at(name));
  }
  return out;
}

}  // namespace chorprism
