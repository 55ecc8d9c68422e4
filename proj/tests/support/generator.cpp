#include "generator.hpp"

#include <algorithm>
#include <set>

#include "chorprism/analysis.hpp"
#include "chorprism/frontend.hpp"

namespace chorprism::testing {

namespace {

struct Builder {
  std::mt19937_64& rng;
  const GeneratorBounds& b;
  ModelKind kind;
  std::vector<std::string> roles;
  std::vector<std::string> defs;

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng); }

  std::string var_of(const std::string& role) { return "v_" + role; }

  Expr update_value(const std::string& var) {
    switch (uniform(0, 3)) {
      case 0: return Expr::integer(uniform(0, static_cast<int>(b.var_hi)));
      case 1:
        return Expr::apply(Op::Min, {Expr::apply(Op::Add, {Expr::var(var), Expr::integer(1)}), Expr::integer(b.var_hi)});
      case 2:
        return Expr::apply(Op::Max, {Expr::apply(Op::Sub, {Expr::var(var), Expr::integer(1)}), Expr::integer(0)});
      default:
        return Expr::apply(Op::Mod, {Expr::apply(Op::Add, {Expr::var(var), Expr::integer(2)}),
                                     Expr::integer(b.var_hi + 1)});
    }
  }

  std::vector<Expr> weights(int n) {
    std::vector<Expr> out;
    if (kind == ModelKind::Ctmc) {
      for (int i = 0; i < n; ++i)
        out.push_back(chance(0.3) ? Expr::var("lam") : Expr::integer(uniform(1, 4)));
      return out;
    }
    if (n == 1) return {Expr::integer(1)};
    static const double splits[] = {0.5, 0.25, 0.4, 0.7};
    const double p = splits[uniform(0, 3)];
    return {Expr::real(p), Expr::real(1.0 - p)};
  }

  TermPtr leaf() {
    if (chance(0.65)) return call(defs[static_cast<std::size_t>(uniform(0, static_cast<int>(defs.size()) - 1))]);
    return inact();
  }

  // `link`: roles of the enclosing step; the next action must involve one.
  TermPtr term(int depth, const std::vector<std::string>& link) {
    if (depth >= b.max_depth || (!link.empty() && chance(0.3))) return leaf();
    std::vector<std::string> pool = roles;
    std::shuffle(pool.begin(), pool.end(), rng);
    if (!link.empty()) {
      const std::string anchor = link[static_cast<std::size_t>(uniform(0, static_cast<int>(link.size()) - 1))];
      pool.erase(std::find(pool.begin(), pool.end(), anchor));
      pool.insert(pool.begin(), anchor);
    }
    if (!link.empty() && chance(0.2)) {
      const std::string at = pool.front();
      const Expr guard = Expr::apply(chance(0.5) ? Op::Lt : Op::Eq,
                                     {Expr::var(var_of(at)), Expr::integer(uniform(0, static_cast<int>(b.var_hi)))});
      return make_term(Conditional{guard, at, term(depth + 1, {at}), term(depth + 1, {at})});
    }
    const int parts = uniform(2, static_cast<int>(pool.size()));
    std::vector<std::string> who(pool.begin(), pool.begin() + parts);
    std::shuffle(who.begin(), who.end(), rng);
    Interaction in;
    in.initiator = who.front();
    in.receivers.assign(who.begin() + 1, who.end());
    const int n = uniform(1, b.max_branches);
    const auto ws = weights(n);
    for (int j = 0; j < n; ++j) {
      Branch br;
      br.weight = ws[static_cast<std::size_t>(j)];
      for (const auto& r : who)
        if (chance(0.5)) br.update.push_back({var_of(r), update_value(var_of(r))});
      br.cont = term(depth + 1, who);
      in.branches.push_back(std::move(br));
    }
    return make_term(std::move(in));
  }
};

}  // namespace

ChorProgram ProgramGenerator::candidate(ModelKind kind) {
  Builder bl{rng_, bounds_, kind, {}, {}};
  const int nroles = bl.uniform(2, bounds_.max_roles);
  for (int i = 0; i < nroles; ++i) bl.roles.push_back("r" + std::to_string(i));
  const int ndefs = bl.uniform(1, bounds_.max_definitions);
  for (int i = 0; i < ndefs; ++i) bl.defs.push_back("D" + std::to_string(i));

  ChorProgram p;
  p.kind = kind;
  if (kind == ModelKind::Ctmc) p.constants.push_back({"lam", 1.5});
  p.roles = bl.roles;
  for (const auto& r : bl.roles)
    p.vars.push_back({bl.var_of(r), r, IntRange{0, bounds_.var_hi}, std::int64_t{bl.uniform(0, static_cast<int>(bounds_.var_hi))}});
  for (const auto& d : bl.defs) {
    TermPtr body;
    do body = bl.term(0, {});
    while (!std::holds_alternative<Interaction>(body->node));
    p.definitions.push_back({d, body});
  }
  p.main = bl.defs.front();
  return auto_annotate(p);
}

ChorProgram ProgramGenerator::next(ModelKind kind) {
  for (;;) {
    ChorProgram p = candidate(kind);
    try {
      if (check_well_formed(p).empty() && s_conn_violations(p).empty()) return p;
    } catch (const Error&) {
    }
    ++rejected_;
  }
}

}  // namespace chorprism::testing
