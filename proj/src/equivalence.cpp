#include "chorprism/equivalence.hpp"

#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "chorprism/prism.hpp"
#include "chorprism/semantics.hpp"

namespace chorprism {

LabeledChain label_chain(const MarkovChain& chain, const VarSpace& observed) {
  LabeledChain out;
  out.kind = chain.kind;
  out.obs_vars = observed;
  out.initial = chain.initial;
  out.transitions = chain.transitions;
  std::vector<std::size_t> pick;
  for (const auto& name : observed.names) {
    auto i = chain.vars.index_of(name);
    if (!i) throw Error(ErrorCode::InvalidArgument, "chain has no variable " + name);
    pick.push_back(*i);
  }
  for (const auto& st : chain.states) {
    State o;
    for (auto i : pick) o.push_back(st.values[i]);
    out.obs.push_back(std::move(o));
    std::string desc = to_string(chain.vars, st.values);
    if (!st.location.empty()) desc += " @ " + st.location;
    out.origin.push_back(std::move(desc));
  }
  return out;
}

namespace {

struct Edge {
  double weight = 0;
  bool silent = true;
};

bool near_one(double w) { return std::abs(w - 1.0) <= kBisimTolerance; }

}  // namespace

namespace {

LabeledChain collapse_once(const LabeledChain& chain) {
  const std::size_t n = chain.size();
  std::vector<std::map<std::size_t, Edge>> out(n);
  for (const auto& t : chain.transitions) {
    Edge& e = out[t.src][t.dst];
    e.weight += t.weight;
    e.silent = e.silent && t.silent;
  }

  // next[v] is set when v is administrative: a single exit to another state
  // that is deterministic (DTMC) or keeps the observation (CTMC: weight 1 or
  // silent).
  std::vector<std::optional<std::size_t>> next(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (out[v].size() != 1) continue;
    const auto& [w, e] = *out[v].begin();
    if (w == v) continue;
    if (chain.kind == ModelKind::Dtmc ? near_one(e.weight)
                                      : chain.obs[v] == chain.obs[w] && (near_one(e.weight) || e.silent))
      next[v] = w;
  }
  // An edge from u skips v when the step through v is a stutter: v looks
  // like u, or like where v goes.
  auto resolve = [&](const State* from, std::size_t v) {
    std::set<std::size_t> seen;
    while (next[v] && seen.insert(v).second) {
      const std::size_t w = *next[v];
      if (!(from && chain.obs[v] == *from) && chain.obs[v] != chain.obs[w]) break;
      v = w;
    }
    return v;
  };

  const std::size_t initial = resolve(nullptr, chain.initial);
  std::map<std::size_t, std::size_t> renum;
  std::vector<std::size_t> order{initial};
  renum[initial] = 0;
  std::vector<std::map<std::size_t, Edge>> merged;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t u = order[i];
    std::map<std::size_t, Edge> row;
    for (const auto& [v, e] : out[u]) {
      const std::size_t w = resolve(&chain.obs[u], v);
      if (renum.emplace(w, order.size()).second) order.push_back(w);
      Edge& m = row[renum.at(w)];
      m.weight += e.weight;
      m.silent = m.silent && e.silent;
    }
    merged.push_back(std::move(row));
  }

  LabeledChain res;
  res.kind = chain.kind;
  res.obs_vars = chain.obs_vars;
  res.initial = 0;
  for (std::size_t u : order) {
    res.obs.push_back(chain.obs[u]);
    res.origin.push_back(chain.origin[u]);
  }
  for (std::size_t i = 0; i < merged.size(); ++i)
    for (const auto& [j, e] : merged[i]) res.transitions.push_back({i, j, e.weight, e.silent});
  return res;
}

}  // namespace

// Merging parallel edges can turn a state administrative, so repeat until
// the chain stops shrinking.
LabeledChain collapse(const LabeledChain& chain) {
  LabeledChain cur = collapse_once(chain);
  for (;;) {
    LabeledChain nxt = collapse_once(cur);
    if (nxt.size() == cur.size() && nxt.transitions.size() == cur.transitions.size()) return nxt;
    cur = std::move(nxt);
  }
}

namespace {

using Signature = std::map<std::size_t, double>;

struct Refinement {
  const LabeledChain& a;
  const LabeledChain& b;
  double tol;
  std::size_t na = 0;
  std::size_t total = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> succ;
  std::vector<std::vector<std::size_t>> history;  // partition after each round

  Refinement(const LabeledChain& a_, const LabeledChain& b_, double t) : a(a_), b(b_), tol(t) {
    na = a.size();
    total = na + b.size();
    succ.resize(total);
    for (const auto& tr : a.transitions) succ[tr.src].push_back({tr.dst, tr.weight});
    for (const auto& tr : b.transitions) succ[na + tr.src].push_back({na + tr.dst, tr.weight});
  }

  const State& obs(std::size_t x) const { return x < na ? a.obs[x] : b.obs[x - na]; }

  Signature signature(std::size_t x, const std::vector<std::size_t>& part) const {
    Signature s;
    for (const auto& [y, w] : succ[x]) s[part[y]] += w;
    return s;
  }

  // Block where the two signatures differ, if any.
  std::optional<std::size_t> difference(const Signature& s, const Signature& t) const {
    std::set<std::size_t> keys;
    for (const auto& kv : s) keys.insert(kv.first);
    for (const auto& kv : t) keys.insert(kv.first);
    for (auto k : keys) {
      const double x = s.count(k) ? s.at(k) : 0.0;
      const double y = t.count(k) ? t.at(k) : 0.0;
      if (std::abs(x - y) > tol) return k;
    }
    return std::nullopt;
  }

  void run() {
    std::map<State, std::size_t> by_obs;
    std::vector<std::size_t> part(total);
    for (std::size_t x = 0; x < total; ++x) part[x] = by_obs.try_emplace(obs(x), by_obs.size()).first->second;
    history.push_back(part);
    std::size_t count = by_obs.size();
    for (;;) {
      std::vector<std::vector<std::pair<Signature, std::size_t>>> groups(count);
      std::vector<std::size_t> next(total);
      std::size_t fresh = 0;
      for (std::size_t x = 0; x < total; ++x) {
        Signature s = signature(x, part);
        auto& g = groups[part[x]];
        std::optional<std::size_t> id;
        for (const auto& [rep, gid] : g)
          if (!difference(rep, s)) {
            id = gid;
            break;
          }
        if (!id) {
          id = fresh++;
          g.emplace_back(std::move(s), *id);
        }
        next[x] = *id;
      }
      if (fresh == count) break;
      part = std::move(next);
      count = fresh;
      history.push_back(part);
    }
  }

  std::string describe(std::size_t x) const {
    const bool left = x < na;
    const LabeledChain& c = left ? a : b;
    const std::size_t id = left ? x : x - na;
    return std::string(left ? "chor" : "prism") + "#" + std::to_string(id) + " {" + to_string(c.obs_vars, c.obs[id]) + "}";
  }

  std::size_t level(std::size_t x, std::size_t y) const {
    for (std::size_t r = 0; r < history.size(); ++r)
      if (history[r][x] != history[r][y]) return r;
    return history.size();
  }

  void explain(std::size_t x, std::size_t y, int depth, std::ostringstream& os) const {
    const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
    const std::size_t r = level(x, y);
    if (r == 0) {
      os << pad << describe(x) << " and " << describe(y) << " observe different values\n";
      return;
    }
    if (r >= history.size()) return;
    const auto& prev = history[r - 1];
    const Signature sx = signature(x, prev);
    const Signature sy = signature(y, prev);
    const std::size_t blk = *difference(sx, sy);
    const double wx = sx.count(blk) ? sx.at(blk) : 0.0;
    const double wy = sy.count(blk) ? sy.at(blk) : 0.0;
    std::size_t member = 0;
    while (prev[member] != blk) ++member;
    os << pad << describe(x) << " moves with weight " << wx << " but " << describe(y) << " with weight " << wy
       << " into the class of {" << to_string(a.obs_vars, obs(member)) << "}\n";
    if (depth >= 10 || (wx > tol && wy > tol)) return;
    // One side cannot reach the class at all: follow the step it takes instead.
    const std::size_t has = wx > tol ? x : y;
    const std::size_t lacks = has == x ? y : x;
    std::optional<std::size_t> into;
    for (const auto& [s, w] : succ[has])
      if (prev[s] == blk && w > tol) {
        into = s;
        break;
      }
    std::optional<std::size_t> other;
    std::size_t best = 0;
    for (const auto& [s, w] : succ[lacks]) {
      if (w <= tol) continue;
      const std::size_t l = level(*into, s);
      if (!other || (history[0][s] == history[0][*into] && l >= best)) {
        other = s;
        best = l;
      }
    }
    if (!other) return;
    if (has == x) explain(*into, *other, depth + 1, os);
    else explain(*other, *into, depth + 1, os);
  }
};

}  // namespace

BisimResult bisimilar(const LabeledChain& a, const LabeledChain& b, double tolerance) {
  BisimResult res;
  if (a.kind != b.kind) {
    res.counterexample = "chains have different model kinds\n";
    return res;
  }
  if (a.obs_vars.names != b.obs_vars.names) {
    res.counterexample = "chains observe different variables\n";
    return res;
  }
  Refinement ref(a, b, tolerance);
  ref.run();
  const auto& part = ref.history.back();
  res.block_a.assign(part.begin(), part.begin() + static_cast<std::ptrdiff_t>(ref.na));
  res.block_b.assign(part.begin() + static_cast<std::ptrdiff_t>(ref.na), part.end());
  res.blocks = std::set<std::size_t>(part.begin(), part.end()).size();
  const std::size_t x = a.initial;
  const std::size_t y = ref.na + b.initial;
  res.equivalent = a.size() > 0 && b.size() > 0 && part[x] == part[y];
  if (!res.equivalent && a.size() > 0 && b.size() > 0) {
    std::ostringstream os;
    ref.explain(x, y, 0, os);
    res.counterexample = os.str();
  }
  return res;
}

LabeledChain lump(const LabeledChain& chain) {
  if (chain.size() == 0) return chain;
  LabeledChain none;
  none.kind = chain.kind;
  Refinement ref(chain, none, kBisimTolerance);
  ref.run();
  const auto& part = ref.history.back();
  // number blocks in breadth-first order from the initial state
  std::map<std::size_t, std::size_t> id;
  std::vector<std::size_t> rep;
  auto visit = [&](std::size_t x) {
    if (id.emplace(part[x], rep.size()).second) rep.push_back(x);
    return id.at(part[x]);
  };
  visit(chain.initial);
  std::vector<std::vector<const Transition*>> succ(chain.size());
  for (const auto& t : chain.transitions) succ[t.src].push_back(&t);
  LabeledChain out;
  out.kind = chain.kind;
  out.obs_vars = chain.obs_vars;
  out.initial = 0;
  for (std::size_t i = 0; i < rep.size(); ++i) {
    const std::size_t x = rep[i];
    out.obs.push_back(chain.obs[x]);
    out.origin.push_back(chain.origin[x]);
    std::map<std::size_t, Edge> row;
    for (const Transition* t : succ[x]) {
      Edge& e = row[visit(t->dst)];
      e.weight += t->weight;
      e.silent = e.silent && t->silent;
    }
    for (const auto& [j, e] : row) out.transitions.push_back({i, j, e.weight, e.silent});
  }
  return out;
}

LabeledChain normalise(const LabeledChain& chain) {
  LabeledChain cur = collapse(chain);
  for (;;) {
    LabeledChain nxt = collapse(lump(cur));
    if (nxt.size() == cur.size()) return nxt;
    cur = std::move(nxt);
  }
}

VerifyReport verify_projection(const ChorProgram& prog, const VerifyOptions& opts) {
  VerifyReport rep;
  rep.kind = prog.kind;
  rep.style = opts.style;
  ProjectOptions popts;
  popts.style = opts.style;
  popts.override_sconn = opts.override_sconn;
  popts.consts = opts.consts;
  popts.inject_fault = opts.inject_fault;
  const Projection proj = project(prog, popts);
  rep.findings = proj.warnings;

  const VarSpace prog_space = var_space(prog);
  const State init = opts.init ? *opts.init : initial_state(prog);
  const VarSpace net_space = network_vars(*proj.network);

  auto chor_side = [&] { return build_chain(prog, proj.ctx.consts, ChainOptions{opts.max_states, init}); };
  auto prism_side = [&] {
    NetworkChainOptions no;
    no.max_states = opts.max_states;
    no.init = lift_state(net_space, prog_space, init, proj);
    return build_network_chain(*proj.network, prog.kind, proj.ctx.consts, no);
  };
  MarkovChain chor;
  NetworkChain net;
  if (opts.parallel) {
    auto fut = std::async(std::launch::async, prism_side);
    chor = chor_side();
    net = fut.get();
  } else {
    chor = chor_side();
    net = prism_side();
  }
  if (!net.unnormalised.empty()) {
    const auto& [state, mass] = net.unnormalised.front();
    std::ostringstream msg;
    msg << net.unnormalised.size() << " projected state(s) have outgoing mass other than 1 before normalisation, first "
        << mass;
    rep.findings.push_back({"UnnormalisedMass", msg.str(), "prism state " + std::to_string(state)});
  }

  rep.chor_states = chor.states.size();
  rep.prism_states = net.chain.states.size();
  const LabeledChain a = normalise(label_chain(chor, prog_space));
  const LabeledChain b = normalise(label_chain(net.chain, prog_space));
  rep.chor_collapsed = a.size();
  rep.prism_collapsed = b.size();
  const BisimResult bis = bisimilar(a, b);
  rep.equivalent = bis.equivalent;
  rep.blocks = bis.blocks;
  rep.counterexample = bis.counterexample;
  return rep;
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  os << "projection " << (equivalent ? "is" : "is NOT") << " equivalent to the choreography\n";
  os << "  model " << to_string(kind) << ", projection style " << to_string(style) << "\n";
  os << "  choreography chain: " << chor_states << " states, " << chor_collapsed << " after collapse\n";
  os << "  projected chain:    " << prism_states << " states, " << prism_collapsed << " after collapse\n";
  os << "  bisimulation classes: " << blocks << "\n";
  for (const auto& f : findings) os << "finding: " << format(f) << "\n";
  if (!counterexample.empty()) os << "counterexample:\n" << counterexample;
  return os.str();
}

std::string VerifyReport::to_key_values() const {
  std::ostringstream os;
  os << "equivalent=" << (equivalent ? "true" : "false") << "\n"
     << "kind=" << to_string(kind) << "\n"
     << "style=" << to_string(style) << "\n"
     << "chor_states=" << chor_states << "\n"
     << "prism_states=" << prism_states << "\n"
     << "chor_collapsed=" << chor_collapsed << "\n"
     << "prism_collapsed=" << prism_collapsed << "\n"
     << "blocks=" << blocks << "\n"
     << "findings=" << findings.size() << "\n";
  return os.str();
}

}  // namespace chorprism
