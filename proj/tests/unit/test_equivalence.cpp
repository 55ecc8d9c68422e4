#include <doctest.h>

#include <map>
#include <random>

#include "chorprism/equivalence.hpp"
#include "chorprism/frontend.hpp"
#include "chorprism/semantics.hpp"
#include "generator.hpp"

using namespace chorprism;

namespace {

ChorProgram fixture(const std::string& name) { return load_program_file(std::string(FIXTURES) + "/" + name); }

LabeledChain chain_of(ModelKind kind, const std::vector<std::int64_t>& obs, std::vector<Transition> ts) {
  LabeledChain c;
  c.kind = kind;
  c.obs_vars.add("o", IntRange{0, 9});
  for (std::size_t i = 0; i < obs.size(); ++i) {
    c.obs.push_back(State{obs[i]});
    c.origin.push_back("s" + std::to_string(i));
  }
  c.transitions = std::move(ts);
  return c;
}

std::int64_t obs_of(const LabeledChain& c, std::size_t s) { return std::get<std::int64_t>(c.obs[s].at(0)); }

// Random DTMC over observations {0,1,2}; about a third of the states are
// single certain steps.
LabeledChain random_dtmc(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(2, 20), o(0, 2), coin(0, 2), fan(1, 3);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  const int n = size(rng);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<std::int64_t> obs;
  std::vector<Transition> ts;
  for (int s = 0; s < n; ++s) {
    obs.push_back(o(rng));
    if (coin(rng) == 0) {
      ts.push_back({std::size_t(s), std::size_t(pick(rng)), 1.0, coin(rng) == 0});
      continue;
    }
    const int k = fan(rng);
    std::vector<double> ws;
    double sum = 0;
    for (int i = 0; i < k; ++i) sum += ws.emplace_back(w(rng));
    for (int i = 0; i < k; ++i) ts.push_back({std::size_t(s), std::size_t(pick(rng)), ws[i] / sum, false});
  }
  return chain_of(ModelKind::Dtmc, obs, ts);
}

// Probability that the first observation different from the initial one is
// `o`, by value iteration.
std::map<std::int64_t, double> first_change(const LabeledChain& c) {
  const std::int64_t start = obs_of(c, c.initial);
  std::map<std::int64_t, double> out;
  for (std::int64_t o = 0; o <= 2; ++o) {
    if (o == start) continue;
    std::vector<double> x(c.size(), 0.0);
    for (int round = 0; round < 3000; ++round) {
      std::vector<double> nx(c.size(), 0.0);
      for (const auto& t : c.transitions) {
        if (obs_of(c, t.src) != start) continue;
        nx[t.src] += t.weight * (obs_of(c, t.dst) == start ? x[t.dst] : obs_of(c, t.dst) == o ? 1.0 : 0.0);
      }
      x = std::move(nx);
    }
    out[o] = x[c.initial];
  }
  return out;
}

LabeledChain observed_chain(const ChorProgram& p, const ConstEnv& consts) {
  return label_chain(build_chain(p, consts), var_space(p));
}

}  // namespace

TEST_CASE("collapse removes a silent step that keeps the observation") {
  // 0 -(silent)-> 1 -(2)-> 2 -(3)-> 0, states 0 and 1 observed alike
  const LabeledChain c = chain_of(ModelKind::Ctmc, {0, 0, 1}, {{0, 1, 1.0, true}, {1, 2, 2.0, false}, {2, 0, 3.0, false}});
  const LabeledChain k = collapse(c);
  REQUIRE(k.size() == 2);
  CHECK(obs_of(k, k.initial) == 0);
  REQUIRE(k.transitions.size() == 2);
  for (const auto& t : k.transitions) CHECK(t.weight == (obs_of(k, t.src) == 0 ? 2.0 : 3.0));

  // an observable rate-1 step is kept
  const LabeledChain visible = chain_of(ModelKind::Ctmc, {0, 1}, {{0, 1, 1.0, false}, {1, 0, 1.0, false}});
  CHECK(collapse(visible).size() == 2);
}

TEST_CASE("collapse is idempotent and keeps the first observable change") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const LabeledChain c = random_dtmc(rng);
    const LabeledChain k = collapse(c);
    CHECK(collapse(k).size() == k.size());
    CHECK(collapse(k).transitions.size() == k.transitions.size());
    CHECK(obs_of(k, k.initial) == obs_of(c, c.initial));
    const auto before = first_change(c), after = first_change(k);
    for (const auto& [o, p] : before) CHECK(after.at(o) == doctest::Approx(p).epsilon(1e-6));
  }
}

TEST_CASE("bisimilarity is reflexive and symmetric") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const LabeledChain a = random_dtmc(rng), b = random_dtmc(rng);
    CHECK(bisimilar(a, a).equivalent);
    CHECK(bisimilar(a, b).equivalent == bisimilar(b, a).equivalent);
    CHECK(lump(a).size() <= a.size());
    CHECK(bisimilar(a, lump(a)).equivalent);
  }
}

TEST_CASE("a changed rate is told apart") {
  const ChorProgram p = fixture("two_branch.chor");
  const LabeledChain base = normalise(observed_chain(p, p.const_env()));
  CHECK(base.size() == 3);
  ConstEnv other = p.const_env();
  other["lambda2"] = 4;
  const BisimResult r = bisimilar(base, normalise(observed_chain(p, other)));
  CHECK_FALSE(r.equivalent);
  CHECK_FALSE(r.counterexample.empty());
  CHECK(bisimilar(base, normalise(observed_chain(p, p.const_env()))).equivalent);
}

TEST_CASE("projections of the worked examples are equivalent") {
  const VerifyReport ctmc = verify_projection(fixture("two_branch.chor"));
  CHECK(ctmc.equivalent);
  CHECK(ctmc.chor_collapsed == 3);
  CHECK(ctmc.prism_collapsed == 3);
  CHECK(verify_projection(fixture("two_branch_dtmc.chor")).equivalent);
  CHECK(verify_projection(fixture("sequence.chor")).equivalent);
  CHECK(verify_projection(fixture("thinkteam.chor")).equivalent);

  VerifyOptions formal;
  formal.style = ProjectionStyle::Formal;
  CHECK(verify_projection(fixture("two_branch.chor"), formal).equivalent);

  VerifyOptions fault;
  fault.inject_fault = 0;
  const VerifyReport broken = verify_projection(fixture("two_branch.chor"), fault);
  CHECK_FALSE(broken.equivalent);
  CHECK_FALSE(broken.counterexample.empty());
}

TEST_CASE("random programs project to equivalent networks") {
  for (ModelKind kind : {ModelKind::Ctmc, ModelKind::Dtmc}) {
    testing::ProgramGenerator gen(kind == ModelKind::Ctmc ? 101 : 202);
    for (int i = 0; i < 100; ++i) {
      const ChorProgram p = gen.next(kind);
      const VerifyReport r = verify_projection(p);
      CHECK_MESSAGE(r.equivalent, to_source(p) << "\n" << r.counterexample);
    }
  }
}
