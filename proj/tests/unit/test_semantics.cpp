#include <doctest.h>

#include <cmath>
#include <map>

#include "chorprism/frontend.hpp"
#include "chorprism/semantics.hpp"
#include "generator.hpp"

using namespace chorprism;

namespace {

ChorProgram fixture(const std::string& name) { return load_program_file(std::string(FIXTURES) + "/" + name); }

std::int64_t ival(const char* src, const VarSpace& space = {}, const State& s = {}) {
  return std::get<std::int64_t>(eval(parse_expr(src), space, s, {}));
}

}  // namespace

TEST_CASE("integer division and modulo are floored") {
  CHECK(ival("7 / 2") == 3);
  CHECK(ival("-7 / 2") == -4);
  CHECK(ival("mod(-1, 4)") == 3);
  CHECK(ival("mod(7, 4)") == 3);
  CHECK(ival("min(4, 2, 9)") == 2);
  CHECK_THROWS_AS(ival("1 / 0"), Error);
}

TEST_CASE("names resolve to state first, then constants") {
  VarSpace space;
  space.add("x", IntRange{0, 5});
  const State s{std::int64_t{4}};
  CHECK(std::get<std::int64_t>(eval(parse_expr("x + k"), space, s, {{"k", 2}})) == 6);
  CHECK_THROWS_AS(eval(parse_expr("x + k"), space, s, {{"k", 2.5}}), Error);
  CHECK_THROWS_AS(eval(parse_expr("nope"), space, s, {}), Error);
  CHECK(eval_guard(parse_expr("x > 3 & !(x = 5)"), space, s, {}));
  CHECK(eval_weight(parse_expr("2 * lam"), {{"lam", 1.5}}) == 3.0);
}

TEST_CASE("updates are applied one after another") {
  VarSpace space;
  space.add("x", IntRange{0, 9});
  space.add("y", IntRange{0, 9});
  const State s{std::int64_t{1}, std::int64_t{0}};
  const State t = apply_update(space, s, {{"x", parse_expr("x + 1")}, {"y", parse_expr("x * 3")}}, {});
  CHECK(t == State{std::int64_t{2}, std::int64_t{6}});
  CHECK_THROWS_AS(apply_update(space, s, {{"x", Expr::integer(10)}}, {}), Error);
}

TEST_CASE("interaction steps carry their weights, calls are silent") {
  const ChorProgram p = fixture("two_branch.chor");
  const VarSpace space = var_space(p);
  const ChorConfig start{initial_state(p), p.find_definition("C")->body};
  const auto steps = step(start, p, space, p.const_env());
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].weight == 2.0);
  CHECK(steps[1].weight == 3.0);
  CHECK_FALSE(steps[0].silent);
  CHECK(steps[0].next.state == State{std::int64_t{1}, std::int64_t{2}});
  CHECK(steps[1].next.state == State{std::int64_t{3}, std::int64_t{1}});

  const auto unfold = step(steps[0].next, p, space, p.const_env());
  REQUIRE(unfold.size() == 1);
  CHECK(unfold[0].silent);
  CHECK(unfold[0].weight == 1.0);
}

TEST_CASE("chains of the two worked examples") {
  // Two rate steps then termination (self-loop added for the
  // absorbing state), plus the Call unfolding of main.
  const ChorProgram e1 = fixture("sequence.chor");
  const MarkovChain c1 = build_chain(e1, e1.const_env());
  CHECK(c1.states.size() == 4);

  const ChorProgram e2 = fixture("two_branch.chor");
  const MarkovChain c2 = build_chain(e2, e2.const_env());
  std::map<State, int> distinct;
  for (const auto& s : c2.states) ++distinct[s.values];
  CHECK(distinct.size() == 3);  // (0,0), (1,2), (3,1)
  CHECK(c2.out_weight(c2.initial) == doctest::Approx(1.0));  // main unfolds first
}

TEST_CASE("the state budget is enforced") {
  const ChorProgram p = fixture("thinkteam.chor");
  try {
    build_chain(p, p.const_env(), ChainOptions{5, std::nullopt});
    FAIL("budget ignored");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StateBudgetExceeded);
  }
}

TEST_CASE("every DTMC row of a generated program sums to one") {
  testing::ProgramGenerator gen(17);
  for (int i = 0; i < 40; ++i) {
    const ChorProgram p = gen.next(ModelKind::Dtmc);
    const MarkovChain c = build_chain(p, p.const_env());
    for (std::size_t s = 0; s < c.states.size(); ++s) CHECK(c.out_weight(s) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("chain construction is deterministic") {
  testing::ProgramGenerator gen(23);
  for (int i = 0; i < 10; ++i) {
    const ChorProgram p = gen.next(ModelKind::Ctmc);
    CHECK(to_text(build_chain(p, p.const_env())) == to_text(build_chain(p, p.const_env())));
  }
}
