#include <doctest.h>

#include "chorprism/analysis.hpp"
#include "chorprism/frontend.hpp"
#include "generator.hpp"

using namespace chorprism;

namespace {

ChorProgram fixture(const std::string& name) { return load_program_file(std::string(FIXTURES) + "/" + name); }

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code) {
  for (const auto& d : ds)
    if (d.code == code) return true;
  return false;
}

}  // namespace

TEST_CASE("expressions render back to what they were parsed from") {
  for (const char* src : {"x + 1", "min(x + 1, 3)", "x = 0 & !(y < 2)", "mod(x + 2, 4)", "(a | b) & c"}) {
    const Expr e = parse_expr(src);
    CHECK(parse_expr(to_source(e)) == e);
  }
  CHECK(names_in(parse_expr("x + y * x - lambda")) == std::vector<std::string>{"x", "y", "lambda"});
}

TEST_CASE("nodes counts the syntax tree, plus one slot per DTMC branch") {
  const ChorProgram p = fixture("two_branch.chor");
  const ChorTerm& body = *p.find_definition("C")->body;
  // interaction + two Call leaves
  CHECK(nodes(body, ModelKind::Ctmc) == 3);
  CHECK(nodes(body, ModelKind::Dtmc) == 5);
  CHECK(nodes(*inact(), ModelKind::Ctmc) == 1);
}

TEST_CASE("head modules unfold calls and reject unguarded recursion") {
  const ChorProgram p = fixture("connected.chor");
  CHECK(h_mods(*call("X"), p) == std::set<std::string>{"p", "q"});
  CHECK(h_mods(*inact(), p).empty());

  ChorProgram loop = p;
  loop.definitions.push_back({"Y", call("Z")});
  loop.definitions.push_back({"Z", call("Y")});
  CHECK_THROWS_AS(h_mods(*call("Y"), loop), Error);
}

TEST_CASE("strong connectedness on the two textbook choreographies") {
  const ChorProgram good = fixture("connected.chor");
  CHECK(s_conn(*good.find_definition("X")->body, good));
  CHECK(s_conn_violations(good).empty());

  const ChorProgram bad = fixture("not_connected.chor");
  CHECK_FALSE(s_conn(*bad.find_definition("C")->body, bad));
  const auto v = s_conn_violations(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].code == "NotStronglyConnected");
}

TEST_CASE("annotations must be unique") {
  CHECK(check_annotations(fixture("annotated_ok.chor")).ok);
  const AnnotationReport dup = check_annotations(fixture("annotated_dup.chor"));
  CHECK_FALSE(dup.ok);
  CHECK(dup.duplicated == std::vector<std::string>{"a"});
  CHECK(has_code(dup.violations, "DuplicateAnnotation"));

  ChorProgram bare = fixture("sequence.chor");
  bare.definitions[0].body = make_term(Interaction{std::nullopt, "p", {"q"}, {{std::nullopt, Expr::integer(1), {}, inact()}}});
  CHECK_THROWS_AS(check_annotations(bare), Error);
}

TEST_CASE("well-formedness reports each broken side condition") {
  const ChorProgram ok = fixture("two_branch.chor");
  CHECK(check_well_formed(ok).empty());

  auto with_body = [&](TermPtr body) {
    ChorProgram p = ok;
    p.definitions[0].body = std::move(body);
    return check_well_formed(p);
  };
  auto one = [](std::string from, std::vector<std::string> to, UpdateList u, Expr w = Expr::integer(1)) {
    return make_term(Interaction{"z", std::move(from), std::move(to), {{std::nullopt, std::move(w), std::move(u), inact()}}});
  };
  CHECK(has_code(with_body(one("p", {"q"}, {{"x", Expr::integer(1)}, {"x", Expr::integer(2)}})), "DuplicateTarget"));
  CHECK(has_code(with_body(one("p", {"q"}, {{"w", Expr::integer(1)}})), "UndeclaredVariable"));
  CHECK(has_code(with_body(one("p", {"p"}, {})), "InitiatorInReceivers"));
  CHECK(has_code(with_body(one("p", {}, {})), "NoReceivers"));
  CHECK(has_code(with_body(one("p", {"r"}, {})), "UnknownRole"));
  CHECK(has_code(with_body(call("Nope")), "UnresolvedCall"));

  ChorProgram third = ok;
  third.roles.push_back("r");
  third.vars.push_back({"z", "r", IntRange{0, 1}, std::int64_t{0}});
  third.definitions[0].body = one("p", {"q"}, {{"z", Expr::integer(1)}});
  CHECK(has_code(check_well_formed(third), "NonParticipantWrite"));

  ChorProgram dtmc = ok;
  dtmc.kind = ModelKind::Dtmc;
  dtmc.definitions[0].body = one("p", {"q"}, {}, Expr::real(0.5));
  CHECK(has_code(check_well_formed(dtmc), "ProbSumNotOne"));

  ChorProgram range = ok;
  range.vars[0].init = std::int64_t{9};
  CHECK(has_code(check_well_formed(range), "InitOutOfRange"));
}

TEST_CASE("generated programs pass every static check") {
  testing::ProgramGenerator gen(3);
  for (int i = 0; i < 40; ++i) {
    const ChorProgram p = gen.next(i % 2 ? ModelKind::Dtmc : ModelKind::Ctmc);
    CHECK(check_well_formed(p).empty());
    CHECK(s_conn_violations(p).empty());
    CHECK(check_annotations(p).ok);
  }
}
