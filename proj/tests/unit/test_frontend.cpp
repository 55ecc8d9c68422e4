#include <doctest.h>

#include "chorprism/frontend.hpp"
#include "chorprism/semantics.hpp"
#include "generator.hpp"

using namespace chorprism;

namespace {

ChorProgram fixture(const std::string& name) { return load_program_file(std::string(FIXTURES) + "/" + name); }

const Interaction& as_interaction(const TermPtr& t) {
  REQUIRE(std::holds_alternative<Interaction>(t->node));
  return std::get<Interaction>(t->node);
}

const Conditional& as_conditional(const TermPtr& t) {
  REQUIRE(std::holds_alternative<Conditional>(t->node));
  return std::get<Conditional>(t->node);
}

ErrorCode code_of(const std::string& text) {
  try {
    load_program(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("header, declarations and main") {
  const ChorProgram p = fixture("two_branch.chor");
  CHECK(p.kind == ModelKind::Ctmc);
  CHECK(p.roles == std::vector<std::string>{"p", "q"});
  REQUIRE(p.vars.size() == 2);
  CHECK(p.vars[0].owner == "p");
  CHECK(std::get<IntRange>(p.vars[0].type) == IntRange{0, 3});
  CHECK(p.main == "C");
  CHECK(p.const_env() == ConstEnv{{"lambda1", 2.0}, {"lambda2", 3.0}});
}

TEST_CASE("main defaults to the first definition") {
  const ChorProgram p = load_program("dtmc;\nrole p;\nrole q;\ndef A = p -> q : { prob 1; B };\ndef B = p -> q : { prob 1; A };\n");
  CHECK(p.main == "A");
}

TEST_CASE("syntax errors carry a position") {
  try {
    load_program("ctmc;\nrole p;\nrole q;\ndef C = p -> q { rate 1; end };\n");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Syntax);
    CHECK(e.pos().line == 4);
  }
  CHECK(code_of("ctmc;\nrole p[1..2];\nrole q;\ndef C = p[3] -> q : { rate 1; end };\n") == ErrorCode::IndexOutOfFamily);
  CHECK_THROWS_AS(load_program_file("/nonexistent/file.chor"), Error);
}

TEST_CASE("command-line constants and model override") {
  FrontendOptions o;
  o.consts = {{"lambda1", 7}};
  o.kind = ModelKind::Dtmc;
  const ChorProgram p = load_program_file(std::string(FIXTURES) + "/two_branch.chor", o);
  CHECK(p.kind == ModelKind::Dtmc);
  CHECK(p.const_env().at("lambda1") == 7.0);
}

TEST_CASE("allsynch lowers to nested conditionals with multiplied weights") {
  const ChorProgram p = fixture("allsynch.chor");
  const TermPtr& body = p.find_definition("C")->body;

  const Conditional& outer = as_conditional(body);
  CHECK(outer.at == "p");
  CHECK(outer.guard == parse_expr("x = 5"));
  const Conditional& q1 = as_conditional(outer.then_body);
  CHECK(q1.at == "q");
  const Interaction& ten = as_interaction(q1.then_body);
  CHECK(ten.initiator == "p");
  CHECK(ten.receivers == std::vector<std::string>{"q"});
  CHECK(eval_weight(ten.branches[0].weight, {}) == 10.0);
  CHECK(ten.branches[0].update == UpdateList{{"x", Expr::integer(0)}, {"y", Expr::integer(0)}});
  CHECK(std::holds_alternative<Inact>(q1.else_body->node));

  const Conditional& second = as_conditional(outer.else_body);
  CHECK(second.guard == parse_expr("x = 1"));
  const Interaction& five = as_interaction(as_conditional(second.then_body).then_body);
  CHECK(eval_weight(five.branches[0].weight, {}) == 5.0);
  CHECK(five.branches[0].update == UpdateList{{"x", Expr::integer(100)}, {"y", Expr::integer(0)}});
  CHECK(std::holds_alternative<Inact>(second.else_body->node));
}

TEST_CASE("indexed interactions expand in index order") {
  const ChorProgram p = fixture("indexed.chor");
  CHECK(p.roles == std::vector<std::string>{"p1", "p2", "p3", "q1", "q2", "q3"});
  std::vector<std::pair<std::string, std::string>> seq;
  TermPtr t = p.find_definition("C")->body;
  while (const auto* in = std::get_if<Interaction>(&t->node)) {
    seq.emplace_back(in->initiator, in->receivers.at(0));
    t = in->branches.at(0).cont;
  }
  const std::vector<std::pair<std::string, std::string>> want{
      {"p1", "q1"}, {"p2", "q2"}, {"p3", "q3"}, {"q2", "p1"}, {"q3", "p2"}, {"q1", "p3"}};
  CHECK(seq == want);
}

TEST_CASE("foreach unrolls over the filtered index range") {
  const ChorProgram p = load_program(
      "ctmc;\nrole c[1..3];\nvar b[1..3] @ c : [0..1] init 0;\n"
      "def C = c[1] -> c[2], c[3] : { rate 1 : { foreach (i in 1..3 : i != 2) { b[i]' = 1 } }; end };\n");
  const Interaction& in = as_interaction(p.find_definition("C")->body);
  CHECK(in.branches[0].update == UpdateList{{"b1", Expr::integer(1)}, {"b3", Expr::integer(1)}});
  CHECK(p.find_var("b2")->owner == "c2");
}

TEST_CASE("annotation schemes") {
  const ChorProgram det = fixture("sequence.chor");
  const Interaction& first = as_interaction(det.find_definition(det.main)->body);
  CHECK(first.label == "a");  // given in the source
  CHECK(first.branches[0].label == "a_1");

  FrontendOptions seeded;
  seeded.scheme = AnnotationScheme::SeededRandom;
  seeded.seed = 11;
  const std::string path = std::string(FIXTURES) + "/connected.chor";
  const ChorProgram a = load_program_file(path, seeded);
  const ChorProgram b = load_program_file(path, seeded);
  CHECK(programs_equal(a, b));
  const auto& label = *as_interaction(a.find_definition("X")->body).label;
  CHECK(label.size() == 5);
  for (char c : label) CHECK((c >= 'A' && c <= 'Z'));
}

TEST_CASE("printing and re-reading generated programs is the identity") {
  testing::ProgramGenerator gen(5);
  for (int i = 0; i < 60; ++i) {
    const ChorProgram p = gen.next(i % 2 ? ModelKind::Dtmc : ModelKind::Ctmc);
    const ChorProgram q = load_program(to_source(p));
    CHECK_MESSAGE(programs_equal(p, q), to_source(p));
  }
}
