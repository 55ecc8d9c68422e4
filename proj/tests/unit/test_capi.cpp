#include <doctest.h>

#include <string>

#include "chorprism/chorprism.h"

namespace {

std::string fixture(const char* name) { return std::string(FIXTURES) + "/" + name; }

// Takes ownership of a string returned through the API.
std::string take(char* s) {
  REQUIRE(s);
  std::string out = s;
  cp_string_free(s);
  return out;
}

cp_program* load(const char* name, const cp_options* opts = nullptr) {
  cp_program* p = nullptr;
  REQUIRE(cp_program_load_file(fixture(name).c_str(), opts, &p) == CP_OK);
  REQUIRE(p);
  return p;
}

const char* kExample = "ctmc;\nrole p;\nrole q;\nvar x @ p : [0..1] init 0;\n"
                       "def C = p -> q : [a] { rate 2 : {x' = 1 - x}; C };\n";

}  // namespace

TEST_CASE("parse, print and free") {
  CHECK(std::string(cp_version()).size() > 0);
  cp_program* p = nullptr;
  REQUIRE(cp_program_parse(kExample, nullptr, &p) == CP_OK);
  CHECK(std::string(cp_last_error()).empty());
  const std::string src = take([&] {
    char* s = nullptr;
    REQUIRE(cp_program_source(p, &s) == CP_OK);
    return s;
  }());
  CHECK(src.find("p -> q") != std::string::npos);
  cp_program_free(p);
  cp_program_free(nullptr);
  cp_string_free(nullptr);
}

TEST_CASE("failures map to status codes and set the last error") {
  cp_program* p = nullptr;
  CHECK(cp_program_parse("ctmc;\nrole p;\ndef C = p -> { };\n", nullptr, &p) == CP_ERR_SYNTAX);
  CHECK(p == nullptr);
  CHECK(std::string(cp_last_error_kind()) == "Syntax");
  CHECK_FALSE(std::string(cp_last_error()).empty());

  CHECK(cp_program_load_file("/nonexistent.chor", nullptr, &p) == CP_ERR_IO);
  CHECK(cp_program_parse(nullptr, nullptr, &p) == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_compile(nullptr, nullptr, nullptr, nullptr) == CP_ERR_INVALID_ARGUMENT);

  cp_options* o = cp_options_new();
  CHECK(cp_options_set_model(o, "mdp") == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_options_set_style(o, "loose") == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_options_set_max_states(o, 0) == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_options_set_const(o, "", 1) == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_options_set_model(nullptr, "ctmc") == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_options_set_model(o, "dtmc") == CP_OK);
  CHECK(std::string(cp_last_error()).empty());
  cp_options_free(o);
}

TEST_CASE("compile and check") {
  cp_program* p = load("two_branch.chor");
  char* prism = nullptr;
  char* summary = nullptr;
  REQUIRE(cp_compile(p, nullptr, &prism, &summary) == CP_OK);
  const std::string text = take(prism);
  CHECK(text.rfind("ctmc", 0) == 0);
  CHECK(text.find("module p") != std::string::npos);
  CHECK(take(summary).find("modules=2") != std::string::npos);

  char* report = nullptr;
  CHECK(cp_check(p, nullptr, &report) == CP_OK);
  if (report) cp_string_free(report);
  cp_program_free(p);

  cp_program* bad = load("not_connected.chor");
  report = nullptr;
  CHECK(cp_check(bad, nullptr, &report) == CP_ERR_SEMANTIC);
  CHECK(take(report).find("NotStronglyConnected") != std::string::npos);
  CHECK(cp_compile(bad, nullptr, &prism, nullptr) == CP_ERR_SEMANTIC);
  CHECK(std::string(cp_last_error_kind()) == "NotStronglyConnected");

  cp_options* o = cp_options_new();
  cp_options_set_override_sconn(o, 1);
  prism = nullptr;
  CHECK(cp_compile(bad, o, &prism, nullptr) == CP_OK);
  take(prism);
  cp_options_free(o);
  cp_program_free(bad);
}

TEST_CASE("chains and verification") {
  cp_program* p = load("two_branch.chor");
  char* out = nullptr;
  REQUIRE(cp_chain(p, nullptr, "chor", "text", &out) == CP_OK);
  CHECK(take(out).find("STATE 0") != std::string::npos);
  REQUIRE(cp_chain(p, nullptr, "prism", "dot", &out) == CP_OK);
  CHECK(take(out).find("digraph") != std::string::npos);
  CHECK(cp_chain(p, nullptr, "both", "text", &out) == CP_ERR_INVALID_ARGUMENT);

  int eq = -1;
  char* report = nullptr;
  char* summary = nullptr;
  REQUIRE(cp_verify(p, nullptr, &eq, &report, &summary) == CP_OK);
  CHECK(eq == 1);
  take(report);
  const std::string kv = take(summary);
  CHECK(kv.find("equivalent=true") != std::string::npos);
  CHECK(kv.find("chor_collapsed=3") != std::string::npos);

  cp_options* o = cp_options_new();
  cp_options_set_fault(o, 0);
  REQUIRE(cp_verify(p, o, &eq, nullptr, nullptr) == CP_OK);
  CHECK(eq == 0);
  cp_options_free(o);
  cp_program_free(p);

  cp_program* big = load("thinkteam.chor");
  o = cp_options_new();
  cp_options_set_max_states(o, 3);
  CHECK(cp_verify(big, o, &eq, nullptr, nullptr) == CP_ERR_BUDGET);
  CHECK(std::string(cp_last_error_kind()) == "StateBudgetExceeded");
  cp_options_free(o);
  cp_program_free(big);
}
