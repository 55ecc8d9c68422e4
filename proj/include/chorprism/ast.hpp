#pragma once

// Abstract syntax of probabilistic choreographies.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chorprism {

enum class ModelKind { Dtmc, Ctmc };

std::string_view to_string(ModelKind kind);

// State values are bounded integers or booleans.
using Value = std::variant<std::int64_t, bool>;

std::string to_string(const Value& v);

enum class Op {
  Add, Sub, Mul, Div, Mod,
  Eq, Ne, Lt, Le, Gt, Ge,
  Not, And, Or,
  Min, Max,
  Neg,
};

struct OpInfo {
  std::string_view symbol;  // surface spelling (function name for Mod/Min/Max)
  int min_arity;
  int max_arity;            // -1: unbounded
  bool function_form;       // printed as f(a, b)
};

const OpInfo& info(Op op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  struct Literal {
    std::variant<std::int64_t, bool, double> value;
  };
  // `index` is only present in surface programs (e.g. b[i]); core programs
  // never carry it.
  struct Var {
    std::string name;
    ExprPtr index;
  };
  struct Apply {
    Op op;
    std::vector<Expr> args;
  };

  std::variant<Literal, Var, Apply> node;

  static Expr integer(std::int64_t v) { return Expr{Literal{v}}; }
  static Expr boolean(bool v) { return Expr{Literal{v}}; }
  static Expr real(double v) { return Expr{Literal{v}}; }
  static Expr var(std::string name) { return Expr{Var{std::move(name), nullptr}}; }
  static Expr apply(Op op, std::vector<Expr> args) { return Expr{Apply{op, std::move(args)}}; }

  bool is_literal() const { return std::holds_alternative<Literal>(node); }
};

bool operator==(const Expr& a, const Expr& b);

// Renders in the choreography surface syntax (also valid PRISM for the
// operators both share).
std::string to_source(const Expr& e);

// Free variable / constant names, in first-occurrence order.
std::vector<std::string> names_in(const Expr& e);

struct Assignment {
  std::string target;
  Expr value;
  bool operator==(const Assignment&) const = default;
};

// x'=E & ... ; empty means the identity update.
using UpdateList = std::vector<Assignment>;

std::string to_source(const UpdateList& u);

struct ChorTerm;
using TermPtr = std::shared_ptr<const ChorTerm>;

struct Branch {
  std::optional<std::string> label;
  Expr weight;
  UpdateList update;
  TermPtr cont;
};

struct Interaction {
  std::optional<std::string> label;
  std::string initiator;
  std::vector<std::string> receivers;
  std::vector<Branch> branches;
};

struct Conditional {
  Expr guard;
  std::string at;
  TermPtr then_body;
  TermPtr else_body;
};

struct Call {
  std::string name;
};

struct Inact {};

struct ChorTerm {
  std::variant<Interaction, Conditional, Call, Inact> node;
};

TermPtr make_term(Interaction i);
TermPtr make_term(Conditional c);
TermPtr call(std::string name);
TermPtr inact();

bool structurally_equal(const ChorTerm& a, const ChorTerm& b);
bool structurally_equal(const TermPtr& a, const TermPtr& b);

// Surface syntax rendering of a term (canonical: labels included).
std::string to_source(const ChorTerm& t);

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool operator==(const IntRange&) const = default;
};
struct BoolType {
  bool operator==(const BoolType&) const = default;
};
using VarType = std::variant<IntRange, BoolType>;

struct VarDecl {
  std::string name;
  std::string owner;
  VarType type;
  Value init;
  bool operator==(const VarDecl&) const = default;
};

bool in_range(const VarType& t, const Value& v);

struct Constant {
  std::string name;
  std::optional<double> value;  // unset: supplied later (e.g. from the CLI)
  bool operator==(const Constant&) const = default;
};

using ConstEnv = std::map<std::string, double>;

struct Definition {
  std::string name;
  TermPtr body;
};

struct ChorProgram {
  ModelKind kind = ModelKind::Ctmc;
  std::vector<Constant> constants;
  std::vector<std::string> roles;
  std::vector<VarDecl> vars;
  std::vector<Definition> definitions;  // source order
  std::string main;

  const Definition* find_definition(std::string_view name) const;
  const VarDecl* find_var(std::string_view name) const;
  bool has_role(std::string_view name) const;
  ConstEnv const_env() const;  // defined constants only
};

bool programs_equal(const ChorProgram& a, const ChorProgram& b);

// Full program in surface syntax; parse(to_source(p)) reproduces p.
std::string to_source(const ChorProgram& p);

}  // namespace chorprism
