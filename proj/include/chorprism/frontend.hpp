#pragma once

// Concrete syntax (.chor files) and the desugaring passes that lower it to
// a core ChorProgram: parse -> expand_indices -> expand_foreach ->
// desugar_allsynch -> lower -> auto_annotate.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chorprism/ast.hpp"
#include "chorprism/error.hpp"

namespace chorprism {

namespace surface {

// p or p[E]
struct RoleRef {
  std::string name;
  std::optional<Expr> index;
  SourcePos pos;
};

struct Update {
  enum class Kind { Assign, Foreach };
  Kind kind = Kind::Assign;
  SourcePos pos;
  // Assign: target[index]' = value
  std::string target;
  std::optional<Expr> index;
  Expr value;
  // Foreach: foreach (var in lo..hi : pred) { body }; lo/hi absent means
  // "the family indexed by var inside body".
  std::string var;
  std::optional<Expr> lo, hi;
  std::optional<Expr> pred;
  std::vector<Update> body;
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Branch {
  std::optional<std::string> label;
  Expr weight;
  std::vector<Update> update;
  TermPtr cont;
  SourcePos pos;
};

struct Interaction {
  std::optional<std::string> label;
  RoleRef initiator;
  std::vector<RoleRef> receivers;
  std::vector<Branch> branches;
};

struct Conditional {
  Expr guard;
  RoleRef at;
  TermPtr then_body;
  TermPtr else_body;
};

struct Call {
  std::string name;
};

struct Inact {};

struct SynchEntry {
  RoleRef role;
  Expr guard;
  Expr weight;
  std::vector<Update> update;
  SourcePos pos;
};

struct AllSynch {
  std::optional<std::string> label;
  std::vector<SynchEntry> entries;
  TermPtr cont;
};

struct Term {
  std::variant<Interaction, Conditional, Call, Inact, AllSynch> node;
  SourcePos pos;
};

struct RoleDecl {
  std::string name;
  std::optional<Expr> lo, hi;  // family p[lo..hi]
  SourcePos pos;
};

struct VarDecl {
  std::string name;
  std::optional<Expr> family_lo, family_hi;  // x[lo..hi]
  std::string owner;
  bool is_bool = false;
  Expr lo, hi;                // integer range
  std::optional<Expr> init;   // default: range minimum / false
  SourcePos pos;
};

struct ConstDecl {
  std::string name;
  std::optional<Expr> value;
  SourcePos pos;
};

struct Definition {
  std::string name;
  TermPtr body;
  SourcePos pos;
};

struct Program {
  ModelKind kind = ModelKind::Ctmc;
  std::vector<ConstDecl> constants;
  std::vector<RoleDecl> roles;
  std::vector<VarDecl> vars;
  std::vector<Definition> definitions;
  std::string main;
  // Families already flattened by expand_indices (name -> index range), kept
  // so later passes can still resolve x[k] inside foreach bodies.
  std::map<std::string, IntRange> flattened;
};

}  // namespace surface

using SurfaceProgram = surface::Program;

SurfaceProgram parse(std::string_view text);
Expr parse_expr(std::string_view text);

// Constant environment of a surface program: declared values, then `extra`.
ConstEnv surface_consts(const SurfaceProgram& prog, const ConstEnv& extra = {});

SurfaceProgram expand_indices(const SurfaceProgram& prog, const ConstEnv& extra = {});
SurfaceProgram expand_foreach(const SurfaceProgram& prog, const ConstEnv& extra = {});
SurfaceProgram desugar_allsynch(const SurfaceProgram& prog);
ChorProgram lower(const SurfaceProgram& prog, const ConstEnv& extra = {});

enum class AnnotationScheme { Deterministic, SeededRandom };

ChorProgram auto_annotate(const ChorProgram& prog, AnnotationScheme scheme = AnnotationScheme::Deterministic,
                          std::uint64_t seed = 0);

struct FrontendOptions {
  ConstEnv consts;  // supplied/overriding constants
  AnnotationScheme scheme = AnnotationScheme::Deterministic;
  std::uint64_t seed = 0;
  std::optional<ModelKind> kind;  // overrides the header
};

// Whole pipeline. Extra constants are recorded in the program's constants.
ChorProgram load_program(std::string_view text, const FrontendOptions& opts = {});
ChorProgram load_program_file(const std::string& path, const FrontendOptions& opts = {});

}  // namespace chorprism
