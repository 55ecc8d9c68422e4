#pragma once

// Static analyses over choreographies: sizes, head modules, strong
// connectedness, annotation uniqueness and well-formedness.

#include <set>
#include <string>
#include <vector>

#include "chorprism/ast.hpp"
#include "chorprism/error.hpp"

namespace chorprism {

int nodes(const ChorTerm& term, ModelKind kind);

// Roles involved in the next action. Calls are unfolded; a definition that
// reaches itself through Calls alone raises UnguardedRecursion.
std::set<std::string> h_mods(const ChorTerm& term, const ChorProgram& prog);

bool s_conn(const ChorTerm& term, const ChorProgram& prog);

// Checks every definition body; one diagnostic per offending continuation.
std::vector<Diagnostic> s_conn_violations(const ChorProgram& prog);

struct AnnotationReport {
  bool ok = true;
  std::vector<std::string> duplicated;  // labels seen more than once
  std::vector<Diagnostic> violations;
};

// Throws MissingAnnotation if an interaction is unlabeled.
AnnotationReport check_annotations(const ChorProgram& prog);

// Collects every side condition the later stages rely on. Constants in
// `extra` count as defined (e.g. supplied on the command line).
std::vector<Diagnostic> check_well_formed(const ChorProgram& prog, const ConstEnv& extra = {});

}  // namespace chorprism
