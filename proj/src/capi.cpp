#include "chorprism/chorprism.h"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "chorprism/analysis.hpp"
#include "chorprism/emit.hpp"
#include "chorprism/equivalence.hpp"
#include "chorprism/frontend.hpp"
#include "chorprism/projection.hpp"
#include "chorprism/semantics.hpp"

using namespace chorprism;

struct cp_options {
  std::optional<ModelKind> kind;
  std::optional<std::uint64_t> seed;
  ConstEnv consts;
  std::map<std::string, std::string> init;
  ProjectionStyle style = ProjectionStyle::Folded;
  bool override_sconn = false;
  std::size_t max_states = kDefaultMaxStates;
  std::optional<std::size_t> fault;
};

struct cp_program {
  ChorProgram prog;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_kind;

cp_status fail(cp_status st, std::string kind, std::string msg) {
  last_kind = std::move(kind);
  last_error = std::move(msg);
  return st;
}

cp_status ok() {
  last_error.clear();
  last_kind.clear();
  return CP_OK;
}

cp_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return CP_ERR_SYNTAX;
    case ErrorCode::Io: return CP_ERR_IO;
    case ErrorCode::StateBudgetExceeded: return CP_ERR_BUDGET;
    case ErrorCode::InvalidArgument: return CP_ERR_INVALID_ARGUMENT;
    case ErrorCode::CounterOverflow: return CP_ERR_INTERNAL;
    default: return CP_ERR_SEMANTIC;
  }
}

template <class F>
cp_status guarded(F&& body) {
  last_error.clear();
  last_kind.clear();
  try {
    return body();
  } catch (const Error& e) {
    return fail(status_of(e.code()), std::string(to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail(CP_ERR_INTERNAL, "Internal", e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const cp_options& defaults(const cp_options* opts) {
  static const cp_options none;
  return opts ? *opts : none;
}

FrontendOptions frontend(const cp_options& o) {
  FrontendOptions f;
  f.consts = o.consts;
  f.kind = o.kind;
  if (o.seed) {
    f.scheme = AnnotationScheme::SeededRandom;
    f.seed = *o.seed;
  }
  return f;
}

State initial(const ChorProgram& prog, const cp_options& o) {
  State s = initial_state(prog);
  const VarSpace space = var_space(prog);
  for (const auto& [name, text] : o.init) {
    auto i = space.index_of(name);
    if (!i) throw Error(ErrorCode::InvalidArgument, "--init names unknown variable '" + name + "'");
    Value v;
    if (std::holds_alternative<BoolType>(space.types[*i])) {
      if (text != "true" && text != "false") throw Error(ErrorCode::InvalidArgument, "'" + name + "' expects true or false");
      v = text == "true";
    } else {
      std::int64_t n = 0;
      auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
      if (ec != std::errc() || end != text.data() + text.size())
        throw Error(ErrorCode::InvalidArgument, "'" + name + "' expects an integer, got '" + text + "'");
      v = n;
    }
    if (!in_range(space.types[*i], v))
      throw Error(ErrorCode::RangeViolation, "initial value " + text + " outside the range of '" + name + "'");
    s[*i] = v;
  }
  return s;
}

ProjectOptions projection_options(const cp_options& o) {
  ProjectOptions p;
  p.style = o.style;
  p.override_sconn = o.override_sconn;
  p.inject_fault = o.fault;
  return p;
}

}  // namespace

extern "C" {

const char* cp_version(void) { return "1.0.0"; }

const char* cp_last_error(void) { return last_error.c_str(); }

const char* cp_last_error_kind(void) { return last_kind.c_str(); }

void cp_string_free(char* s) { std::free(s); }

cp_options* cp_options_new(void) { return new cp_options(); }

void cp_options_free(cp_options* opts) { delete opts; }

cp_status cp_options_set_model(cp_options* opts, const char* kind) {
  if (!opts || !kind) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null argument");
  const std::string k = kind;
  if (k == "ctmc") opts->kind = ModelKind::Ctmc;
  else if (k == "dtmc") opts->kind = ModelKind::Dtmc;
  else return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "model must be ctmc or dtmc, got '" + k + "'");
  return ok();
}

cp_status cp_options_set_seed(cp_options* opts, uint64_t seed) {
  if (!opts) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null options");
  opts->seed = seed;
  return ok();
}

cp_status cp_options_set_const(cp_options* opts, const char* name, double value) {
  if (!opts || !name || !*name) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "constant needs a name");
  opts->consts[name] = value;
  return ok();
}

cp_status cp_options_set_init(cp_options* opts, const char* var, const char* value) {
  if (!opts || !var || !value || !*var) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "init needs var and value");
  opts->init[var] = value;
  return ok();
}

cp_status cp_options_set_style(cp_options* opts, const char* style) {
  if (!opts || !style) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null argument");
  const std::string s = style;
  if (s == "folded") opts->style = ProjectionStyle::Folded;
  else if (s == "formal") opts->style = ProjectionStyle::Formal;
  else return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "style must be folded or formal, got '" + s + "'");
  return ok();
}

cp_status cp_options_set_override_sconn(cp_options* opts, int enabled) {
  if (!opts) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null options");
  opts->override_sconn = enabled != 0;
  return ok();
}

cp_status cp_options_set_max_states(cp_options* opts, size_t max_states) {
  if (!opts || max_states == 0) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "max states must be positive");
  opts->max_states = max_states;
  return ok();
}

cp_status cp_options_set_fault(cp_options* opts, size_t index) {
  if (!opts) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null options");
  opts->fault = index;
  return ok();
}

cp_status cp_program_parse(const char* text, const cp_options* opts, cp_program** out) {
  if (!text || !out) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null argument");
  return guarded([&] {
    *out = new cp_program{load_program(text, frontend(defaults(opts)))};
    return CP_OK;
  });
}

cp_status cp_program_load_file(const char* path, const cp_options* opts, cp_program** out) {
  if (!path || !out) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null argument");
  return guarded([&] {
    *out = new cp_program{load_program_file(path, frontend(defaults(opts)))};
    return CP_OK;
  });
}

void cp_program_free(cp_program* prog) { delete prog; }

cp_status cp_program_source(const cp_program* prog, char** out) {
  if (!prog || !out) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null argument");
  return guarded([&] {
    *out = dup(to_source(prog->prog));
    return CP_OK;
  });
}

cp_status cp_check(const cp_program* prog, const cp_options* opts, char** report) {
  if (!prog || !report) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null argument");
  (void)opts;
  *report = nullptr;
  return guarded([&] {
    const ChorProgram& p = prog->prog;
    std::vector<Diagnostic> all = check_well_formed(p);
    const AnnotationReport ann = check_annotations(p);
    all.insert(all.end(), ann.violations.begin(), ann.violations.end());
    const auto sconn = s_conn_violations(p);
    all.insert(all.end(), sconn.begin(), sconn.end());
    if (all.empty()) {
      *report = dup("ok\n");
      return CP_OK;
    }
    *report = dup(format(all) + "\n");
    std::set<std::string> kinds;
    for (const auto& d : all) kinds.insert(d.code);
    return fail(CP_ERR_SEMANTIC, *kinds.begin(), std::to_string(all.size()) + " diagnostic(s)");
  });
}

cp_status cp_compile(const cp_program* prog, const cp_options* opts, char** prism, char** summary) {
  if (!prog || !prism) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null argument");
  return guarded([&] {
    const Projection proj = project(prog->prog, projection_options(defaults(opts)));
    const std::string text = emit(*proj.network, prog->prog, proj.ctx);
    std::size_t commands = 0;
    for (const auto& m : proj.modules) commands += m.commands.size();
    std::string sum = "modules=" + std::to_string(proj.modules.size()) + " commands=" + std::to_string(commands) +
                      " labels=" + std::to_string(alphabet(*proj.network).size()) + "\n";
    for (const auto& w : proj.warnings) sum += "warning: " + format(w) + "\n";
    for (const auto& w : update_order_warnings(*proj.network)) sum += "warning: " + format(w) + "\n";
    *prism = dup(text);
    if (summary) *summary = dup(sum);
    return CP_OK;
  });
}

cp_status cp_chain(const cp_program* prog, const cp_options* opts, const char* side, const char* format,
                   char** out) {
  if (!prog || !side || !format || !out) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null argument");
  const std::string s = side;
  const std::string f = format;
  if (s != "chor" && s != "prism")
    return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "side must be chor or prism, got '" + s + "'");
  if (f != "text" && f != "dot")
    return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "format must be text or dot, got '" + f + "'");
  return guarded([&] {
    const cp_options& o = defaults(opts);
    const ChorProgram& p = prog->prog;
    const State init = initial(p, o);
    MarkovChain chain;
    if (s == "chor") {
      auto diags = check_well_formed(p);
      if (!diags.empty()) throw Error(ErrorCode::IllFormed, chorprism::format(diags));
      chain = build_chain(p, p.const_env(), ChainOptions{o.max_states, init});
    } else {
      const Projection proj = project(p, projection_options(o));
      NetworkChainOptions no;
      no.max_states = o.max_states;
      no.init = lift_state(network_vars(*proj.network), var_space(p), init, proj);
      chain = build_network_chain(*proj.network, p.kind, proj.ctx.consts, no).chain;
    }
    *out = dup(f == "dot" ? to_dot(chain) : to_text(chain));
    return CP_OK;
  });
}

cp_status cp_verify(const cp_program* prog, const cp_options* opts, int* equivalent, char** report, char** summary) {
  if (!prog || !equivalent) return fail(CP_ERR_INVALID_ARGUMENT, "InvalidArgument", "null argument");
  return guarded([&] {
    const cp_options& o = defaults(opts);
    VerifyOptions v;
    v.style = o.style;
    v.override_sconn = o.override_sconn;
    v.init = initial(prog->prog, o);
    v.max_states = o.max_states;
    v.inject_fault = o.fault;
    const VerifyReport rep = verify_projection(prog->prog, v);
    *equivalent = rep.equivalent ? 1 : 0;
    if (report) *report = dup(rep.to_text());
    if (summary) *summary = dup(rep.to_key_values());
    return CP_OK;
  });
}

}  // extern "C"
