#include "chorprism/ast.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace chorprism {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::Dtmc ? "dtmc" : "ctmc";
}

std::string to_string(const Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return std::to_string(std::get<std::int64_t>(v));
}

const OpInfo& info(Op op) {
  static const OpInfo table[] = {
      {"+", 2, 2, false},   {"-", 2, 2, false},   {"*", 2, 2, false},
      {"/", 2, 2, false},   {"mod", 2, 2, true},  {"=", 2, 2, false},
      {"!=", 2, 2, false},  {"<", 2, 2, false},   {"<=", 2, 2, false},
      {">", 2, 2, false},   {">=", 2, 2, false},  {"!", 1, 1, false},
      {"&", 2, 2, false},   {"|", 2, 2, false},   {"min", 2, -1, true},
      {"max", 2, -1, true}, {"-", 1, 1, false},
  };
  return table[static_cast<int>(op)];
}

namespace {

bool literal_equal(const Expr::Literal& a, const Expr::Literal& b) {
  if (a.value.index() != b.value.index()) return false;
  if (const auto* d = std::get_if<double>(&a.value)) {
    const double e = std::get<double>(b.value);
    return *d == e || (std::isnan(*d) && std::isnan(e));
  }
  return a.value == b.value;
}

// Binding strength; higher binds tighter.
int precedence(const Expr& e) {
  const auto* ap = std::get_if<Expr::Apply>(&e.node);
  if (!ap) return 9;
  switch (ap->op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Not: return 3;
    case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: return 4;
    case Op::Add: case Op::Sub: return 5;
    case Op::Mul: case Op::Div: return 6;
    case Op::Neg: return 7;
    case Op::Mod: case Op::Min: case Op::Max: return 9;
  }
  return 9;
}

std::string render_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // Shortest representation that still round-trips.
  for (int p = 1; p < 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) {
      s = buf;
      break;
    }
  }
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void render(const Expr& e, std::ostream& os);

void render_operand(const Expr& e, int min_prec, std::ostream& os) {
  if (precedence(e) < min_prec) {
    os << '(';
    render(e, os);
    os << ')';
  } else {
    render(e, os);
  }
}

void render(const Expr& e, std::ostream& os) {
  if (const auto* lit = std::get_if<Expr::Literal>(&e.node)) {
    if (const auto* i = std::get_if<std::int64_t>(&lit->value)) {
      os << *i;
    } else if (const auto* b = std::get_if<bool>(&lit->value)) {
      os << (*b ? "true" : "false");
    } else {
      os << render_real(std::get<double>(lit->value));
    }
    return;
  }
  if (const auto* v = std::get_if<Expr::Var>(&e.node)) {
    os << v->name;
    if (v->index) {
      os << '[';
      render(*v->index, os);
      os << ']';
    }
    return;
  }
  const auto& ap = std::get<Expr::Apply>(e.node);
  const OpInfo& oi = info(ap.op);
  const int p = precedence(e);
  if (oi.function_form) {
    os << oi.symbol << '(';
    for (std::size_t i = 0; i < ap.args.size(); ++i) {
      if (i) os << ", ";
      render(ap.args[i], os);
    }
    os << ')';
    return;
  }
  if (ap.args.size() == 1) {
    os << oi.symbol;
    // The parser folds "-3" into a literal, so negating a literal needs parens.
    if (ap.op == Op::Neg && ap.args[0].is_literal()) {
      os << '(';
      render(ap.args[0], os);
      os << ')';
    } else {
      render_operand(ap.args[0], p + (ap.op == Op::Neg ? 1 : 0), os);
    }
    return;
  }
  // Binary: left-associative chains only for the associative-by-position
  // arithmetic/logic operators; comparisons never chain.
  const bool comparison = p == 4;
  render_operand(ap.args[0], comparison ? p + 1 : p, os);
  os << ' ' << oi.symbol << ' ';
  render_operand(ap.args[1], p + 1, os);
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* la = std::get_if<Expr::Literal>(&a.node)) {
    return literal_equal(*la, std::get<Expr::Literal>(b.node));
  }
  if (const auto* va = std::get_if<Expr::Var>(&a.node)) {
    const auto& vb = std::get<Expr::Var>(b.node);
    if (va->name != vb.name) return false;
    if (!va->index || !vb.index) return !va->index && !vb.index;
    return *va->index == *vb.index;
  }
  const auto& aa = std::get<Expr::Apply>(a.node);
  const auto& ab = std::get<Expr::Apply>(b.node);
  return aa.op == ab.op && aa.args == ab.args;
}

std::string to_source(const Expr& e) {
  std::ostringstream os;
  render(e, os);
  return os.str();
}

namespace {
void collect_names(const Expr& e, std::vector<std::string>& out) {
  if (const auto* v = std::get_if<Expr::Var>(&e.node)) {
    if (std::find(out.begin(), out.end(), v->name) == out.end()) out.push_back(v->name);
    if (v->index) collect_names(*v->index, out);
  } else if (const auto* ap = std::get_if<Expr::Apply>(&e.node)) {
    for (const auto& a : ap->args) collect_names(a, out);
  }
}
}  // namespace

std::vector<std::string> names_in(const Expr& e) {
  std::vector<std::string> out;
  collect_names(e, out);
  return out;
}

std::string to_source(const UpdateList& u) {
  std::string out = "{";
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) out += ", ";
    out += u[i].target + "' = " + to_source(u[i].value);
  }
  return out + "}";
}

TermPtr make_term(Interaction i) { return std::make_shared<const ChorTerm>(ChorTerm{std::move(i)}); }
TermPtr make_term(Conditional c) { return std::make_shared<const ChorTerm>(ChorTerm{std::move(c)}); }
TermPtr call(std::string name) { return std::make_shared<const ChorTerm>(ChorTerm{Call{std::move(name)}}); }
TermPtr inact() {
  static const TermPtr shared = std::make_shared<const ChorTerm>(ChorTerm{Inact{}});
  return shared;
}

bool structurally_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return structurally_equal(*a, *b);
}

bool structurally_equal(const ChorTerm& a, const ChorTerm& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* ia = std::get_if<Interaction>(&a.node)) {
    const auto& ib = std::get<Interaction>(b.node);
    if (ia->label != ib.label || ia->initiator != ib.initiator || ia->receivers != ib.receivers ||
        ia->branches.size() != ib.branches.size())
      return false;
    for (std::size_t j = 0; j < ia->branches.size(); ++j) {
      const Branch& x = ia->branches[j];
      const Branch& y = ib.branches[j];
      if (x.label != y.label || !(x.weight == y.weight) || !(x.update == y.update) ||
          !structurally_equal(x.cont, y.cont))
        return false;
    }
    return true;
  }
  if (const auto* ca = std::get_if<Conditional>(&a.node)) {
    const auto& cb = std::get<Conditional>(b.node);
    return ca->at == cb.at && ca->guard == cb.guard && structurally_equal(ca->then_body, cb.then_body) &&
           structurally_equal(ca->else_body, cb.else_body);
  }
  if (const auto* xa = std::get_if<Call>(&a.node)) return xa->name == std::get<Call>(b.node).name;
  return true;
}

namespace {

void render_term(const ChorTerm& t, ModelKind kind, int indent, std::ostream& os) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (const auto* in = std::get_if<Interaction>(&t.node)) {
    os << in->initiator << " -> ";
    for (std::size_t i = 0; i < in->receivers.size(); ++i) os << (i ? ", " : "") << in->receivers[i];
    os << " : ";
    if (in->label) os << '[' << *in->label << "] ";
    os << "{\n";
    for (std::size_t j = 0; j < in->branches.size(); ++j) {
      const Branch& b = in->branches[j];
      os << pad << (j ? "| " : "  ");
      if (b.label) os << '[' << *b.label << "] ";
      os << (kind == ModelKind::Dtmc ? "prob " : "rate ") << to_source(b.weight) << " : "
         << to_source(b.update) << "; ";
      render_term(*b.cont, kind, indent + 1, os);
      os << '\n';
    }
    os << pad << '}';
  } else if (const auto* c = std::get_if<Conditional>(&t.node)) {
    os << "if " << to_source(c->guard) << " @ " << c->at << " then {\n" << pad << "  ";
    render_term(*c->then_body, kind, indent + 1, os);
    os << '\n' << pad << "} else {\n" << pad << "  ";
    render_term(*c->else_body, kind, indent + 1, os);
    os << '\n' << pad << '}';
  } else if (const auto* x = std::get_if<Call>(&t.node)) {
    os << x->name;
  } else {
    os << "end";
  }
}

std::string render_type(const VarType& t) {
  if (const auto* r = std::get_if<IntRange>(&t)) {
    return "[" + std::to_string(r->lo) + ".." + std::to_string(r->hi) + "]";
  }
  return "bool";
}

}  // namespace

std::string to_source(const ChorTerm& t) {
  std::ostringstream os;
  render_term(t, ModelKind::Ctmc, 0, os);
  return os.str();
}

bool in_range(const VarType& t, const Value& v) {
  if (const auto* r = std::get_if<IntRange>(&t)) {
    const auto* i = std::get_if<std::int64_t>(&v);
    return i && *i >= r->lo && *i <= r->hi;
  }
  return std::holds_alternative<bool>(v);
}

const Definition* ChorProgram::find_definition(std::string_view name) const {
  for (const auto& d : definitions)
    if (d.name == name) return &d;
  return nullptr;
}

const VarDecl* ChorProgram::find_var(std::string_view name) const {
  for (const auto& v : vars)
    if (v.name == name) return &v;
  return nullptr;
}

bool ChorProgram::has_role(std::string_view name) const {
  return std::find(roles.begin(), roles.end(), name) != roles.end();
}

ConstEnv ChorProgram::const_env() const {
  ConstEnv env;
  for (const auto& c : constants)
    if (c.value) env[c.name] = *c.value;
  return env;
}

bool programs_equal(const ChorProgram& a, const ChorProgram& b) {
  if (a.kind != b.kind || a.constants != b.constants || a.roles != b.roles || a.vars != b.vars ||
      a.main != b.main || a.definitions.size() != b.definitions.size())
    return false;
  for (std::size_t i = 0; i < a.definitions.size(); ++i) {
    if (a.definitions[i].name != b.definitions[i].name ||
        !structurally_equal(a.definitions[i].body, b.definitions[i].body))
      return false;
  }
  return true;
}

std::string to_source(const ChorProgram& p) {
  std::ostringstream os;
  os << to_string(p.kind) << ";\n";
  for (const auto& c : p.constants) {
    os << "const " << c.name;
    if (c.value) os << " = " << to_source(Expr::real(*c.value));
    os << ";\n";
  }
  for (const auto& r : p.roles) os << "role " << r << ";\n";
  for (const auto& v : p.vars) {
    os << "var " << v.name << " @ " << v.owner << " : " << render_type(v.type) << " init "
       << to_string(v.init) << ";\n";
  }
  for (const auto& d : p.definitions) {
    os << "def " << d.name << " = ";
    render_term(*d.body, p.kind, 1, os);
    os << ";\n";
  }
  os << "main " << p.main << ";\n";
  return os.str();
}

}  // namespace chorprism
