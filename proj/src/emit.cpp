#include "chorprism/emit.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

namespace chorprism {

namespace {

std::string real_text(double v, int precision) {
  char buf[512];
  for (int p = 1; p <= precision; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  throw Error(ErrorCode::UnrepresentableWeight,
              std::string("value ") + buf + " does not round-trip at " + std::to_string(precision) + " digits");
}

std::string number_text(double v, int precision) {
  if (std::floor(v) == v && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  return real_text(v, precision);
}

bool is_comparison(Op op) {
  return op == Op::Eq || op == Op::Ne || op == Op::Lt || op == Op::Le || op == Op::Gt || op == Op::Ge;
}

bool is_logical(Op op) { return op == Op::And || op == Op::Or || op == Op::Not; }

int prec(const Expr& e) {
  const auto* ap = std::get_if<Expr::Apply>(&e.node);
  if (!ap) return 9;
  switch (ap->op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Not: return 3;
    case Op::Add: case Op::Sub: return 5;
    case Op::Mul: return 6;
    case Op::Neg: return 7;
    default: break;
  }
  return is_comparison(ap->op) ? 4 : 9;  // floor(), mod(), min(), max() are atoms
}

struct Printer {
  const EmitConfig& cfg;
  std::ostringstream os;

  void operand(const Expr& e, int min_prec, bool in_logic) {
    const auto* ap = std::get_if<Expr::Apply>(&e.node);
    const bool wrap = prec(e) < min_prec || (in_logic && ap && is_comparison(ap->op));
    if (wrap) os << '(';
    print(e);
    if (wrap) os << ')';
  }

  void print(const Expr& e) {
    if (const auto* lit = std::get_if<Expr::Literal>(&e.node)) {
      if (const auto* i = std::get_if<std::int64_t>(&lit->value)) os << *i;
      else if (const auto* b = std::get_if<bool>(&lit->value)) os << (*b ? "true" : "false");
      else os << real_text(std::get<double>(lit->value), cfg.precision);
      return;
    }
    if (const auto* v = std::get_if<Expr::Var>(&e.node)) {
      os << v->name;
      return;
    }
    const auto& ap = std::get<Expr::Apply>(e.node);
    const int p = prec(e);
    switch (ap.op) {
      case Op::Div:
        os << "floor(";
        operand(ap.args[0], 6, false);
        os << '/';
        operand(ap.args[1], 7, false);
        os << ')';
        return;
      case Op::Mod: case Op::Min: case Op::Max:
        os << info(ap.op).symbol << '(';
        for (std::size_t i = 0; i < ap.args.size(); ++i) {
          if (i) os << ',';
          print(ap.args[i]);
        }
        os << ')';
        return;
      case Op::Not:
        os << '!';
        operand(ap.args[0], p + 1, true);
        return;
      case Op::Neg:
        os << "-(";
        print(ap.args[0]);
        os << ')';
        return;
      default: break;
    }
    const bool logic = is_logical(ap.op);
    operand(ap.args[0], is_comparison(ap.op) ? p + 1 : p, logic);
    os << (logic ? (ap.op == Op::And ? " & " : " | ") : std::string(info(ap.op).symbol));
    operand(ap.args[1], p + 1, logic);
  }
};

std::string guard_text(const Expr& g, const EmitConfig& cfg) {
  Printer pr{cfg, {}};
  const auto* ap = std::get_if<Expr::Apply>(&g.node);
  if (ap && is_comparison(ap->op)) {
    pr.os << '(';
    pr.print(g);
    pr.os << ')';
  } else {
    pr.print(g);
  }
  return pr.os.str();
}

std::string update_text(const UpdateList& u, const EmitConfig& cfg) {
  if (u.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) out += '&';
    out += "(" + u[i].target + "'=" + to_prism(u[i].value, cfg) + ")";
  }
  return out;
}

std::string type_text(const VarType& t) {
  if (const auto* r = std::get_if<IntRange>(&t)) return "[" + std::to_string(r->lo) + ".." + std::to_string(r->hi) + "]";
  return "bool";
}

void collect_state_names(const PrismNetwork& net, std::set<std::string>& out) {
  for (const auto* m : modules_of(net))
    for (const auto& c : m->commands) {
      for (const auto& n : names_in(c.guard)) out.insert(n);
      for (const auto& b : c.branches)
        for (const auto& a : b.update)
          for (const auto& n : names_in(a.value)) out.insert(n);
    }
}

}  // namespace

std::string to_prism(const Expr& e, const EmitConfig& cfg) {
  Printer pr{cfg, {}};
  pr.print(e);
  return pr.os.str();
}

std::string render_weight(const Weight& w, const EmitConfig& cfg) {
  if (w.symbolic) return to_prism(*w.symbolic, cfg);
  return number_text(w.value, cfg.precision);
}

std::string render_command(const PrismCommand& c, const EmitConfig& cfg) {
  std::string out = "[" + (c.label ? cfg.label(*c.label) : std::string()) + "] " + guard_text(c.guard, cfg) + " -> ";
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < c.branches.size(); ++i) {
    const std::string piece = render_weight(c.branches[i].weight, cfg) + " : " + update_text(c.branches[i].update, cfg);
    if (i) {
      if (cfg.line_width > 0 && out.size() - line_start + piece.size() + 3 > static_cast<std::size_t>(cfg.line_width)) {
        out += "\n      ";
        line_start = out.size() - 6;
      }
      out += " + ";
    }
    out += piece;
  }
  return out + ";";
}

std::string emit(const PrismNetwork& net, const ChorProgram& prog, const ProjectionContext& ctx,
                 const EmitConfig& cfg) {
  if (cfg.precision < 6) throw Error(ErrorCode::InvalidArgument, "emit precision must be at least 6");
  std::ostringstream os;
  os << to_string(ctx.kind) << "\n";

  std::set<std::string> state_names;
  collect_state_names(net, state_names);
  if (!prog.constants.empty()) os << "\n";
  for (const auto& c : prog.constants) {
    auto it = ctx.consts.find(c.name);
    const bool integral = it != ctx.consts.end() && std::floor(it->second) == it->second;
    os << "const " << (state_names.count(c.name) && integral ? "int" : "double") << " " << c.name;
    if (it != ctx.consts.end()) os << " = " << number_text(it->second, cfg.precision);
    os << ";\n";
  }

  for (const auto* m : modules_of(net)) {
    os << "\nmodule " << m->name << "\n";
    for (const auto& v : m->locals)
      os << "  " << v.name << " : " << type_text(v.type) << " init " << to_string(v.init) << ";\n";
    if (!m->commands.empty()) os << "\n";
    for (const auto& c : m->commands) os << "  " << render_command(c, cfg) << "\n";
    os << "endmodule\n";
  }
  return os.str();
}

std::vector<Diagnostic> update_order_warnings(const PrismNetwork& net) {
  std::vector<Diagnostic> out;
  for (const auto* m : modules_of(net))
    for (const auto& c : m->commands)
      for (const auto& b : c.branches) {
        std::set<std::string> written;
        for (const auto& a : b.update) {
          for (const auto& n : names_in(a.value))
            if (written.count(n))
              out.push_back({"UpdateOrder",
                             "update of " + a.target + " reads " + n +
                                 " assigned earlier in the same list; PRISM reads the old value",
                             "module " + m->name + (c.label ? ", label " + *c.label : std::string(", silent command"))});
          written.insert(a.target);
        }
      }
  return out;
}

}  // namespace chorprism
