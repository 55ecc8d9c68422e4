#include "prism_reader.hpp"

#include <sstream>

#include "chorprism/frontend.hpp"
#include "chorprism/semantics.hpp"

namespace chorprism::testing {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t;");
  return s.substr(a, b - a + 1);
}

// Splits at `sep` outside parentheses.
std::vector<std::string> split_top(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    else if (s[i] == ')') --depth;
    else if (depth == 0 && s.compare(i, sep.size(), sep) == 0) {
      out.push_back(s.substr(start, i - start));
      start = i + sep.size();
      i += sep.size() - 1;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

// floor(a/b) is how the emitter keeps floored division; the choreography
// parser's `/` is already floored.
Expr expr_of(std::string text) {
  for (auto p = text.find("floor("); p != std::string::npos; p = text.find("floor(")) text.erase(p, 5);
  return parse_expr(text);
}

std::int64_t int_of(const std::string& s) { return std::stoll(trim(s)); }

VarDecl local_of(const std::string& line, const std::string& owner) {
  const auto colon = line.find(':');
  const auto init = line.find(" init ");
  VarDecl v;
  v.name = trim(line.substr(0, colon));
  v.owner = owner;
  const std::string type = trim(line.substr(colon + 1, init - colon - 1));
  const std::string value = trim(line.substr(init + 6));
  if (type == "bool") {
    v.type = BoolType{};
    v.init = value == "true";
  } else {
    const auto dots = type.find("..");
    v.type = IntRange{int_of(type.substr(1, dots - 1)), int_of(type.substr(dots + 2, type.size() - dots - 3))};
    v.init = int_of(value);
  }
  return v;
}

PrismCommand command_of(const std::string& line, const ConstEnv& consts) {
  PrismCommand c;
  const auto close = line.find(']');
  const std::string label = trim(line.substr(line.find('[') + 1, close - line.find('[') - 1));
  if (!label.empty()) c.label = label;
  const auto arrow = line.find("->", close);
  c.guard = expr_of(line.substr(close + 1, arrow - close - 1));
  for (const auto& piece : split_top(trim(line.substr(arrow + 2)), " + ")) {
    const auto parts = split_top(piece, " : ");
    PrismBranch b;
    const Expr w = expr_of(parts.at(0));
    b.weight = Weight::of(eval_weight(w, consts));
    const std::string upd = trim(parts.at(1));
    if (upd != "true")
      for (auto a : split_top(upd, "&")) {
        a = trim(a);
        a = a.substr(1, a.size() - 2);  // (x'=E)
        const auto q = a.find("'=");
        b.update.push_back({trim(a.substr(0, q)), expr_of(a.substr(q + 2))});
      }
    c.branches.push_back(std::move(b));
  }
  return c;
}

}  // namespace

ReadModel read_prism(const std::string& text) {
  ReadModel m;
  std::istringstream in(text);
  std::string line;
  PrismModule* cur = nullptr;
  // Commands may wrap onto continuation lines; join until the closing ';'.
  std::string pending;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!pending.empty()) {
      pending += " " + t;
      if (line.find(';') == std::string::npos) continue;
      cur->commands.push_back(command_of(pending, m.consts));
      pending.clear();
      continue;
    }
    if (t.empty()) continue;
    if (t == "ctmc" || t == "dtmc") {
      m.kind = t == "ctmc" ? ModelKind::Ctmc : ModelKind::Dtmc;
    } else if (t.rfind("const ", 0) == 0) {
      std::istringstream ws(t);
      std::string kw, type, name, eq, value;
      ws >> kw >> type >> name >> eq >> value;
      if (eq == "=") m.consts[name] = std::stod(value);
    } else if (t.rfind("module ", 0) == 0) {
      m.modules.push_back({trim(t.substr(7)), {}, {}});
      cur = &m.modules.back();
    } else if (t == "endmodule") {
      cur = nullptr;
    } else if (t[0] == '[') {
      if (line.find(';') == std::string::npos) pending = t;
      else cur->commands.push_back(command_of(t, m.consts));
    } else if (cur) {
      cur->locals.push_back(local_of(t, cur->name));
    }
  }
  return m;
}

}  // namespace chorprism::testing
