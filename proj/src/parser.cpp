// Lexer and recursive-descent parser for .chor sources.

#include <cctype>
#include <cstdlib>
#include <set>

#include "chorprism/frontend.hpp"

namespace chorprism {

namespace {

enum class TokKind { Ident, Int, Real, Punct, End };

struct Token {
  TokKind kind;
  std::string text;
  SourcePos pos;
};

const std::set<std::string, std::less<>> kKeywords = {
    "ctmc", "dtmc", "const", "role", "var", "init", "def", "main", "if", "then", "else", "end",
    "allsynch", "foreach", "rate", "prob", "bool", "in", "true", "false", "and", "or", "not",
    "mod", "min", "max"};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char* const two_char[] = {"->", "!=", "<=", ">=", "..", ":="};
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const SourcePos pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({TokKind::Ident, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool real = false;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        real = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          real = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      out.push_back({real ? TokKind::Real : TokKind::Int, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    std::string punct(1, c);
    for (const char* tc : two_char) {
      if (src.substr(i, 2) == tc) {
        punct = tc;
        break;
      }
    }
    if (std::string_view("->!=<>.:;,{}[]()|&*/+='@").find(c) == std::string_view::npos) {
      throw Error(ErrorCode::Syntax,
                  std::to_string(line) + ":" + std::to_string(col) + ": unexpected character '" + punct + "'", pos);
    }
    if (punct == ".") {
      throw Error(ErrorCode::Syntax, std::to_string(line) + ":" + std::to_string(col) + ": stray '.'", pos);
    }
    out.push_back({TokKind::Punct, punct, pos});
    advance(punct.size());
  }
  out.push_back({TokKind::End, "", {line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  SurfaceProgram program() {
    SurfaceProgram p;
    if (accept("ctmc")) p.kind = ModelKind::Ctmc;
    else if (accept("dtmc")) p.kind = ModelKind::Dtmc;
    else fail();
    accept(";");
    while (!at_end()) {
      if (accept("const")) {
        surface::ConstDecl c;
        c.pos = prev().pos;
        if ((peek().text == "double" || peek().text == "int") && peek(1).kind == TokKind::Ident) ++pos_;
        c.name = ident();
        if (accept("=")) c.value = expr();
        expect(";");
        p.constants.push_back(std::move(c));
      } else if (accept("role")) {
        surface::RoleDecl r;
        r.pos = prev().pos;
        r.name = ident();
        if (accept("[")) {
          r.lo = expr();
          expect("..");
          r.hi = expr();
          expect("]");
        }
        expect(";");
        p.roles.push_back(std::move(r));
      } else if (accept("var")) {
        p.vars.push_back(var_decl());
      } else if (accept("def")) {
        surface::Definition d;
        d.pos = prev().pos;
        d.name = ident();
        if (!accept(":=")) expect("=");
        d.body = term();
        expect(";");
        p.definitions.push_back(std::move(d));
      } else if (accept("main")) {
        p.main = ident();
        expect(";");
      } else {
        fail();
      }
    }
    if (p.main.empty() && !p.definitions.empty()) p.main = p.definitions.front().name;
    return p;
  }

  Expr standalone_expr() {
    Expr e = expr();
    if (!at_end()) fail();
    return e;
  }

 private:
  // ---- token helpers
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& prev() const { return toks_[pos_ - 1]; }
  bool at_end() const { return peek().kind == TokKind::End; }

  bool check(std::string_view text) {
    const Token& t = peek();
    if (t.kind != TokKind::End && t.kind != TokKind::Int && t.kind != TokKind::Real && t.text == text) return true;
    expected_.insert("'" + std::string(text) + "'");
    return false;
  }
  bool accept(std::string_view text) {
    if (!check(text)) return false;
    bump();
    return true;
  }
  void expect(std::string_view text) {
    if (!accept(text)) fail();
  }
  void bump() {
    ++pos_;
    expected_.clear();
  }
  bool is_ident(const Token& t) const { return t.kind == TokKind::Ident && !kKeywords.count(t.text); }
  std::string ident() {
    if (!is_ident(peek())) {
      expected_.insert("identifier");
      fail();
    }
    bump();
    return prev().text;
  }

  [[noreturn]] void fail() {
    const Token& t = peek();
    std::string msg = std::to_string(t.pos.line) + ":" + std::to_string(t.pos.column) + ": unexpected " +
                      (t.kind == TokKind::End ? std::string("end of input") : "'" + t.text + "'");
    if (!expected_.empty()) {
      msg += ", expected ";
      bool first = true;
      for (const auto& e : expected_) {
        msg += (first ? "" : " or ") + e;
        first = false;
      }
    }
    throw Error(ErrorCode::Syntax, msg, t.pos);
  }

  // ---- declarations
  surface::VarDecl var_decl() {
    surface::VarDecl v;
    v.pos = prev().pos;
    v.name = ident();
    if (accept("[")) {
      v.family_lo = expr();
      expect("..");
      v.family_hi = expr();
      expect("]");
    }
    expect("@");
    v.owner = ident();
    expect(":");
    if (accept("bool")) {
      v.is_bool = true;
      v.lo = v.hi = Expr::integer(0);
    } else {
      expect("[");
      v.lo = expr();
      expect("..");
      v.hi = expr();
      expect("]");
    }
    if (accept("init")) v.init = expr();
    expect(";");
    return v;
  }

  // ---- terms
  surface::TermPtr term() {
    const SourcePos pos = peek().pos;
    auto make = [&](auto node) { return std::make_shared<const surface::Term>(surface::Term{std::move(node), pos}); };
    if (accept("end")) return make(surface::Inact{});
    if (accept("if")) return make(conditional());
    if (accept("allsynch")) return make(allsynch());
    if (is_ident(peek())) {
      if (peek(1).text == "->" || peek(1).text == "[") return make(interaction());
      return make(surface::Call{ident()});
    }
    expected_.insert("term");
    fail();
  }

  surface::RoleRef role_ref() {
    surface::RoleRef r;
    r.pos = peek().pos;
    r.name = ident();
    if (accept("[")) {
      r.index = expr();
      expect("]");
    }
    return r;
  }

  std::optional<std::string> opt_label() {
    if (!accept("[")) return std::nullopt;
    std::string l = ident();
    expect("]");
    return l;
  }

  surface::Interaction interaction() {
    surface::Interaction in;
    in.initiator = role_ref();
    expect("->");
    do {
      in.receivers.push_back(role_ref());
    } while (accept(","));
    expect(":");
    in.label = opt_label();
    expect("{");
    do {
      in.branches.push_back(branch());
    } while (accept("|"));
    expect("}");
    return in;
  }

  surface::Branch branch() {
    surface::Branch b;
    b.pos = peek().pos;
    b.label = opt_label();
    if (!accept("rate") && !accept("prob")) fail();
    b.weight = expr();
    if (accept(":")) b.update = update_block();
    expect(";");
    b.cont = term();
    return b;
  }

  surface::Conditional conditional() {
    surface::Conditional c;
    c.guard = expr();
    expect("@");
    c.at = role_ref();
    expect("then");
    expect("{");
    c.then_body = term();
    expect("}");
    expect("else");
    if (check("if")) {
      c.else_body = term();
    } else {
      expect("{");
      c.else_body = term();
      expect("}");
    }
    return c;
  }

  surface::AllSynch allsynch() {
    surface::AllSynch a;
    a.label = opt_label();
    expect("{");
    do {
      if (check("}")) break;
      surface::SynchEntry e;
      e.pos = peek().pos;
      e.role = role_ref();
      expect(":");
      e.guard = expr();
      expect("->");
      e.weight = expr();
      if (accept(":")) e.update = update_block();
      a.entries.push_back(std::move(e));
    } while (accept(";"));
    expect("}");
    expect(";");
    a.cont = term();
    return a;
  }

  // ---- updates
  std::vector<surface::Update> update_block() {
    std::vector<surface::Update> out;
    expect("{");
    if (accept("}")) return out;
    do {
      out.push_back(update_item());
    } while (accept(",") || accept("&"));
    expect("}");
    return out;
  }

  surface::Update update_item() {
    if (accept("foreach")) return foreach_clause();
    if (accept("(")) {
      surface::Update u = assignment();
      expect(")");
      return u;
    }
    return assignment();
  }

  surface::Update assignment() {
    surface::Update u;
    u.pos = peek().pos;
    u.target = ident();
    if (accept("[")) {
      u.index = expr();
      expect("]");
    }
    expect("'");
    expect("=");
    u.value = expr();
    return u;
  }

  surface::Update foreach_clause() {
    surface::Update u;
    u.kind = surface::Update::Kind::Foreach;
    u.pos = prev().pos;
    expect("(");
    u.var = ident();
    if (accept("in")) {
      u.lo = expr();
      expect("..");
      u.hi = expr();
      if (accept(":")) u.pred = expr();
    } else {
      static const std::pair<const char*, Op> cmps[] = {{"=", Op::Eq}, {"!=", Op::Ne}, {"<", Op::Lt},
                                                         {"<=", Op::Le}, {">", Op::Gt}, {">=", Op::Ge}};
      bool found = false;
      for (const auto& [sym, op] : cmps) {
        if (accept(sym)) {
          u.pred = Expr::apply(op, {Expr::var(u.var), add_expr()});
          found = true;
          break;
        }
      }
      if (!found) {
        expected_.insert("'in'");
        fail();
      }
    }
    expect(")");
    if (accept("{")) {
      if (!check("}")) {
        do {
          u.body.push_back(update_item());
        } while (accept(",") || accept("&"));
      }
      expect("}");
    } else {
      u.body.push_back(update_item());
    }
    return u;
  }

  // ---- expressions
  Expr expr() {
    Expr e = and_expr();
    while (accept("|") || accept("or")) e = Expr::apply(Op::Or, {std::move(e), and_expr()});
    return e;
  }
  Expr and_expr() {
    Expr e = not_expr();
    while (accept("&") || accept("and")) e = Expr::apply(Op::And, {std::move(e), not_expr()});
    return e;
  }
  Expr not_expr() {
    if (accept("!") || accept("not")) return Expr::apply(Op::Not, {not_expr()});
    return cmp_expr();
  }
  Expr cmp_expr() {
    Expr e = add_expr();
    static const std::pair<const char*, Op> cmps[] = {{"=", Op::Eq}, {"!=", Op::Ne}, {"<=", Op::Le},
                                                       {"<", Op::Lt}, {">=", Op::Ge}, {">", Op::Gt}};
    for (const auto& [sym, op] : cmps) {
      if (accept(sym)) return Expr::apply(op, {std::move(e), add_expr()});
    }
    return e;
  }
  Expr add_expr() {
    Expr e = mul_expr();
    for (;;) {
      if (accept("+")) e = Expr::apply(Op::Add, {std::move(e), mul_expr()});
      else if (accept("-")) e = Expr::apply(Op::Sub, {std::move(e), mul_expr()});
      else return e;
    }
  }
  Expr mul_expr() {
    Expr e = unary();
    for (;;) {
      if (accept("*")) e = Expr::apply(Op::Mul, {std::move(e), unary()});
      else if (accept("/")) e = Expr::apply(Op::Div, {std::move(e), unary()});
      else return e;
    }
  }
  Expr unary() {
    if (accept("-")) {
      if (peek().kind == TokKind::Int || peek().kind == TokKind::Real) {
        Expr lit = primary();
        auto& l = std::get<Expr::Literal>(lit.node);
        if (auto* i = std::get_if<std::int64_t>(&l.value)) *i = -*i;
        else std::get<double>(l.value) = -std::get<double>(l.value);
        return lit;
      }
      return Expr::apply(Op::Neg, {unary()});
    }
    return primary();
  }
  Expr primary() {
    const Token& t = peek();
    if (t.kind == TokKind::Int) {
      bump();
      errno = 0;
      const long long v = std::strtoll(prev().text.c_str(), nullptr, 10);
      if (errno == ERANGE) throw Error(ErrorCode::Syntax, "integer literal out of range", prev().pos);
      return Expr::integer(v);
    }
    if (t.kind == TokKind::Real) {
      bump();
      return Expr::real(std::strtod(prev().text.c_str(), nullptr));
    }
    if (accept("true")) return Expr::boolean(true);
    if (accept("false")) return Expr::boolean(false);
    if (accept("(")) {
      Expr e = expr();
      expect(")");
      return e;
    }
    static const std::pair<const char*, Op> funcs[] = {{"mod", Op::Mod}, {"min", Op::Min}, {"max", Op::Max}};
    for (const auto& [name, op] : funcs) {
      if (accept(name)) {
        expect("(");
        std::vector<Expr> args{expr()};
        while (accept(",")) args.push_back(expr());
        expect(")");
        const OpInfo& oi = info(op);
        const int n = static_cast<int>(args.size());
        if (n < oi.min_arity || (oi.max_arity >= 0 && n > oi.max_arity))
          throw Error(ErrorCode::Syntax, std::string(name) + " takes " + std::to_string(oi.min_arity) +
                                             (oi.max_arity < 0 ? " or more" : "") + " arguments",
                      prev().pos);
        return Expr::apply(op, std::move(args));
      }
    }
    if (is_ident(t)) {
      Expr::Var v{ident(), nullptr};
      if (accept("[")) {
        v.index = std::make_shared<const Expr>(expr());
        expect("]");
      }
      return Expr{std::move(v)};
    }
    expected_.insert("expression");
    fail();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<std::string> expected_;
};

}  // namespace

SurfaceProgram parse(std::string_view text) { return Parser(text).program(); }

Expr parse_expr(std::string_view text) { return Parser(text).standalone_expr(); }

}  // namespace chorprism
