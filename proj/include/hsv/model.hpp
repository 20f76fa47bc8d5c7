#pragma once

#include <hsv/program.hpp>

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace hsv {

// ---------------------------------------------------------------------------
// Source positions and errors
// ---------------------------------------------------------------------------

struct Span {
  int line = 1;
  int col = 1;
  std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

/// Error raised while reading a model file; the message starts with the
/// line:column of the offending token or subexpression.
class ModelError : public Error {
 public:
  ModelError(ErrorCode code, Span at, const std::string& msg) : Error(code, at.str() + ": " + msg), at_(at) {}
  const Span& at() const noexcept { return at_; }

 private:
  Span at_;
};

namespace model {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

struct Token {
  enum class T { Id, Num, Sym, End };
  T t = T::End;
  std::string text;
  Span at;

  bool is(std::string_view s) const { return t != T::Num && text == s; }
};

/// Unicode spellings accepted for the ASCII operators.
inline const std::vector<std::pair<std::string_view, std::string_view>>& unicode_aliases() {
  static const std::vector<std::pair<std::string_view, std::string_view>> table = {
      {"′", "'"},  {"↝", "~>"},     {"≤", "<="},     {"≥", ">="},  {"≠", "!="},
      {"∧", "&"},  {"∨", "or"},     {"¬", "!"},      {"⟹", "->"},  {"→", "->"},
      {"⇒", "->"}, {"⟺", "<->"},    {"↔", "<->"},    {"∀", "forall"},
      {"∃", "exists"}, {"τ", "tau"}, {"·", "*"},
  };
  return table;
}

inline std::vector<Token> lex(std::string_view src) {
  static const std::vector<std::string_view> multi = {"<->", "<=>", "->", "=>", "<=", ">=", "!=", "~>", ":=", "&&", "=="};
  static const std::string_view single = "()[]{},;:|'?=<>+-*/^!&.";
  std::vector<Token> out;
  std::size_t i = 0;
  Span at;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      unsigned char c = static_cast<unsigned char>(src[i]);
      if (c == '\n') {
        ++at.line;
        at.col = 1;
      } else if ((c & 0xC0) != 0x80) {
        ++at.col;
      }
    }
  };
  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Span start = at;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      out.push_back({Token::T::Id, std::string(src.substr(i, j - i)), start});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({Token::T::Num, std::string(src.substr(i, j - i)), start});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const auto& [u, ascii] : unicode_aliases()) {
      if (src.substr(i, u.size()) != u) continue;
      bool word = std::isalpha(static_cast<unsigned char>(ascii[0]));
      out.push_back({word ? Token::T::Id : Token::T::Sym, std::string(ascii), start});
      advance(u.size());
      matched = true;
      break;
    }
    if (matched) continue;
    for (auto m : multi) {
      if (src.substr(i, m.size()) != m) continue;
      out.push_back({Token::T::Sym, std::string(m), start});
      advance(m.size());
      matched = true;
      break;
    }
    if (matched) continue;
    if (single.find(c) != std::string_view::npos) {
      out.push_back({Token::T::Sym, std::string(1, c), start});
      advance(1);
      continue;
    }
    throw ModelError(ErrorCode::SyntaxError, start, "unexpected character '" + std::string(1, c) + "'");
  }
  out.push_back({Token::T::End, "", at});
  // normalise the alternative spellings
  for (auto& t : out) {
    if (t.t != Token::T::Sym) continue;
    if (t.text == "<=>") t.text = "<->";
    else if (t.text == "=>") t.text = "->";
    else if (t.text == "&&") t.text = "&";
    else if (t.text == "==") t.text = "=";
  }
  return out;
}

/// "12", "2.5" as exact rationals.
inline Rational numeral(const std::string& text) {
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(text);
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  Rational den(1);
  for (std::size_t k = dot + 1; k < text.size(); ++k) den *= 10;
  Rational q = Rational(digits) / den;
  q.canonicalize();
  return q;
}

inline bool reserved(const std::string& w) {
  static const std::set<std::string> words = {
      "skip", "abort", "if",  "then",   "else", "loop",      "inv",  "evol",  "on",     "or",
      "true", "false", "forall", "exists", "by", "using",    "for",  "lipschitz", "program", "flow",
      "goal", "dataspace", "constants", "variables", "ghost", "assumes", "inf"};
  return words.count(w) != 0;
}

// ---------------------------------------------------------------------------
// Untyped expression trees
// ---------------------------------------------------------------------------

struct Sx;
using SxPtr = std::shared_ptr<const Sx>;

struct Sx {
  enum class T { Num, Bool, Name, Call, Neg, Not, Bin, Pow, Index, Vec, Ite, Quant };
  T t = T::Num;
  std::string s;  // name, function, operator, quantifier
  Rational q;
  bool b = false;
  unsigned n = 0;
  Kind k;  // quantifier binder kind; b marks exists
  std::vector<SxPtr> a;
  Span at;
};

inline SxPtr sx(Sx node) { return std::make_shared<const Sx>(std::move(node)); }

// ---------------------------------------------------------------------------
// Elaboration: names resolve to state variables, bound logicals or free
// logicals; kinds flow from the known side of an operator to the other.
// ---------------------------------------------------------------------------

class Elaborator {
 public:
  /// free records the kinds of free logical variables, shared across the
  /// expressions of one goal.
  Elaborator(const Dataspace& ds, std::map<std::string, Kind>& free) : ds_(ds), free_(free) {}

  Expr run(const SxPtr& e, std::optional<Kind> hint) { return elab(*e, hint); }

 private:
  std::optional<Kind> bound(const std::string& name) const {
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
      if (it->first == name) return it->second;
    return std::nullopt;
  }

  std::optional<Kind> infer(const Sx& e) const {
    switch (e.t) {
      case Sx::T::Num:
      case Sx::T::Call:
      case Sx::T::Pow:
      case Sx::T::Index: return Kind::real();
      case Sx::T::Bool:
      case Sx::T::Not:
      case Sx::T::Quant: return Kind::boolean();
      case Sx::T::Vec: return Kind::vec(static_cast<unsigned>(e.a.size()));
      case Sx::T::Name: {
        if (auto k = bound(e.s)) return k;
        if (ds_.contains(e.s)) return ds_.decl(e.s).kind;
        if (e.s == tau_name()) return Kind::real();
        if (auto it = free_.find(e.s); it != free_.end()) return it->second;
        return std::nullopt;
      }
      case Sx::T::Neg: return infer(*e.a[0]);
      case Sx::T::Ite: {
        auto k = infer(*e.a[1]);
        return k ? k : infer(*e.a[2]);
      }
      case Sx::T::Bin: {
        const std::string& op = e.s;
        if (op == "+" || op == "-") {
          auto k = infer(*e.a[0]);
          return k ? k : infer(*e.a[1]);
        }
        if (op == "*") {
          auto l = infer(*e.a[0]), r = infer(*e.a[1]);
          if (r && r->is_vec()) return r;
          if (l && r) return Kind::real();
          return std::nullopt;
        }
        if (op == "/" || op == ".") return Kind::real();
        return Kind::boolean();
      }
    }
    return std::nullopt;
  }

  Expr elab(const Sx& e, std::optional<Kind> hint) {
    try {
      return node(e, hint);
    } catch (const ModelError&) {
      throw;
    } catch (const Error& err) {
      std::string w = err.what();
      auto p = w.find(": ");
      throw ModelError(err.code(), e.at, p == std::string::npos ? w : w.substr(p + 2));
    }
  }

  Expr node(const Sx& e, std::optional<Kind> hint) {
    const Kind real = Kind::real(), boolean = Kind::boolean();
    switch (e.t) {
      case Sx::T::Num: return lit(e.q);
      case Sx::T::Bool: return lit_bool(e.b);
      case Sx::T::Name: {
        if (auto k = bound(e.s)) return logical(e.s, *k);
        if (ds_.contains(e.s)) return var(e.s, ds_.decl(e.s).kind);
        if (e.s == tau_name()) return tau();
        auto it = free_.find(e.s);
        if (it == free_.end()) it = free_.emplace(e.s, hint.value_or(real)).first;
        return logical(e.s, it->second);
      }
      case Sx::T::Call: {
        if (e.s == "norm") {
          auto k = infer(*e.a[0]);
          if (!k || !k->is_vec()) fail(ErrorCode::KindError, "norm needs a vector of known dimension");
          return norm(elab(*e.a[0], k));
        }
        Expr x = elab(*e.a[0], real);
        if (e.s == "ln") return ln(x);
        if (e.s == "exp") return exp(x);
        if (e.s == "sin") return sin(x);
        if (e.s == "cos") return cos(x);
        if (e.s == "sqrt") return sqrt(x);
        throw ModelError(ErrorCode::UnknownName, e.at, "unknown function '" + e.s + "'");
      }
      case Sx::T::Neg: return -elab(*e.a[0], hint);
      case Sx::T::Not: return not_(elab(*e.a[0], boolean));
      case Sx::T::Pow: return pow(elab(*e.a[0], real), e.n);
      case Sx::T::Vec: {
        std::vector<Expr> xs;
        for (const auto& x : e.a) xs.push_back(elab(*x, real));
        return veclit(std::move(xs));
      }
      case Sx::T::Index: {
        const Sx& base = *e.a[0];
        if (base.t == Sx::T::Name && !bound(base.s) && ds_.contains(base.s)) {
          const Decl& d = ds_.decl(base.s);
          if (!d.kind.is_vec()) fail(ErrorCode::KindError, "'" + base.s + "' is not a vector");
          if (e.n < 1 || e.n > d.kind.dim)
            fail(ErrorCode::KindError, "coordinate " + std::to_string(e.n) + " of " + base.s + " : " + d.kind.str());
          return var(LensRef::coord(base.s, e.n), real);
        }
        auto k = infer(base);
        if (!k || !k->is_vec()) fail(ErrorCode::KindError, "indexing needs a vector of known dimension");
        return nth(elab(base, k), e.n);
      }
      case Sx::T::Ite: {
        auto k = infer(*e.a[1]);
        if (!k) k = infer(*e.a[2]);
        if (!k) k = hint.value_or(real);
        return ite(elab(*e.a[0], boolean), elab(*e.a[1], k), elab(*e.a[2], k));
      }
      case Sx::T::Quant: {
        bound_.emplace_back(e.s, e.k);
        Expr body = elab(*e.a[0], boolean);
        bound_.pop_back();
        return hsv::detail::quant(e.b ? Op::Exists : Op::Forall, e.s, e.k, body);
      }
      case Sx::T::Bin: return binary(e, hint);
    }
    fail(ErrorCode::SyntaxError, "bad expression");
  }

  Expr binary(const Sx& e, std::optional<Kind> hint) {
    const Kind real = Kind::real(), boolean = Kind::boolean();
    const std::string& op = e.s;
    const Sx& l = *e.a[0];
    const Sx& r = *e.a[1];
    if (op == "<->") return iff(elab(l, boolean), elab(r, boolean));
    if (op == "->") return implies(elab(l, boolean), elab(r, boolean));
    if (op == "or") return or_(elab(l, boolean), elab(r, boolean));
    if (op == "&") return and_(elab(l, boolean), elab(r, boolean));
    if (op == "=" || op == "!=") {
      auto k = infer(l);
      if (!k) k = infer(r);
      Expr a = elab(l, k.value_or(real)), b = elab(r, k.value_or(real));
      return op == "=" ? eq(a, b) : neq(a, b);
    }
    if (op == "<=") return le(elab(l, real), elab(r, real));
    if (op == "<") return lt(elab(l, real), elab(r, real));
    if (op == ">=") return ge(elab(l, real), elab(r, real));
    if (op == ">") return gt(elab(l, real), elab(r, real));
    if (op == "+" || op == "-") {
      auto k = infer(l);
      if (!k) k = infer(r);
      if (!k) k = hint && hint->is_numeric() ? hint : real;
      Expr a = elab(l, k), b = elab(r, k);
      return op == "+" ? a + b : a - b;
    }
    if (op == "*") {
      auto kl = infer(l).value_or(real);
      auto kr = infer(r);
      if (!kr) kr = kl.is_real() && hint && hint->is_vec() ? *hint : real;
      return elab(l, kl) * elab(r, kr);
    }
    if (op == "/") return elab(l, real) / elab(r, real);
    if (op == ".") {
      auto k = infer(l);
      if (!k) k = infer(r);
      if (!k || !k->is_vec()) fail(ErrorCode::KindError, "inner product needs vectors of known dimension");
      return inner(elab(l, k), elab(r, k));
    }
    fail(ErrorCode::SyntaxError, "unknown operator " + op);
  }

  const Dataspace& ds_;
  std::map<std::string, Kind>& free_;
  std::vector<std::pair<std::string, Kind>> bound_;
};

}  // namespace model

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

struct Assumption {
  std::string name;
  Expr expr;
  Span at;
};

struct ProgramDef {
  std::string name;
  Program body;
  Span at;
};

/// Candidate closed-form solution for a named ODE program.
struct FlowDef {
  std::string name;
  std::string target;
  Ode ode;
  Subst flow;
  std::optional<Rational> lipschitz;
  Span at;
};

enum class MethodTag { Wp, DInduct, DInductAuto, DInductMega, DWeaken, DGhost, DProve, Flow };

struct Method {
  MethodTag tag = MethodTag::Wp;
  std::string ghost;  // dGhost variable
  Expr ghost_inv;
  Rational ghost_k;
  std::string flow;  // flow(ID)
};

struct GoalDef {
  std::string name;
  Expr pre;
  std::string program;
  Expr post;
  Method method;
  std::vector<std::string> facts;  // `using` list
  Span at;
};

struct ModelFile {
  std::optional<std::string> dataspace_name;
  DataspacePtr ds = std::make_shared<Dataspace>();
  std::vector<Assumption> assumptions;
  std::vector<ProgramDef> programs;
  std::vector<FlowDef> flows;
  std::vector<GoalDef> goals;

  template <class T>
  static const T* find_in(const std::vector<T>& xs, const std::string& name) {
    for (const auto& x : xs)
      if (x.name == name) return &x;
    return nullptr;
  }
  const ProgramDef* program(const std::string& n) const { return find_in(programs, n); }
  const FlowDef* flow(const std::string& n) const { return find_in(flows, n); }
  const GoalDef* goal(const std::string& n) const { return find_in(goals, n); }
  const Assumption* assumption(const std::string& n) const { return find_in(assumptions, n); }

  std::vector<Expr> facts() const {
    std::vector<Expr> out;
    for (const auto& a : assumptions) out.push_back(a.expr);
    return out;
  }
};

inline const char* method_name(MethodTag t) {
  switch (t) {
    case MethodTag::Wp: return "wp";
    case MethodTag::DInduct: return "dInduct";
    case MethodTag::DInductAuto: return "dInductAuto";
    case MethodTag::DInductMega: return "dInductMega";
    case MethodTag::DWeaken: return "dWeaken";
    case MethodTag::DGhost: return "dGhost";
    case MethodTag::DProve: return "dProve";
    case MethodTag::Flow: return "flow";
  }
  return "?";
}

namespace model {

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  ModelFile file() {
    auto ds = std::make_shared<Dataspace>();
    ds_ = ds.get();
    if (at("dataspace")) dataspace(*ds);
    m_.ds = ds;
    while (peek().t != Token::T::End) {
      if (accept("program")) {
        program_def();
      } else if (accept("flow")) {
        flow_def();
      } else if (accept("goal")) {
        goal_def();
      } else if (at("dataspace")) {
        error("the dataspace must come first");
      } else {
        error("expected 'program', 'flow' or 'goal'");
      }
    }
    return std::move(m_);
  }

  Expr standalone_expr(const Dataspace& ds, std::optional<Kind> hint) {
    std::map<std::string, Kind> free;
    Expr e = Elaborator(ds, free).run(expr(), hint);
    expect_end();
    return e;
  }

  Program standalone_program(const Dataspace& ds) {
    ds_ = &ds;
    Program p = prog();
    expect_end();
    return p;
  }

 private:
  // ---- tokens ----
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(std::string_view s) const { return peek().is(s); }
  bool accept(std::string_view s) {
    if (!at(s)) return false;
    ++pos_;
    return true;
  }
  const Token& expect(std::string_view s) {
    if (!at(s)) error("expected '" + std::string(s) + "'");
    return toks_[pos_++];
  }
  void expect_end() {
    if (peek().t != Token::T::End) error("expected end of input");
  }
  [[noreturn]] void error(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.t == Token::T::End ? "end of input" : "'" + t.text + "'";
    throw ModelError(ErrorCode::SyntaxError, t.at, msg + ", found " + found);
  }
  const Token& ident(const char* what) {
    const Token& t = peek();
    if (t.t != Token::T::Id || reserved(t.text)) error(std::string("expected ") + what);
    ++pos_;
    return t;
  }
  unsigned natural() {
    const Token& t = peek();
    if (t.t != Token::T::Num || t.text.find('.') != std::string::npos) error("expected a natural number");
    ++pos_;
    return static_cast<unsigned>(std::stoul(t.text));
  }
  Rational rat() {
    bool neg = accept("-");
    if (peek().t != Token::T::Num) error("expected a number");
    Rational q = numeral(toks_[pos_++].text);
    if (accept("/")) {
      if (peek().t != Token::T::Num) error("expected a denominator");
      Rational d = numeral(toks_[pos_++].text);
      if (d == 0) throw ModelError(ErrorCode::SyntaxError, toks_[pos_ - 1].at, "zero denominator");
      q /= d;
    }
    return neg ? Rational(-q) : q;
  }
  Kind kind() {
    if (accept("real")) return Kind::real();
    if (accept("bool")) return Kind::boolean();
    if (accept("vec")) {
      expect("[");
      unsigned n = natural();
      expect("]");
      return Kind::vec(n);
    }
    error("expected a kind (real, bool or vec[N])");
  }
  bool top_level() const {
    return peek().t == Token::T::End || at("program") || at("flow") || at("goal") || at("dataspace");
  }

  /// Runs f, attaching the span to errors that carry none.
  template <class F>
  auto spanned(Span s, F f) -> decltype(f()) {
    try {
      return f();
    } catch (const ModelError&) {
      throw;
    } catch (const Error& err) {
      std::string w = err.what();
      auto p = w.find(": ");
      throw ModelError(err.code(), s, p == std::string::npos ? w : w.substr(p + 2));
    }
  }

  // ---- expressions ----
  static SxPtr bin(const std::string& op, SxPtr l, SxPtr r, Span at) {
    return sx({Sx::T::Bin, op, 0, false, 0, {}, {std::move(l), std::move(r)}, at});
  }

  SxPtr expr() { return iff(); }

  SxPtr iff() {
    auto l = imp();
    if (at("<->")) {
      Span s = toks_[pos_++].at;
      return bin("<->", l, imp(), s);
    }
    return l;
  }
  SxPtr imp() {
    auto l = disj();
    if (at("->")) {
      Span s = toks_[pos_++].at;
      return bin("->", l, imp(), s);
    }
    return l;
  }
  SxPtr disj() {
    auto l = conj();
    while (at("or")) {
      Span s = toks_[pos_++].at;
      l = bin("or", l, conj(), s);
    }
    return l;
  }
  SxPtr conj() {
    auto l = negation();
    while (at("&")) {
      Span s = toks_[pos_++].at;
      l = bin("&", l, negation(), s);
    }
    return l;
  }
  SxPtr negation() {
    if (at("!")) {
      Span s = toks_[pos_++].at;
      return sx({Sx::T::Not, "!", 0, false, 0, {}, {negation()}, s});
    }
    return comparison();
  }
  SxPtr comparison() {
    auto l = additive();
    for (const char* op : {"=", "!=", "<=", "<", ">=", ">"}) {
      if (!at(op)) continue;
      Span s = toks_[pos_++].at;
      return bin(op, l, additive(), s);
    }
    return l;
  }
  SxPtr additive() {
    auto l = multiplicative();
    while (at("+") || at("-")) {
      const Token& t = toks_[pos_++];
      l = bin(t.text, l, multiplicative(), t.at);
    }
    return l;
  }
  SxPtr multiplicative() {
    auto l = unary();
    while (at("*") || at("/") || at(".")) {
      const Token& t = toks_[pos_++];
      l = bin(t.text, l, unary(), t.at);
    }
    return l;
  }
  SxPtr unary() {
    if (at("-")) {
      Span s = toks_[pos_++].at;
      return sx({Sx::T::Neg, "-", 0, false, 0, {}, {unary()}, s});
    }
    return power();
  }
  SxPtr power() {
    auto b = postfix();
    while (at("^")) {
      Span s = toks_[pos_++].at;
      b = sx({Sx::T::Pow, "^", 0, false, natural(), {}, {b}, s});
    }
    return b;
  }
  SxPtr postfix() {
    auto a = atom();
    while (at("[")) {
      Span s = toks_[pos_++].at;
      unsigned n = natural();
      expect("]");
      a = sx({Sx::T::Index, "[]", 0, false, n, {}, {a}, s});
    }
    return a;
  }
  /// "(-1)", "(1/2)", "(-3/4)" written without spaces are literals.
  std::optional<Rational> tight_numeral() {
    std::vector<std::size_t> idx{pos_};
    std::size_t k = pos_ + 1;
    auto tok = [&](std::size_t i) -> const Token& { return toks_[std::min(i, toks_.size() - 1)]; };
    bool neg = tok(k).is("-");
    if (neg) idx.push_back(k++);
    if (tok(k).t != Token::T::Num) return std::nullopt;
    idx.push_back(k++);
    bool frac = tok(k).is("/") && tok(k + 1).t == Token::T::Num;
    if (frac) {
      idx.push_back(k++);
      idx.push_back(k++);
    }
    if (!tok(k).is(")")) return std::nullopt;
    idx.push_back(k);
    for (std::size_t i = 1; i < idx.size(); ++i) {
      const Token &a = toks_[idx[i - 1]], &b = toks_[idx[i]];
      if (a.at.line != b.at.line || b.at.col != a.at.col + static_cast<int>(a.text.size())) return std::nullopt;
    }
    Rational q = numeral(toks_[idx[neg ? 2 : 1]].text);
    if (frac) {
      Rational d = numeral(toks_[idx[neg ? 4 : 3]].text);
      if (d == 0) return std::nullopt;
      q /= d;
    }
    pos_ = k + 1;
    return neg ? Rational(-q) : q;
  }

  SxPtr atom() {
    const Token& t = peek();
    Span s = t.at;
    if (t.t == Token::T::Num) {
      ++pos_;
      return sx({Sx::T::Num, "", numeral(t.text), false, 0, {}, {}, s});
    }
    if (accept("true")) return sx({Sx::T::Bool, "", 0, true, 0, {}, {}, s});
    if (accept("false")) return sx({Sx::T::Bool, "", 0, false, 0, {}, {}, s});
    if (at("(")) {
      if (auto q = tight_numeral()) return sx({Sx::T::Num, "", *q, false, 0, {}, {}, s});
      ++pos_;
      auto e = expr();
      expect(")");
      return e;
    }
    if (accept("[")) {
      std::vector<SxPtr> xs{expr()};
      while (accept(",")) xs.push_back(expr());
      expect("]");
      return sx({Sx::T::Vec, "", 0, false, 0, {}, std::move(xs), s});
    }
    if (accept("if")) {
      auto c = expr();
      expect("then");
      auto a = expr();
      expect("else");
      auto b = expr();
      return sx({Sx::T::Ite, "if", 0, false, 0, {}, {c, a, b}, s});
    }
    if (at("forall") || at("exists")) {
      bool ex = toks_[pos_++].text == "exists";
      std::string name = ident("a bound variable").text;
      Kind k = accept(":") ? kind() : Kind::real();
      expect(".");
      return sx({Sx::T::Quant, name, 0, ex, 0, k, {expr()}, s});
    }
    if (t.t == Token::T::Id && !reserved(t.text)) {
      ++pos_;
      if (accept("(")) {
        auto arg = expr();
        expect(")");
        return sx({Sx::T::Call, t.text, 0, false, 0, {}, {arg}, s});
      }
      return sx({Sx::T::Name, t.text, 0, false, 0, {}, {}, s});
    }
    error("expected an expression");
  }

  Expr typed(const SxPtr& e, std::optional<Kind> hint, std::map<std::string, Kind>& free) {
    return Elaborator(*ds_, free).run(e, hint);
  }
  Expr formula(std::map<std::string, Kind>& free) { return typed(expr(), Kind::boolean(), free); }

  // ---- programs ----
  Program prog() {
    Program p = seq();
    while (accept("|")) p = Program::choice(p, seq());
    return p;
  }
  Program seq() {
    Program p = unit();
    while (accept(";")) {
      if (top_level() || at(")")) break;  // trailing separator
      p = Program::seq(p, unit());
    }
    return p;
  }

  LensRef lens() {
    const Token& t = ident("a variable");
    if (!ds_->contains(t.text)) throw ModelError(ErrorCode::UnknownName, t.at, "undeclared variable '" + t.text + "'");
    if (!at("[")) return LensRef::var(t.text);
    ++pos_;
    unsigned n = natural();
    expect("]");
    LensRef l = LensRef::coord(t.text, n);
    spanned(t.at, [&] {
      check_lens(l, *ds_);
      return 0;
    });
    return l;
  }

  /// True when the parenthesis at the cursor closes before ':='.
  bool tuple_assignment() const {
    std::size_t depth = 0, k = 0;
    for (;; ++k) {
      const Token& t = peek(k);
      if (t.t == Token::T::End) return false;
      if (t.is("(")) ++depth;
      if (t.is(")") && --depth == 0) return peek(k + 1).is(":=");
    }
  }

  Program unit() {
    Span s = peek().at;
    std::map<std::string, Kind> free;
    if (accept("skip")) return Program::skip();
    if (accept("abort")) return Program::abort();
    if (accept("?")) {
      auto e = expr();
      return spanned(s, [&] { return Program::test(typed(e, Kind::boolean(), free)); });
    }
    if (accept("if")) {
      Expr c = formula(free);
      expect("then");
      Program p = unit();
      expect("else");
      Program q = unit();
      return Program::if_(c, p, q);
    }
    if (accept("loop")) {
      Program body = unit();
      Expr inv;
      if (accept("inv")) inv = formula(free);
      return Program::loop(body, inv);
    }
    if (at("(") && tuple_assignment()) {
      ++pos_;
      std::vector<LensRef> ls;
      if (!at(")")) {
        ls.push_back(lens());
        while (accept(",")) ls.push_back(lens());
      }
      expect(")");
      expect(":=");
      expect("(");
      std::vector<std::pair<Span, SxPtr>> es;
      if (!at(")")) {
        es.emplace_back(peek().at, expr());
        while (accept(",")) es.emplace_back(peek().at, expr());
      }
      expect(")");
      if (es.size() != ls.size())
        throw ModelError(ErrorCode::SyntaxError, s,
                         std::to_string(ls.size()) + " targets but " + std::to_string(es.size()) + " values");
      Subst sub;
      for (std::size_t i = 0; i < ls.size(); ++i)
        spanned(es[i].first, [&] {
          sub.set(ls[i], typed(es[i].second, lens_kind(ls[i], *ds_), free));
          return 0;
        });
      return Program::assign(sub);
    }
    if (accept("(")) {
      Program p = prog();
      expect(")");
      return p;
    }
    if (at("{")) return evolution();
    const Token& t = peek();
    if (t.t == Token::T::Id && !reserved(t.text)) {
      bool assigns = peek(1).is(":=") || (peek(1).is("[") && peek(3).is("]") && peek(4).is(":="));
      if (assigns) {
        LensRef l = lens();
        expect(":=");
        Span es = peek().at;
        auto e = expr();
        return spanned(es, [&] {
          Subst sub;
          sub.set(l, typed(e, lens_kind(l, *ds_), free));
          return Program::assign(sub);
        });
      }
      ++pos_;
      if (const ProgramDef* d = m_.program(t.text)) return d->body;
      throw ModelError(ErrorCode::UnknownName, t.at, "no program named '" + t.text + "'");
    }
    error("expected a program");
  }

  Duration duration(std::map<std::string, Kind>& free) {
    if (accept("[")) {
      Rational lo = rat();
      expect(",");
      if (accept("inf")) {
        expect(")");
        return Duration::interval(lo, std::nullopt);
      }
      Rational hi = rat();
      expect("]");
      return Duration::interval(lo, hi);
    }
    return Duration::bound(formula(free));
  }

  Program evolution() {
    Span s = expect("{").at;
    std::map<std::string, Kind> free;
    bool is_evol = accept("evol");
    Subst sub;
    do {
      LensRef l = lens();
      if (!is_evol) expect("'");
      expect("=");
      Span es = peek().at;
      auto e = expr();
      spanned(es, [&] {
        if (sub.find(l)) fail(ErrorCode::DuplicateName, l.str() + " updated twice");
        sub.set(l, typed(e, lens_kind(l, *ds_), free));
        return 0;
      });
    } while (accept(","));
    Expr guard = tt();
    Duration dur;
    if (accept("|")) guard = formula(free);
    if (accept("on")) dur = duration(free);
    expect("}");
    return spanned(s, [&] {
      if (is_evol) return Program::evol(Evol{sub.frame(), sub, guard, dur});
      Ode o;
      o.frame = sub.frame();
      o.rhs = sub;
      o.guard = guard;
      o.dur = dur;
      return Program::ode(o);
    });
  }

  // ---- model sections ----
  void dataspace(Dataspace& ds) {
    expect("dataspace");
    m_.dataspace_name = ident("a dataspace name").text;
    ds = Dataspace(*m_.dataspace_name);
    expect("{");
    std::optional<Role> role;
    bool assumes = false;
    struct Pending {
      std::string name;
      SxPtr e;
      Span at;
    };
    std::vector<Pending> pending;
    while (!accept("}")) {
      if (accept("constants")) role = Role::Constant, assumes = false;
      else if (accept("variables")) role = Role::Variable, assumes = false;
      else if (accept("ghost")) role = Role::Ghost, assumes = false;
      else if (accept("assumes")) role.reset(), assumes = true;
      if (at("}") || at("constants") || at("variables") || at("ghost") || at("assumes")) continue;
      if (assumes) {
        const Token& n = ident("an assumption name");
        for (const auto& p : pending)
          if (p.name == n.text) throw ModelError(ErrorCode::DuplicateName, n.at, "assumption '" + n.text + "' repeated");
        expect(":");
        pending.push_back({n.text, expr(), n.at});
      } else if (role) {
        std::vector<Token> names{ident("a variable name")};
        while (accept(",")) names.push_back(ident("a variable name"));
        Kind k = accept(":") ? kind() : Kind::real();
        for (const auto& n : names) spanned(n.at, [&] {
            ds.declare(n.text, k, *role);
            return 0;
          });
      } else {
        error("expected 'constants', 'variables', 'ghost' or 'assumes'");
      }
      if (!at("}")) expect(";");
    }
    for (const auto& p : pending) {
      std::map<std::string, Kind> free;
      m_.assumptions.push_back({p.name, typed(p.e, Kind::boolean(), free), p.at});
    }
  }

  template <class T>
  void unique(const std::vector<T>& xs, const Token& n, const char* what) {
    if (ModelFile::find_in(xs, n.text))
      throw ModelError(ErrorCode::DuplicateName, n.at, std::string(what) + " '" + n.text + "' defined twice");
  }

  void program_def() {
    const Token& n = ident("a program name");
    unique(m_.programs, n, "program");
    expect("=");
    Program p = prog();
    spanned(n.at, [&] {
      check_program(p, *ds_);
      return 0;
    });
    m_.programs.push_back({n.text, p, n.at});
  }

  void flow_def() {
    const Token& n = ident("a flow name");
    unique(m_.flows, n, "flow");
    expect("for");
    const Token& target = ident("an ODE program name");
    const ProgramDef* d = m_.program(target.text);
    if (!d) throw ModelError(ErrorCode::UnknownName, target.at, "no program named '" + target.text + "'");
    if (!d->body.is(Program::Tag::Ode))
      throw ModelError(ErrorCode::NotAnODE, target.at, "'" + target.text + "' is not an ODE");
    expect("=");
    expect("[");
    Subst phi;
    std::map<std::string, Kind> free;
    do {
      LensRef l = lens();
      expect("~>");
      Span es = peek().at;
      auto e = expr();
      spanned(es, [&] {
        phi.set(l, typed(e, lens_kind(l, *ds_), free));
        return 0;
      });
    } while (accept(","));
    expect("]");
    std::optional<Rational> lip;
    if (accept("lipschitz")) lip = rat();
    m_.flows.push_back({n.text, target.text, d->body.ode(), phi, lip, n.at});
  }

  void goal_def() {
    const Token& n = ident("a goal name");
    unique(m_.goals, n, "goal");
    expect(":");
    std::map<std::string, Kind> free;
    GoalDef g;
    g.name = n.text;
    g.at = n.at;
    expect("{");
    g.pre = formula(free);
    expect("}");
    const Token& p = ident("a program name");
    if (!m_.program(p.text)) throw ModelError(ErrorCode::UnknownName, p.at, "no program named '" + p.text + "'");
    g.program = p.text;
    expect("{");
    g.post = formula(free);
    expect("}");
    expect("by");
    const Token& m = peek();
    ++pos_;
    static const std::vector<std::pair<std::string, MethodTag>> plain = {
        {"wp", MethodTag::Wp},           {"dInduct", MethodTag::DInduct}, {"dInductAuto", MethodTag::DInductAuto},
        {"dInductMega", MethodTag::DInductMega}, {"dWeaken", MethodTag::DWeaken}, {"dProve", MethodTag::DProve}};
    bool known = false;
    for (const auto& [word, tag] : plain)
      if (m.is(word)) g.method.tag = tag, known = true;
    if (m.is("dGhost")) {
      known = true;
      g.method.tag = MethodTag::DGhost;
      expect("(");
      const Token& y = ident("a ghost variable");
      if (!ds_->contains(y.text)) throw ModelError(ErrorCode::UnknownName, y.at, "undeclared ghost '" + y.text + "'");
      g.method.ghost = y.text;
      expect(",");
      g.method.ghost_inv = formula(free);
      expect(",");
      g.method.ghost_k = rat();
      expect(")");
    } else if (m.is("flow")) {
      known = true;
      g.method.tag = MethodTag::Flow;
      expect("(");
      const Token& f = ident("a flow name");
      if (!m_.flow(f.text)) throw ModelError(ErrorCode::UnknownName, f.at, "no flow named '" + f.text + "'");
      g.method.flow = f.text;
      expect(")");
    }
    if (!known) {
      --pos_;
      error("expected a method (wp, dInduct, dInductAuto, dInductMega, dWeaken, dGhost, dProve, flow)");
    }
    if (accept("using")) {
      do {
        const Token& f = ident("an assumption name");
        if (!m_.assumption(f.text))
          throw ModelError(ErrorCode::UnknownName, f.at, "no assumption named '" + f.text + "'");
        g.facts.push_back(f.text);
      } while (accept(","));
    }
    m_.goals.push_back(std::move(g));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Dataspace* ds_ = nullptr;
  ModelFile m_;
};

}  // namespace model

inline ModelFile parse_model(std::string_view text) { return model::Parser(text).file(); }

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

/// One expression over ds; free names become logical variables.
inline Expr parse_expr(std::string_view text, const Dataspace& ds, std::optional<Kind> hint = Kind::boolean()) {
  return model::Parser(text).standalone_expr(ds, hint);
}

inline Program parse_program(std::string_view text, const Dataspace& ds) {
  return model::Parser(text).standalone_program(ds);
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

inline std::string to_string(const Duration& d) {
  switch (d.tag) {
    case Duration::Tag::NonNeg: return "[0, inf)";
    case Duration::Tag::Interval:
      return "[" + to_string(d.lo) + ", " + (d.hi_infinite ? "inf)" : to_string(d.hi) + "]");
    case Duration::Tag::Bound: return to_string(d.pred);
  }
  return "?";
}

namespace detail {

inline std::string evolution_tail(const Expr& guard, const Duration& dur) {
  std::string out;
  if (!guard.is_true()) out += " | " + to_string(guard);
  if (!dur.is_default()) out += " on " + to_string(dur);
  return out + "}";
}

/// Levels: 1 choice, 2 sequence, 3 units.
inline std::string print_program(const Program& p, int min_level) {
  auto wrap = [](const Program& q, int level) {
    int own = q.is(Program::Tag::Choice) ? 1 : q.is(Program::Tag::Seq) ? 2 : 3;
    std::string s = print_program(q, level);
    return own < level ? "(" + s + ")" : s;
  };
  switch (p.tag()) {
    case Program::Tag::Skip: return "skip";
    case Program::Tag::Abort: return "abort";
    case Program::Tag::Test: return "?" + to_string(p.cond());
    case Program::Tag::Assign: {
      const auto& es = p.subst().entries();
      if (es.size() == 1) return es[0].first.str() + " := " + to_string(es[0].second);
      std::string ls, rs;
      for (std::size_t i = 0; i < es.size(); ++i) {
        ls += (i ? ", " : "") + es[i].first.str();
        rs += (i ? ", " : "") + to_string(es[i].second);
      }
      return "(" + ls + ") := (" + rs + ")";
    }
    case Program::Tag::Seq: return wrap(p.kid(0), 2) + "; " + wrap(p.kid(1), 3);
    case Program::Tag::Choice: return wrap(p.kid(0), 1) + " | " + wrap(p.kid(1), 2);
    case Program::Tag::If:
      return "if " + to_string(p.cond()) + " then " + wrap(p.kid(0), 3) + " else " + wrap(p.kid(1), 3);
    case Program::Tag::Loop: {
      std::string out = "loop " + wrap(p.kid(0), 3);
      if (p.invariant().valid()) out += " inv " + to_string(p.invariant());
      return out;
    }
    case Program::Tag::Ode: {
      const Ode& o = p.ode();
      std::string out = "{";
      const auto& es = o.rhs.entries();
      for (std::size_t i = 0; i < es.size(); ++i)
        out += (i ? ", " : "") + es[i].first.str() + "' = " + to_string(es[i].second);
      return out + evolution_tail(o.guard, o.dur);
    }
    case Program::Tag::Evol: {
      const Evol& o = p.evol();
      std::string out = "{evol ";
      const auto& es = o.flow.entries();
      for (std::size_t i = 0; i < es.size(); ++i)
        out += (i ? ", " : "") + es[i].first.str() + " = " + to_string(es[i].second);
      return out + evolution_tail(o.guard, o.dur);
    }
  }
  (void)min_level;
  return "?";
}

}  // namespace detail

inline std::string to_string(const Program& p) { return detail::print_program(p, 0); }

inline std::string method_str(const Method& m) {
  switch (m.tag) {
    case MethodTag::DGhost:
      return "dGhost(" + m.ghost + ", " + to_string(m.ghost_inv) + ", " + to_string(m.ghost_k) + ")";
    case MethodTag::Flow: return "flow(" + m.flow + ")";
    default: return method_name(m.tag);
  }
}

inline std::string print_model(const ModelFile& m) {
  std::string out;
  if (m.dataspace_name) {
    out += "dataspace " + *m.dataspace_name + " {\n";
    for (const auto& d : m.ds->decls()) {
      const char* section = d.role == Role::Constant ? "constants" : d.role == Role::Ghost ? "ghost" : "variables";
      out += "  " + std::string(section) + " " + d.name + " : " + d.kind.str() + ";\n";
    }
    for (const auto& a : m.assumptions) out += "  assumes " + a.name + " : " + to_string(a.expr) + ";\n";
    out += "}\n";
  }
  for (const auto& p : m.programs) out += "program " + p.name + " = " + to_string(p.body) + "\n";
  for (const auto& f : m.flows) {
    out += "flow " + f.name + " for " + f.target + " = [";
    const auto& es = f.flow.entries();
    for (std::size_t i = 0; i < es.size(); ++i)
      out += (i ? ", " : "") + es[i].first.str() + " ~> " + to_string(es[i].second);
    out += "]";
    if (f.lipschitz) out += " lipschitz " + to_string(*f.lipschitz);
    out += "\n";
  }
  for (const auto& g : m.goals) {
    out += "goal " + g.name + " : {" + to_string(g.pre) + "} " + g.program + " {" + to_string(g.post) + "} by " +
           method_str(g.method);
    for (std::size_t i = 0; i < g.facts.size(); ++i) out += (i ? ", " : " using ") + g.facts[i];
    out += "\n";
  }
  return out;
}

/// Structural equality of two parsed models (spans ignored).
inline bool same_model(const ModelFile& a, const ModelFile& b) {
  auto same_expr = [](const Expr& x, const Expr& y) { return x.valid() == y.valid() && (!x.valid() || same(x, y)); };
  if (a.dataspace_name != b.dataspace_name || a.ds->size() != b.ds->size()) return false;
  for (std::size_t i = 0; i < a.ds->size(); ++i) {
    const Decl &x = a.ds->decls()[i], &y = b.ds->decls()[i];
    if (x.name != y.name || !(x.kind == y.kind) || x.role != y.role) return false;
  }
  if (a.assumptions.size() != b.assumptions.size() || a.programs.size() != b.programs.size() ||
      a.flows.size() != b.flows.size() || a.goals.size() != b.goals.size())
    return false;
  for (std::size_t i = 0; i < a.assumptions.size(); ++i)
    if (a.assumptions[i].name != b.assumptions[i].name || !same(a.assumptions[i].expr, b.assumptions[i].expr))
      return false;
  for (std::size_t i = 0; i < a.programs.size(); ++i)
    if (a.programs[i].name != b.programs[i].name || !same(a.programs[i].body, b.programs[i].body)) return false;
  for (std::size_t i = 0; i < a.flows.size(); ++i) {
    const FlowDef &x = a.flows[i], &y = b.flows[i];
    if (x.name != y.name || x.target != y.target || !(x.flow == y.flow) || x.lipschitz != y.lipschitz) return false;
  }
  for (std::size_t i = 0; i < a.goals.size(); ++i) {
    const GoalDef &x = a.goals[i], &y = b.goals[i];
    if (x.name != y.name || x.program != y.program || !same(x.pre, y.pre) || !same(x.post, y.post) ||
        x.facts != y.facts || x.method.tag != y.method.tag || x.method.ghost != y.method.ghost ||
        !same_expr(x.method.ghost_inv, y.method.ghost_inv) || x.method.ghost_k != y.method.ghost_k ||
        x.method.flow != y.method.flow)
      return false;
  }
  return true;
}

}  // namespace hsv
