#pragma once

#include <hsv/error.hpp>
#include <hsv/rational.hpp>
#include <hsv/store.hpp>
#include <hsv/value.hpp>

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace hsv {

enum class Op {
  Rat, Bool, Var, Logical,
  Neg, Add, Sub, Mul, Div, Pow,
  Ln, Exp, Sin, Cos, Sqrt,
  Norm, Inner, ScalarMul, VecLit, Nth,
  Eq, Neq, Le, Lt, Ge, Gt,
  And, Or, Not, Implies, Iff,
  Ite, Exists, Forall,
};

/// Immutable, shared expression tree. Every node carries its kind, which the
/// builders below check on construction.
class Expr {
 public:
  Expr() = default;

  Op op() const { return node_->op; }
  const Kind& kind() const { return node_->kind; }
  const Rational& num() const { return node_->num; }
  bool flag() const { return node_->flag; }
  const LensRef& lens() const { return node_->lens; }
  const std::string& name() const { return node_->name; }
  /// Exponent of Pow, coordinate of Nth.
  unsigned n() const { return node_->n; }
  /// Kind of the variable bound by Exists/Forall.
  const Kind& bound_kind() const { return node_->bound_kind; }
  const std::vector<Expr>& args() const { return node_->args; }
  const Expr& arg(std::size_t i) const { return node_->args.at(i); }

  bool valid() const { return node_ != nullptr; }
  const void* identity() const { return node_.get(); }

  bool is(Op o) const { return node_->op == o; }
  bool is_rat() const { return is(Op::Rat); }
  bool is_rat(const Rational& q) const { return is(Op::Rat) && num() == q; }
  bool is_true() const { return is(Op::Bool) && flag(); }
  bool is_false() const { return is(Op::Bool) && !flag(); }

  struct Node {
    Op op = Op::Rat;
    Kind kind;
    Rational num;
    bool flag = false;
    LensRef lens;
    std::string name;
    unsigned n = 0;
    Kind bound_kind;
    std::vector<Expr> args;
  };

  static Expr make(Node n) {
    Expr e;
    e.node_ = std::make_shared<const Node>(std::move(n));
    return e;
  }

 private:
  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace detail {
inline Expr::Node node(Op op, Kind k, std::vector<Expr> args = {}) {
  Expr::Node n;
  n.op = op;
  n.kind = k;
  n.args = std::move(args);
  return n;
}
[[noreturn]] inline void kind_error(const std::string& what) { fail(ErrorCode::KindError, what); }
inline void need_real(const Expr& e, const char* ctx) {
  if (!e.kind().is_real()) kind_error(std::string(ctx) + " needs a real operand, got " + e.kind().str());
}
inline void need_bool(const Expr& e, const char* ctx) {
  if (!e.kind().is_bool()) kind_error(std::string(ctx) + " needs a boolean operand, got " + e.kind().str());
}
}  // namespace detail

inline Expr lit(const Rational& q) {
  auto n = detail::node(Op::Rat, Kind::real());
  n.num = q;
  n.num.canonicalize();
  return Expr::make(std::move(n));
}
inline Expr lit(long v) { return lit(Rational(v)); }
inline Expr lit(int v) { return lit(Rational(v)); }
inline Expr lit_bool(bool b) {
  auto n = detail::node(Op::Bool, Kind::boolean());
  n.flag = b;
  return Expr::make(std::move(n));
}
inline Expr tt() { return lit_bool(true); }
inline Expr ff() { return lit_bool(false); }

/// Read of a primitive lens whose viewed value has kind k.
inline Expr var(const LensRef& l, Kind k) {
  if (!l.is_primitive()) detail::kind_error("variable read of a lens sum " + l.str());
  if (l.tag == LensRef::Tag::Coord && !k.is_real()) detail::kind_error("coordinate read must be real");
  auto n = detail::node(Op::Var, k);
  n.lens = l;
  return Expr::make(std::move(n));
}
inline Expr var(const std::string& name, Kind k = Kind::real()) { return var(LensRef::var(name), k); }
/// Read of a declared variable (kind looked up in the dataspace).
inline Expr var(const LensRef& l, const Dataspace& ds) { return var(l, lens_kind(l, ds)); }

inline Expr logical(const std::string& name, Kind k = Kind::real()) {
  auto n = detail::node(Op::Logical, k);
  n.name = name;
  return Expr::make(std::move(n));
}

inline Expr operator-(const Expr& a) {
  if (!a.kind().is_numeric()) detail::kind_error("negation of a boolean");
  return Expr::make(detail::node(Op::Neg, a.kind(), {a}));
}
inline Expr operator+(const Expr& a, const Expr& b) {
  if (!a.kind().is_numeric() || !(a.kind() == b.kind()))
    detail::kind_error("cannot add " + a.kind().str() + " and " + b.kind().str());
  return Expr::make(detail::node(Op::Add, a.kind(), {a, b}));
}
inline Expr operator-(const Expr& a, const Expr& b) {
  if (!a.kind().is_numeric() || !(a.kind() == b.kind()))
    detail::kind_error("cannot subtract " + b.kind().str() + " from " + a.kind().str());
  return Expr::make(detail::node(Op::Sub, a.kind(), {a, b}));
}
inline Expr smul(const Expr& k, const Expr& v) {
  detail::need_real(k, "scalar multiplication");
  if (!v.kind().is_vec()) detail::kind_error("scalar multiplication needs a vector");
  return Expr::make(detail::node(Op::ScalarMul, v.kind(), {k, v}));
}
inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.kind().is_real() && b.kind().is_vec()) return smul(a, b);
  detail::need_real(a, "*");
  detail::need_real(b, "*");
  return Expr::make(detail::node(Op::Mul, Kind::real(), {a, b}));
}
inline Expr operator/(const Expr& a, const Expr& b) {
  detail::need_real(a, "/");
  detail::need_real(b, "/");
  return Expr::make(detail::node(Op::Div, Kind::real(), {a, b}));
}
inline Expr pow(const Expr& base, unsigned n) {
  detail::need_real(base, "^");
  auto nd = detail::node(Op::Pow, Kind::real(), {base});
  nd.n = n;
  return Expr::make(std::move(nd));
}

namespace detail {
inline Expr unary_real(Op op, const Expr& a, const char* name) {
  need_real(a, name);
  return Expr::make(node(op, Kind::real(), {a}));
}
}  // namespace detail

inline Expr ln(const Expr& a) { return detail::unary_real(Op::Ln, a, "ln"); }
inline Expr exp(const Expr& a) { return detail::unary_real(Op::Exp, a, "exp"); }
inline Expr sin(const Expr& a) { return detail::unary_real(Op::Sin, a, "sin"); }
inline Expr cos(const Expr& a) { return detail::unary_real(Op::Cos, a, "cos"); }
inline Expr sqrt(const Expr& a) { return detail::unary_real(Op::Sqrt, a, "sqrt"); }

inline Expr norm(const Expr& v) {
  if (!v.kind().is_vec()) detail::kind_error("norm needs a vector");
  return Expr::make(detail::node(Op::Norm, Kind::real(), {v}));
}
inline Expr inner(const Expr& a, const Expr& b) {
  if (!a.kind().is_vec() || !(a.kind() == b.kind()))
    detail::kind_error("inner product of " + a.kind().str() + " and " + b.kind().str());
  return Expr::make(detail::node(Op::Inner, Kind::real(), {a, b}));
}
inline Expr veclit(std::vector<Expr> xs) {
  if (xs.empty()) detail::kind_error("empty vector literal");
  for (const auto& x : xs) detail::need_real(x, "vector literal");
  unsigned n = static_cast<unsigned>(xs.size());
  return Expr::make(detail::node(Op::VecLit, Kind::vec(n), std::move(xs)));
}
/// i-th coordinate (1-based) of a vector expression.
inline Expr nth(const Expr& v, unsigned i) {
  if (!v.kind().is_vec()) detail::kind_error("indexing a non-vector");
  if (i == 0 || i > v.kind().dim) fail(ErrorCode::CoordOutOfRange, "index " + std::to_string(i));
  auto nd = detail::node(Op::Nth, Kind::real(), {v});
  nd.n = i;
  return Expr::make(std::move(nd));
}

inline Expr zero_of(const Kind& k) {
  if (k.is_vec()) return veclit(std::vector<Expr>(k.dim, lit(0)));
  if (k.is_bool()) return ff();
  return lit(0);
}

namespace detail {
inline Expr compare_node(Op op, const Expr& a, const Expr& b) {
  if (op == Op::Eq || op == Op::Neq) {
    if (!(a.kind() == b.kind()))
      kind_error("cannot compare " + a.kind().str() + " with " + b.kind().str());
  } else {
    need_real(a, "ordering");
    need_real(b, "ordering");
  }
  return Expr::make(node(op, Kind::boolean(), {a, b}));
}
inline Expr bool_node(Op op, std::vector<Expr> xs) {
  for (const auto& x : xs) need_bool(x, "connective");
  return Expr::make(node(op, Kind::boolean(), std::move(xs)));
}
}  // namespace detail

inline Expr eq(const Expr& a, const Expr& b) { return detail::compare_node(Op::Eq, a, b); }
inline Expr neq(const Expr& a, const Expr& b) { return detail::compare_node(Op::Neq, a, b); }
inline Expr le(const Expr& a, const Expr& b) { return detail::compare_node(Op::Le, a, b); }
inline Expr lt(const Expr& a, const Expr& b) { return detail::compare_node(Op::Lt, a, b); }
inline Expr ge(const Expr& a, const Expr& b) { return detail::compare_node(Op::Ge, a, b); }
inline Expr gt(const Expr& a, const Expr& b) { return detail::compare_node(Op::Gt, a, b); }
inline Expr compare(Op op, const Expr& a, const Expr& b) { return detail::compare_node(op, a, b); }

inline Expr and_(const Expr& a, const Expr& b) { return detail::bool_node(Op::And, {a, b}); }
inline Expr or_(const Expr& a, const Expr& b) { return detail::bool_node(Op::Or, {a, b}); }
inline Expr not_(const Expr& a) { return detail::bool_node(Op::Not, {a}); }
inline Expr implies(const Expr& a, const Expr& b) { return detail::bool_node(Op::Implies, {a, b}); }
inline Expr iff(const Expr& a, const Expr& b) { return detail::bool_node(Op::Iff, {a, b}); }

inline Expr ite(const Expr& c, const Expr& a, const Expr& b) {
  detail::need_bool(c, "if");
  if (!(a.kind() == b.kind())) detail::kind_error("if branches of kinds " + a.kind().str() + " and " + b.kind().str());
  return Expr::make(detail::node(Op::Ite, a.kind(), {c, a, b}));
}

namespace detail {
inline Expr quant(Op op, const std::string& name, Kind bk, const Expr& body) {
  need_bool(body, "quantifier body");
  auto nd = node(op, Kind::boolean(), {body});
  nd.name = name;
  nd.bound_kind = bk;
  return Expr::make(std::move(nd));
}
}  // namespace detail

inline Expr forall(const std::string& name, const Expr& body, Kind k = Kind::real()) {
  return detail::quant(Op::Forall, name, k, body);
}
inline Expr exists(const std::string& name, const Expr& body, Kind k = Kind::real()) {
  return detail::quant(Op::Exists, name, k, body);
}

/// Conjunction of a list (true when empty), left-nested in order.
inline Expr conj(const std::vector<Expr>& xs) {
  if (xs.empty()) return tt();
  Expr acc = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) acc = and_(acc, xs[i]);
  return acc;
}

/// Flattens nested conjunctions in textual order.
inline void collect_conjuncts(const Expr& e, std::vector<Expr>& out) {
  if (e.is(Op::And)) {
    collect_conjuncts(e.arg(0), out);
    collect_conjuncts(e.arg(1), out);
  } else {
    out.push_back(e);
  }
}
inline std::vector<Expr> conjuncts(const Expr& e) {
  std::vector<Expr> out;
  collect_conjuncts(e, out);
  return out;
}

/// Rebuilds a node with new children (kinds re-checked).
Expr rebuild(const Expr& e, std::vector<Expr> args);

// ---------------------------------------------------------------------------
// Structural order
// ---------------------------------------------------------------------------

/// Total structural order; 0 iff the trees are identical.
inline int compare(const Expr& a, const Expr& b) {
  if (a.identity() == b.identity()) return 0;
  if (a.op() != b.op()) return a.op() < b.op() ? -1 : 1;
  if (!(a.kind() == b.kind())) {
    if (a.kind().tag != b.kind().tag) return a.kind().tag < b.kind().tag ? -1 : 1;
    return a.kind().dim < b.kind().dim ? -1 : 1;
  }
  switch (a.op()) {
    case Op::Rat:
      if (a.num() != b.num()) return a.num() < b.num() ? -1 : 1;
      return 0;
    case Op::Bool:
      return a.flag() == b.flag() ? 0 : (a.flag() ? 1 : -1);
    case Op::Var: {
      auto c = a.lens() <=> b.lens();
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Op::Logical:
      return a.name().compare(b.name()) < 0 ? -1 : (a.name() == b.name() ? 0 : 1);
    default:
      break;
  }
  if (a.n() != b.n()) return a.n() < b.n() ? -1 : 1;
  if (a.name() != b.name()) return a.name() < b.name() ? -1 : 1;
  if (!(a.bound_kind() == b.bound_kind())) return a.bound_kind().dim < b.bound_kind().dim ? -1 : 1;
  if (a.args().size() != b.args().size()) return a.args().size() < b.args().size() ? -1 : 1;
  for (std::size_t i = 0; i < a.args().size(); ++i)
    if (int c = compare(a.arg(i), b.arg(i)); c != 0) return c;
  return 0;
}

inline bool same(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

inline Expr rebuild(const Expr& e, std::vector<Expr> args) {
  switch (e.op()) {
    case Op::Rat:
    case Op::Bool:
    case Op::Var:
    case Op::Logical: return e;
    case Op::Neg: return -args[0];
    case Op::Add: return args[0] + args[1];
    case Op::Sub: return args[0] - args[1];
    case Op::Mul: return args[0] * args[1];
    case Op::Div: return args[0] / args[1];
    case Op::Pow: return pow(args[0], e.n());
    case Op::Ln: return ln(args[0]);
    case Op::Exp: return exp(args[0]);
    case Op::Sin: return sin(args[0]);
    case Op::Cos: return cos(args[0]);
    case Op::Sqrt: return sqrt(args[0]);
    case Op::Norm: return norm(args[0]);
    case Op::Inner: return inner(args[0], args[1]);
    case Op::ScalarMul: return smul(args[0], args[1]);
    case Op::VecLit: return veclit(std::move(args));
    case Op::Nth: return nth(args[0], e.n());
    case Op::Eq:
    case Op::Neq:
    case Op::Le:
    case Op::Lt:
    case Op::Ge:
    case Op::Gt: return compare(e.op(), args[0], args[1]);
    case Op::And: return and_(args[0], args[1]);
    case Op::Or: return or_(args[0], args[1]);
    case Op::Not: return not_(args[0]);
    case Op::Implies: return implies(args[0], args[1]);
    case Op::Iff: return iff(args[0], args[1]);
    case Op::Ite: return ite(args[0], args[1], args[2]);
    case Op::Exists: return exists(e.name(), args[0], e.bound_kind());
    case Op::Forall: return forall(e.name(), args[0], e.bound_kind());
  }
  return e;
}

/// Applies f bottom-up to every node.
template <class F>
Expr transform(const Expr& e, F&& f) {
  if (e.args().empty()) return f(e);
  std::vector<Expr> args;
  args.reserve(e.args().size());
  bool changed = false;
  for (const auto& a : e.args()) {
    args.push_back(transform(a, f));
    changed = changed || args.back().identity() != a.identity();
  }
  return f(changed ? rebuild(e, std::move(args)) : e);
}

// ---------------------------------------------------------------------------
// Free occurrences
// ---------------------------------------------------------------------------

inline void collect_lenses(const Expr& e, std::vector<LensRef>& out) {
  if (e.is(Op::Var)) {
    if (std::find(out.begin(), out.end(), e.lens()) == out.end()) out.push_back(e.lens());
    return;
  }
  for (const auto& a : e.args()) collect_lenses(a, out);
}
/// Lenses read by e, in first-occurrence order.
inline std::vector<LensRef> free_lenses(const Expr& e) {
  std::vector<LensRef> out;
  collect_lenses(e, out);
  return out;
}

namespace detail {
inline void collect_logicals(const Expr& e, std::set<std::string>& bound,
                             std::vector<std::pair<std::string, Kind>>& out) {
  if (e.is(Op::Logical)) {
    if (!bound.count(e.name())) {
      for (const auto& [n, k] : out)
        if (n == e.name()) return;
      out.emplace_back(e.name(), e.kind());
    }
    return;
  }
  if (e.is(Op::Exists) || e.is(Op::Forall)) {
    bool inserted = bound.insert(e.name()).second;
    collect_logicals(e.arg(0), bound, out);
    if (inserted) bound.erase(e.name());
    return;
  }
  for (const auto& a : e.args()) collect_logicals(a, bound, out);
}
}  // namespace detail

/// Free logical variables with their kinds, in first-occurrence order.
inline std::vector<std::pair<std::string, Kind>> free_logicals(const Expr& e) {
  std::set<std::string> bound;
  std::vector<std::pair<std::string, Kind>> out;
  detail::collect_logicals(e, bound, out);
  return out;
}

inline bool has_quantifier(const Expr& e) {
  if (e.is(Op::Exists) || e.is(Op::Forall)) return true;
  for (const auto& a : e.args())
    if (has_quantifier(a)) return true;
  return false;
}

inline bool contains_op(const Expr& e, Op op) {
  if (e.is(op)) return true;
  for (const auto& a : e.args())
    if (contains_op(a, op)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Printing (concrete syntax accepted by the model parser)
// ---------------------------------------------------------------------------

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Iff: return 1;
    case Op::Implies: return 2;
    case Op::Or: return 3;
    case Op::And: return 4;
    case Op::Not: return 5;
    case Op::Eq:
    case Op::Neq:
    case Op::Le:
    case Op::Lt:
    case Op::Ge:
    case Op::Gt: return 6;
    case Op::Add:
    case Op::Sub: return 7;
    case Op::Mul:
    case Op::Div:
    case Op::Inner:
    case Op::ScalarMul: return 8;
    case Op::Neg: return 9;
    case Op::Pow: return 10;
    case Op::Rat:
      return e.num() < 0 || !is_integer(e.num()) ? 12 : 11;  // printed parenthesised
    default: return 11;
  }
}

inline std::string print(const Expr& e, int min_prec);

inline std::string wrap(const Expr& e, int min_prec) {
  std::string s = print(e, 0);
  if (precedence(e) >= min_prec) return s;
  // a negated literal keeps a space so it does not read back as a numeral
  if (e.is(Op::Neg) && e.arg(0).is_rat()) return "(- " + s.substr(1) + ")";
  return "(" + s + ")";
}

inline const char* infix(Op op) {
  switch (op) {
    case Op::Iff: return " <-> ";
    case Op::Implies: return " -> ";
    case Op::Or: return " or ";
    case Op::And: return " & ";
    case Op::Eq: return " = ";
    case Op::Neq: return " != ";
    case Op::Le: return " <= ";
    case Op::Lt: return " < ";
    case Op::Ge: return " >= ";
    case Op::Gt: return " > ";
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    case Op::ScalarMul: return " * ";
    case Op::Div: return " / ";
    case Op::Inner: return " . ";
    default: return " ? ";
  }
}

inline std::string kind_suffix(const Kind& k) { return k.is_real() ? "" : " : " + k.str(); }

inline std::string print(const Expr& e, int /*min_prec*/) {
  int p = precedence(e);
  switch (e.op()) {
    case Op::Rat:
      if (p == 12) return "(" + to_string(e.num()) + ")";
      return to_string(e.num());
    case Op::Bool: return e.flag() ? "true" : "false";
    case Op::Var: return e.lens().str();
    case Op::Logical: return e.name();
    case Op::Neg: return "-" + wrap(e.arg(0), 10);
    case Op::Not: return "!" + wrap(e.arg(0), 5);
    case Op::Pow: return wrap(e.arg(0), 11) + "^" + std::to_string(e.n());
    case Op::Ln: return "ln(" + print(e.arg(0), 0) + ")";
    case Op::Exp: return "exp(" + print(e.arg(0), 0) + ")";
    case Op::Sin: return "sin(" + print(e.arg(0), 0) + ")";
    case Op::Cos: return "cos(" + print(e.arg(0), 0) + ")";
    case Op::Sqrt: return "sqrt(" + print(e.arg(0), 0) + ")";
    case Op::Norm: return "norm(" + print(e.arg(0), 0) + ")";
    case Op::Nth: return wrap(e.arg(0), 11) + "[" + std::to_string(e.n()) + "]";
    case Op::VecLit: {
      std::string out = "[";
      for (std::size_t i = 0; i < e.args().size(); ++i) out += (i ? ", " : "") + print(e.arg(i), 0);
      return out + "]";
    }
    case Op::Ite:
      return "(if " + print(e.arg(0), 0) + " then " + print(e.arg(1), 0) + " else " + print(e.arg(2), 0) + ")";
    case Op::Exists:
    case Op::Forall:
      return std::string("(") + (e.is(Op::Exists) ? "exists " : "forall ") + e.name() + kind_suffix(e.bound_kind()) +
             ". " + print(e.arg(0), 0) + ")";
    case Op::Implies:  // right associative
      return wrap(e.arg(0), p + 1) + infix(e.op()) + wrap(e.arg(1), p);
    case Op::Eq:
    case Op::Neq:
    case Op::Le:
    case Op::Lt:
    case Op::Ge:
    case Op::Gt:
    case Op::Iff:
      return wrap(e.arg(0), p + 1) + infix(e.op()) + wrap(e.arg(1), p + 1);
    default:  // left associative binary
      return wrap(e.arg(0), p) + infix(e.op()) + wrap(e.arg(1), p + 1);
  }
}

}  // namespace detail

inline std::string to_string(const Expr& e) { return detail::print(e, 0); }

inline std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

}  // namespace hsv
