#pragma once

#include <hsv/simplify.hpp>
#include <hsv/subst.hpp>

#include <memory>

namespace hsv {

/// Name of the logical variable standing for elapsed evolution time.
inline const std::string& tau_name() {
  static const std::string name = "tau";
  return name;
}
inline Expr tau() { return logical(tau_name()); }

/// Admissible evolution durations.
struct Duration {
  enum class Tag { NonNeg, Interval, Bound };
  Tag tag = Tag::NonNeg;
  Rational lo = 0, hi = 0;
  bool hi_infinite = true;
  /// Bound: a predicate over the store and tau.
  Expr pred;

  static Duration nonneg() { return {}; }
  static Duration interval(Rational lo, std::optional<Rational> hi) {
    Duration d;
    d.tag = Tag::Interval;
    d.lo = std::move(lo);
    d.hi_infinite = !hi.has_value();
    if (hi) d.hi = *hi;
    return d;
  }
  static Duration bound(Expr p) {
    Duration d;
    d.tag = Tag::Bound;
    d.pred = std::move(p);
    return d;
  }

  /// Membership of the time t as a boolean expression. Durations are
  /// always nonnegative.
  Expr member(const Expr& t) const {
    Expr base = le(lit(0), t);
    switch (tag) {
      case Tag::NonNeg: return base;
      case Tag::Interval: {
        Expr e = lo > 0 ? le(lit(lo), t) : base;
        return hi_infinite ? e : and_(e, le(t, lit(hi)));
      }
      case Tag::Bound: return and_(base, subst_logical(pred, tau_name(), t));
    }
    return base;
  }

  bool is_default() const { return tag == Tag::NonNeg; }

  friend bool operator==(const Duration& a, const Duration& b) {
    if (a.tag != b.tag) return false;
    switch (a.tag) {
      case Tag::NonNeg: return true;
      case Tag::Interval: return a.lo == b.lo && a.hi_infinite == b.hi_infinite && (a.hi_infinite || a.hi == b.hi);
      case Tag::Bound: return same(a.pred, b.pred);
    }
    return false;
  }
};

/// Evolution along a vector field: the rhs updates exactly the frame.
struct Ode {
  Frame frame;
  Subst rhs;
  Expr guard = tt();
  Duration dur;
  Expr dom = tt();
  Rational t0 = 0;

  /// The direction of the framed field, for derivatives.
  Subst field() const { return rhs; }
};

/// Evolution given directly by a flow over tau.
struct Evol {
  Frame frame;
  Subst flow;
  Expr guard = tt();
  Duration dur;
};

class Program {
 public:
  enum class Tag { Skip, Abort, Assign, Test, Seq, Choice, If, Loop, Ode, Evol };

  struct Node {
    Tag tag = Tag::Skip;
    Subst assign;
    Expr cond;  // Test predicate, If condition, Loop invariant
    std::vector<Program> kids;
    std::shared_ptr<const hsv::Ode> ode;
    std::shared_ptr<const hsv::Evol> evol;
  };

  Program() : Program(Node{}) {}

  static Program skip() { return Program(Node{}); }
  static Program abort() { return Program(Node{Tag::Abort, {}, {}, {}, nullptr, nullptr}); }
  static Program assign(Subst s) { return Program(Node{Tag::Assign, std::move(s), {}, {}, nullptr, nullptr}); }
  static Program test(Expr p) {
    detail::need_bool(p, "test");
    return Program(Node{Tag::Test, {}, std::move(p), {}, nullptr, nullptr});
  }
  static Program seq(Program p, Program q) { return Program(Node{Tag::Seq, {}, {}, {std::move(p), std::move(q)}, nullptr, nullptr}); }
  static Program choice(Program p, Program q) {
    return Program(Node{Tag::Choice, {}, {}, {std::move(p), std::move(q)}, nullptr, nullptr});
  }
  static Program if_(Expr c, Program p, Program q) {
    detail::need_bool(c, "if");
    return Program(Node{Tag::If, {}, std::move(c), {std::move(p), std::move(q)}, nullptr, nullptr});
  }
  static Program loop(Program body, Expr inv) {
    if (inv.valid()) detail::need_bool(inv, "loop invariant");
    return Program(Node{Tag::Loop, {}, std::move(inv), {std::move(body)}, nullptr, nullptr});
  }
  static Program ode(hsv::Ode o) {
    if (!(o.rhs.frame() == o.frame))
      fail(ErrorCode::FrameViolation, "field " + o.rhs.str() + " must update exactly " + o.frame.str());
    detail::need_bool(o.guard, "guard");
    Node n;
    n.tag = Tag::Ode;
    n.ode = std::make_shared<const hsv::Ode>(std::move(o));
    return Program(std::move(n));
  }
  static Program evol(hsv::Evol o) {
    if (!(o.flow.frame() == o.frame))
      fail(ErrorCode::FrameViolation, "flow " + o.flow.str() + " must update exactly " + o.frame.str());
    detail::need_bool(o.guard, "guard");
    Node n;
    n.tag = Tag::Evol;
    n.evol = std::make_shared<const hsv::Evol>(std::move(o));
    return Program(std::move(n));
  }

  Tag tag() const { return node_->tag; }
  bool is(Tag t) const { return node_->tag == t; }
  const Subst& subst() const { return node_->assign; }
  const Expr& cond() const { return node_->cond; }
  const Expr& invariant() const { return node_->cond; }
  const Program& kid(std::size_t i) const { return node_->kids.at(i); }
  const std::vector<Program>& kids() const { return node_->kids; }
  const hsv::Ode& ode() const { return *node_->ode; }
  const hsv::Evol& evol() const { return *node_->evol; }

  /// Same program with a different loop invariant.
  Program with_invariant(Expr inv) const { return loop(kid(0), std::move(inv)); }

 private:
  explicit Program(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  std::shared_ptr<const Node> node_;
};

inline bool same_ode(const Ode& a, const Ode& b) {
  return a.frame == b.frame && a.rhs == b.rhs && same(a.guard, b.guard) && a.dur == b.dur && same(a.dom, b.dom) &&
         a.t0 == b.t0;
}

/// Structural program equality.
inline bool same(const Program& a, const Program& b) {
  if (a.tag() != b.tag()) return false;
  switch (a.tag()) {
    case Program::Tag::Skip:
    case Program::Tag::Abort: return true;
    case Program::Tag::Assign: return a.subst() == b.subst();
    case Program::Tag::Test: return same(a.cond(), b.cond());
    case Program::Tag::If:
      if (!same(a.cond(), b.cond())) return false;
      break;
    case Program::Tag::Loop:
      if (a.invariant().valid() != b.invariant().valid()) return false;
      if (a.invariant().valid() && !same(a.invariant(), b.invariant())) return false;
      break;
    case Program::Tag::Ode: return same_ode(a.ode(), b.ode());
    case Program::Tag::Evol: {
      const auto &x = a.evol(), &y = b.evol();
      return x.frame == y.frame && x.flow == y.flow && same(x.guard, y.guard) && x.dur == y.dur;
    }
    default: break;
  }
  for (std::size_t i = 0; i < a.kids().size(); ++i)
    if (!same(a.kid(i), b.kid(i))) return false;
  return true;
}

/// Lenses a program may write (an over-approximation).
inline Frame modset(const Program& p) {
  switch (p.tag()) {
    case Program::Tag::Assign: return p.subst().frame();
    case Program::Tag::Ode: return p.ode().frame;
    case Program::Tag::Evol: return p.evol().frame;
    default: break;
  }
  Frame f;
  for (const auto& k : p.kids()) f = f.unite(modset(k));
  return f;
}

/// True if p writes nothing in a.
inline bool nmods(const Program& p, const Frame& a) { return modset(p).disjoint(a); }

/// Checks every expression in p against the dataspace.
inline void check_program(const Program& p, const Dataspace& ds) {
  switch (p.tag()) {
    case Program::Tag::Assign: check_subst(p.subst(), ds); break;
    case Program::Tag::Ode:
      for (const auto& l : p.ode().frame.items()) {
        Kind k = lens_kind(l, ds);
        if (ds.decl(l.name).role == Role::Constant) fail(ErrorCode::KindError, "constant " + l.name + " evolves");
        if (k.is_bool()) fail(ErrorCode::KindError, "boolean " + l.str() + " cannot evolve");
      }
      check_subst(p.ode().rhs, ds);
      break;
    case Program::Tag::Evol: check_subst(p.evol().flow, ds); break;
    default: break;
  }
  for (const auto& k : p.kids()) check_program(k, ds);
}

}  // namespace hsv
