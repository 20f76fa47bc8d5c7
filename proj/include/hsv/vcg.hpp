#pragma once

#include <hsv/poly.hpp>
#include <hsv/program.hpp>

namespace hsv {

/// Named assumption from the dataspace or a `using` clause.
struct Fact {
  std::string name;
  Expr formula;
};

/// Partial-correctness assertion {pre} prog {post}.
struct Triple {
  Expr pre;
  Program prog;
  Expr post;
  std::vector<Fact> context;
};

/// Verification condition. Store variables are implicitly universally
/// quantified; free logical variables likewise.
struct VC {
  std::string id;
  Expr formula;
  std::string origin;
  std::vector<Expr> provisos;
};

/// Certified flows keyed by their evolution command.
class FlowTable {
 public:
  struct Entry {
    std::string name;
    Frame frame;
    Subst field;
    Subst flow;
  };

  void add(std::string name, const Ode& ode, Subst flow) {
    entries_.push_back({std::move(name), ode.frame, ode.rhs, std::move(flow)});
  }

  /// Flow for an ODE with the same frame and (normalised) field.
  const Entry* find(const Ode& ode) const {
    for (const auto& e : entries_) {
      if (!(e.frame == ode.frame) || e.field.size() != ode.rhs.size()) continue;
      bool match = true;
      for (const auto& [l, r] : ode.rhs.entries()) {
        const Expr* other = e.field.find(l);
        match = match && other && poly_equal(*other, r);
      }
      if (match) return &e;
    }
    return nullptr;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Entry> entries_;
};

namespace detail {

inline std::string fresh_logical(const std::string& base, const std::vector<Expr>& avoid_in) {
  auto clash = [&](const std::string& n) {
    for (const auto& e : avoid_in)
      for (const auto& [m, k] : free_logicals(e))
        if (m == n) return true;
    return false;
  };
  if (!clash(base)) return base;
  for (int i = 1;; ++i)
    if (!clash(base + std::to_string(i))) return base + std::to_string(i);
}

/// wlp of an evolution with known flow phi (over tau):
///   forall tau. tau in U -> (forall s. 0 <= s <= tau -> G[phi s]) -> Q[phi tau]
inline Expr flow_wlp(const Subst& phi, const Expr& guard, const Duration& dur, const Expr& q) {
  std::vector<Expr> avoid{q, guard};
  if (dur.tag == Duration::Tag::Bound) avoid.push_back(dur.pred);
  std::string t = fresh_logical(tau_name(), avoid);
  avoid.push_back(logical(t));
  std::string s = fresh_logical("sigma", avoid);
  auto at = [&](const std::string& name) {
    Subst out;
    for (const auto& [l, e] : phi.entries()) out.set(l, subst_logical(e, tau_name(), logical(name)));
    return out;
  };
  Expr post = subst_apply_expr(q, at(t));
  Expr g = simplify(guard);
  Expr body = post;
  if (!g.is_true()) {
    Expr gs = subst_apply_expr(g, at(s));
    Expr down = forall(s, implies(and_(le(lit(0), logical(s)), le(logical(s), logical(t))), gs));
    body = implies(down, post);
  }
  return forall(t, implies(dur.member(logical(t)), body));
}

class Wlp {
 public:
  Wlp(const FlowTable& flows, std::vector<VC>* side) : flows_(flows), side_(side) {}

  Expr run(const Program& p, const Expr& q) {
    switch (p.tag()) {
      case Program::Tag::Skip: return q;
      case Program::Tag::Abort: return tt();
      case Program::Tag::Assign: return subst_apply_expr(q, p.subst());
      case Program::Tag::Test: return implies(p.cond(), q);
      case Program::Tag::Seq: return run(p.kid(0), run(p.kid(1), q));
      case Program::Tag::Choice: return and_(run(p.kid(0), q), run(p.kid(1), q));
      case Program::Tag::If:
        return and_(implies(p.cond(), run(p.kid(0), q)), implies(not_(p.cond()), run(p.kid(1), q)));
      case Program::Tag::Loop: {
        if (!p.invariant().valid()) fail(ErrorCode::MissingLoopInvariant, "loop without inv");
        const Expr& inv = p.invariant();
        Expr body = run(p.kid(0), inv);
        if (side_) {
          side_->push_back({"", implies(inv, body), "loop-preserve", {}});
          side_->push_back({"", implies(inv, q), "loop-use", {}});
        }
        return inv;
      }
      case Program::Tag::Ode: {
        const Ode& o = p.ode();
        const auto* e = flows_.find(o);
        if (!e) fail(ErrorCode::MissingFlow, "no certified flow for " + o.rhs.str());
        return flow_wlp(e->flow, and_(o.guard, o.dom), o.dur, q);
      }
      case Program::Tag::Evol: {
        const Evol& ev = p.evol();
        return flow_wlp(ev.flow, ev.guard, ev.dur, q);
      }
    }
    return q;
  }

 private:
  const FlowTable& flows_;
  std::vector<VC>* side_;
};

}  // namespace detail

/// Weakest liberal precondition. A loop contributes its invariant; the
/// loop's own obligations are appended to side when given.
inline Expr wlp(const Program& p, const Expr& q, const FlowTable& flows = {}, std::vector<VC>* side = nullptr) {
  return detail::Wlp(flows, side).run(p, q);
}

inline void number_vcs(std::vector<VC>& vcs) {
  for (std::size_t i = 0; i < vcs.size(); ++i) vcs[i].id = "vc" + std::to_string(i + 1);
}

/// VCs for the wlp workflow: pre => wlp(prog, post), then every loop's
/// preservation and use conditions.
inline std::vector<VC> gen_vcs(const Triple& t, const FlowTable& flows = {}) {
  std::vector<VC> side;
  Expr w = wlp(t.prog, t.post, flows, &side);
  std::vector<VC> out;
  out.push_back({"", simplify(implies(t.pre, w)), t.prog.is(Program::Tag::Loop) ? "loop-init" : "wp", {}});
  for (auto& v : side) {
    v.formula = simplify(v.formula);
    out.push_back(std::move(v));
  }
  number_vcs(out);
  return out;
}

/// Frame rule: an invariant over variables the program leaves alone is
/// carried from pre to post.
inline Triple apply_frame_rule(const Triple& t, const Frame& a, const Expr& inv) {
  if (!nmods(t.prog, a)) fail(ErrorCode::FrameViolation, "program modifies part of " + a.str());
  for (const auto& l : free_lenses(inv))
    if (!a.covers(l)) fail(ErrorCode::UnrestViolation, l.str() + " is outside " + a.str());
  Triple out = t;
  out.pre = and_(t.pre, inv);
  out.post = and_(t.post, inv);
  return out;
}

}  // namespace hsv
