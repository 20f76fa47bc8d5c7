#pragma once

#include <hsv/interval.hpp>
#include <hsv/lp.hpp>
#include <hsv/poly.hpp>
#include <hsv/vcg.hpp>

#include <random>
#include <set>
#include <sstream>

namespace hsv {

/// Outcome of discharging one VC.
struct Verdict {
  enum class Status { Valid, Invalid, Unknown };
  Status status = Status::Unknown;
  /// Valid: method tag. Unknown: reason.
  std::string detail;
  std::optional<Store> witness;
  Env env;

  static Verdict valid(std::string method) { return {Status::Valid, std::move(method), std::nullopt, {}}; }
  static Verdict invalid(Store s, Env env) { return {Status::Invalid, "", std::move(s), std::move(env)}; }
  static Verdict unknown(std::string reason) { return {Status::Unknown, std::move(reason), std::nullopt, {}}; }

  bool is_valid() const { return status == Status::Valid; }
  bool is_invalid() const { return status == Status::Invalid; }
};

inline const char* status_name(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::Valid: return "Valid";
    case Verdict::Status::Invalid: return "Invalid";
    default: return "Unknown";
  }
}

/// Per-variable closed bounds used for sampling. Keys are primitive lens
/// names (`v[1]` for coordinates) or logical variable names.
struct Box {
  Rational radius = 100;
  std::map<std::string, Interval> bounds;

  Interval of(const std::string& key) const {
    auto it = bounds.find(key);
    return it == bounds.end() ? Interval(-radius, radius) : it->second;
  }
  bool bounded(const std::string& key) const { return bounds.count(key) != 0; }

  /// Tightens one side; a strict bound is nudged inward so samples satisfy it.
  void tighten(const std::string& key, const std::optional<Rational>& lo, const std::optional<Rational>& hi,
               bool strict) {
    Interval cur = of(key);
    Rational nudge = strict ? Rational(1, 64) : Rational(0);
    if (lo && *lo + nudge > cur.lo) cur.lo = *lo + nudge;
    if (hi && *hi - nudge < cur.hi) cur.hi = *hi - nudge;
    if (cur.hi < cur.lo) cur.hi = cur.lo;
    bounds[key] = cur;
  }

  /// Applies `x rel c` style atoms (in either orientation).
  void absorb(const Expr& atom) {
    Op op = atom.op();
    if (op != Op::Le && op != Op::Lt && op != Op::Ge && op != Op::Gt) return;
    Expr a = atom.arg(0), b = atom.arg(1);
    bool strict = op == Op::Lt || op == Op::Gt;
    if (op == Op::Ge || op == Op::Gt) std::swap(a, b);  // now a <= b
    auto key = [](const Expr& e) -> std::optional<std::string> {
      if (e.is(Op::Var) && e.kind().is_real()) return e.lens().str();
      if (e.is(Op::Logical) && e.kind().is_real()) return e.name();
      return std::nullopt;
    };
    if (auto k = key(a); k && b.is_rat()) tighten(*k, std::nullopt, b.num(), strict);
    if (auto k = key(b); k && a.is_rat()) tighten(*k, a.num(), std::nullopt, strict);
  }

  static Box from_assumptions(const std::vector<Expr>& facts, Rational radius = 100) {
    Box b;
    b.radius = radius;
    for (const auto& f : facts)
      for (const auto& c : conjuncts(simplify(f))) b.absorb(c);
    return b;
  }
};

struct ArithConfig {
  std::size_t falsify_trials = 1000;
  std::uint64_t seed = 0;
  int subdivision_depth = 12;
  std::size_t max_boxes = 2048;
  std::size_t max_branches = 512;
  bool use_products = true;
};

/// Everything the discharge pipeline needs besides the VC itself.
struct ArithCtx {
  DataspacePtr ds;
  std::vector<Expr> assumptions;
  Box box;
  ArithConfig cfg;
};

namespace detail {

/// Atomic constraint p rel 0.
struct ALit {
  enum class Rel { Ge, Gt, Eq };
  Poly p;
  Rel rel;
};

inline bool is_cmp(Op op) {
  return op == Op::Le || op == Op::Lt || op == Op::Ge || op == Op::Gt || op == Op::Eq || op == Op::Neq;
}

inline Expr negate_atom(const Expr& e) {
  switch (e.op()) {
    case Op::Le: return gt(e.arg(0), e.arg(1));
    case Op::Lt: return ge(e.arg(0), e.arg(1));
    case Op::Ge: return lt(e.arg(0), e.arg(1));
    case Op::Gt: return le(e.arg(0), e.arg(1));
    case Op::Eq: return neq(e.arg(0), e.arg(1));
    case Op::Neq: return eq(e.arg(0), e.arg(1));
    default: return not_(e);
  }
}

inline ALit to_alit(const Expr& e) {
  Poly a = to_poly(e.arg(0)), b = to_poly(e.arg(1));
  switch (e.op()) {
    case Op::Le: return {b - a, ALit::Rel::Ge};
    case Op::Lt: return {b - a, ALit::Rel::Gt};
    case Op::Ge: return {a - b, ALit::Rel::Ge};
    case Op::Gt: return {a - b, ALit::Rel::Gt};
    default: return {a - b, ALit::Rel::Eq};
  }
}

inline Expr alit_expr(const ALit& l) {
  Expr p = l.p.to_expr();
  switch (l.rel) {
    case ALit::Rel::Ge: return ge(p, lit(0));
    case ALit::Rel::Gt: return gt(p, lit(0));
    default: return eq(p, lit(0));
  }
}

/// Substitutes a Var or Logical atom by an expression.
inline Expr subst_atom(const Expr& e, const Expr& atom, const Expr& by) {
  if (atom.is(Op::Logical)) return subst_logical(e, atom.name(), by);
  return subst_apply_expr(e, Subst{{atom.lens(), by}});
}

inline bool occurs(const Expr& e, const Expr& atom) {
  if (same(e, atom)) return true;
  if (atom.is(Op::Var) && e.is(Op::Var)) return e.lens().name == atom.lens().name && lens_indep(e.lens(), atom.lens()) == false;
  for (const auto& a : e.args())
    if (occurs(a, atom)) return true;
  return false;
}

inline Expr first_real_ite(const Expr& e) {
  for (const auto& a : e.args()) {
    Expr r = first_real_ite(a);
    if (r.valid()) return r;
  }
  if (e.is(Op::Ite) && !e.kind().is_bool()) return e;
  return Expr();
}

inline Expr replace_node(const Expr& e, const Expr& target, const Expr& by) {
  return transform(e, [&](const Expr& n) { return same(n, target) ? by : n; });
}

/// Conjunctive refutation and goal-directed proof search.
class Prover {
 public:
  Prover(const ArithConfig& cfg, std::vector<Expr> facts, std::set<std::string> taken)
      : cfg_(cfg), facts_(std::move(facts)), taken_(std::move(taken)) {}

  bool prove(const Expr& goal) { return prove_goal(facts_, goal, 0); }

  /// Methods that contributed, in a fixed order.
  std::string methods() const {
    std::string out;
    for (const char* m : {"simplify", "poly", "rewrite", "sign", "interval", "witness"})
      if (used_.count(m)) out += (out.empty() ? "" : "+") + std::string(m);
    return out.empty() ? "simplify" : out;
  }

 private:
  std::string fresh(const std::string& base) {
    for (;;) {
      std::string n = base + std::to_string(++counter_);
      if (taken_.insert(n).second) return n;
    }
  }

  // ---- goal decomposition ------------------------------------------------

  bool prove_goal(std::vector<Expr> hyps, Expr g, int depth) {
    if (depth > 24) return false;
    g = simplify(g);
    switch (g.op()) {
      case Op::Bool:
        if (g.flag()) return true;
        return refute(hyps);
      case Op::And: return prove_goal(hyps, g.arg(0), depth + 1) && prove_goal(hyps, g.arg(1), depth + 1);
      case Op::Implies:
        hyps.push_back(g.arg(0));
        return prove_goal(std::move(hyps), g.arg(1), depth + 1);
      case Op::Iff:
        return prove_goal(hyps, implies(g.arg(0), g.arg(1)), depth + 1) &&
               prove_goal(hyps, implies(g.arg(1), g.arg(0)), depth + 1);
      case Op::Or:
        if (!has_quantifier(g.arg(0))) {
          hyps.push_back(not_(g.arg(0)));
          return prove_goal(std::move(hyps), g.arg(1), depth + 1);
        }
        hyps.push_back(not_(g.arg(1)));
        return prove_goal(std::move(hyps), g.arg(0), depth + 1);
      case Op::Forall: {
        Expr sk = logical(fresh("sk"), g.bound_kind());
        return prove_goal(std::move(hyps), subst_logical(g.arg(0), g.name(), sk), depth + 1);
      }
      case Op::Exists: return witness_search(hyps, g, depth);
      case Op::Not: {
        const Expr& a = g.arg(0);
        if (a.is(Op::Exists)) return prove_goal(hyps, forall(a.name(), not_(a.arg(0)), a.bound_kind()), depth + 1);
        if (a.is(Op::Forall)) return prove_goal(hyps, exists(a.name(), not_(a.arg(0)), a.bound_kind()), depth + 1);
        hyps.push_back(a);
        return refute(hyps);
      }
      default:
        if (g.is(Op::Eq) && g.arg(0).kind().is_real() && poly_equal(g.arg(0), g.arg(1))) {
          used_.insert("poly");
          return true;
        }
        hyps.push_back(not_(g));
        return refute(hyps);
    }
  }

  /// Candidate witnesses for an existential goal.
  std::vector<Expr> witnesses(const std::vector<Expr>& hyps, const Expr& g) {
    std::vector<Expr> out;
    Expr v = logical(g.name(), g.bound_kind());
    const Expr& body = g.arg(0);
    if (!g.bound_kind().is_real()) return out;
    // p * v^2 + c = 0 with p, c free of v
    if (body.is(Op::Eq) && body.arg(0).kind().is_real()) {
      Poly diff = to_poly(body.arg(0)) - to_poly(body.arg(1));
      Poly quad, rest;
      bool ok = true;
      for (const auto& [m, c] : diff.terms()) {
        unsigned k = 0;
        Monomial other;
        for (const auto& [a, n] : m) {
          if (same(a, v)) k = n;
          else if (occurs(a, v)) ok = false;
          else other.emplace_back(a, n);
        }
        Poly t;
        t.add_term(other, c);
        if (k == 2) quad = quad + t;
        else if (k == 0) rest = rest + t;
        else ok = false;
      }
      if (ok && !quad.is_zero()) out.push_back(sqrt(-rest.to_expr() / quad.to_expr()));
    }
    for (const Rational& q : {Rational(1), Rational(-1), Rational(1, 2), Rational(-1, 2), Rational(0)})
      out.push_back(lit(q));
    std::vector<Expr> reals;
    for (const auto& h : hyps)
      for (const auto& l : free_lenses(h)) {
        Expr x = var(l, Kind::real());
        if (l.is_primitive() && std::none_of(reals.begin(), reals.end(), [&](const Expr& y) { return same(x, y); }))
          reals.push_back(x);
      }
    for (const auto& x : reals) {
      out.push_back(lit(1) / sqrt(x));
      out.push_back(lit(1) / sqrt(-x));
    }
    return out;
  }

  /// Side goals making a witness term defined.
  static void definedness(const Expr& w, std::vector<Expr>& out) {
    for (const auto& a : w.args()) definedness(a, out);
    if (w.is(Op::Div)) out.push_back(neq(w.arg(1), lit(0)));
    if (w.is(Op::Sqrt)) out.push_back(ge(w.arg(0), lit(0)));
    if (w.is(Op::Ln)) out.push_back(gt(w.arg(0), lit(0)));
  }

  bool witness_search(const std::vector<Expr>& hyps, const Expr& g, int depth) {
    auto saved = used_;
    for (const auto& w : witnesses(hyps, g)) {
      std::vector<Expr> side;
      definedness(w, side);
      bool ok = true;
      for (const auto& s : side) ok = ok && prove_goal(hyps, s, depth + 1);
      if (ok && prove_goal(hyps, subst_logical(g.arg(0), g.name(), w), depth + 1)) {
        used_.insert("witness");
        return true;
      }
      used_ = saved;
    }
    return false;
  }

  // ---- refutation ---------------------------------------------------------

  struct Branch {
    std::vector<Expr> todo;
    std::vector<Expr> literals;  // arithmetic comparisons
    std::vector<std::pair<Expr, bool>> props;  // boolean atoms with polarity
  };

  bool refute(const std::vector<Expr>& hyps) {
    Branch b;
    b.todo = hyps;
    leaves_ = 0;
    return refute_branch(std::move(b));
  }

  static std::optional<std::pair<Expr, Expr>> range_of(const Expr& q) {
    if (!q.arg(0).is(Op::Implies)) return std::nullopt;
    Expr x = logical(q.name(), q.bound_kind());
    Expr lo, hi;
    for (const auto& h : conjuncts(q.arg(0).arg(0))) {
      if (!(h.is(Op::Le) || h.is(Op::Lt) || h.is(Op::Ge) || h.is(Op::Gt))) continue;
      Expr a = h.arg(0), b = h.arg(1);
      if (h.is(Op::Ge) || h.is(Op::Gt)) std::swap(a, b);
      if (same(b, x) && !occurs(a, x)) lo = a;
      if (same(a, x) && !occurs(b, x)) hi = b;
    }
    if (!lo.valid() && !hi.valid()) return std::nullopt;
    return std::make_pair(lo, hi);
  }

  bool add_prop(Branch& b, const Expr& atom, bool positive) {
    for (const auto& [a, p] : b.props)
      if (same(a, atom)) return p != positive;  // conflict closes the branch
    b.props.emplace_back(atom, positive);
    return false;
  }

  bool split(Branch b, std::vector<Expr> alternatives) {
    for (auto& alt : alternatives) {
      Branch c = b;
      c.todo.push_back(std::move(alt));
      if (!refute_branch(std::move(c))) return false;
    }
    return true;
  }

  bool refute_branch(Branch b) {
    if (++leaves_ > cfg_.max_branches) return false;
    // non-branching work first
    std::vector<Expr> deferred;
    while (!b.todo.empty()) {
      Expr f = simplify(b.todo.back());
      b.todo.pop_back();
      switch (f.op()) {
        case Op::Bool:
          if (!f.flag()) return true;
          continue;
        case Op::And:
          b.todo.push_back(f.arg(0));
          b.todo.push_back(f.arg(1));
          continue;
        case Op::Var:
        case Op::Logical:
          if (add_prop(b, f, true)) return true;
          continue;
        case Op::Exists:
          b.todo.push_back(subst_logical(f.arg(0), f.name(), logical(fresh("sk"), f.bound_kind())));
          continue;
        case Op::Forall: {
          if (auto r = range_of(f)) {
            for (const Expr& t : {r->first, r->second})
              if (t.valid()) deferred.push_back(subst_logical(f.arg(0), f.name(), t));
          }
          continue;
        }
        case Op::Not: {
          const Expr& a = f.arg(0);
          switch (a.op()) {
            case Op::Var:
            case Op::Logical:
              if (add_prop(b, a, false)) return true;
              continue;
            case Op::Not: b.todo.push_back(a.arg(0)); continue;
            case Op::And: deferred.push_back(or_(not_(a.arg(0)), not_(a.arg(1)))); continue;
            case Op::Or:
              b.todo.push_back(not_(a.arg(0)));
              b.todo.push_back(not_(a.arg(1)));
              continue;
            case Op::Implies:
              b.todo.push_back(a.arg(0));
              b.todo.push_back(not_(a.arg(1)));
              continue;
            case Op::Iff:
              deferred.push_back(or_(and_(a.arg(0), not_(a.arg(1))), and_(not_(a.arg(0)), a.arg(1))));
              continue;
            case Op::Exists: b.todo.push_back(forall(a.name(), not_(a.arg(0)), a.bound_kind())); continue;
            case Op::Forall: b.todo.push_back(exists(a.name(), not_(a.arg(0)), a.bound_kind())); continue;
            case Op::Ite: b.todo.push_back(ite(a.arg(0), not_(a.arg(1)), not_(a.arg(2)))); continue;
            default:
              if (is_cmp(a.op())) b.todo.push_back(negate_atom(a));
              continue;
          }
        }
        case Op::Eq:
        case Op::Neq: {
          const Kind& k = f.arg(0).kind();
          bool is_eq = f.is(Op::Eq);
          if (k.is_bool()) {
            Expr iff_ = iff(f.arg(0), f.arg(1));
            b.todo.push_back(is_eq ? iff_ : not_(iff_));
            continue;
          }
          if (k.is_vec()) {
            auto x = vec_components(f.arg(0)), y = vec_components(f.arg(1));
            std::vector<Expr> parts;
            for (std::size_t i = 0; i < x.size(); ++i) parts.push_back(eq(x[i].to_expr(), y[i].to_expr()));
            if (is_eq) b.todo.push_back(conj(parts));
            else {
              Expr any = not_(parts[0]);
              for (std::size_t i = 1; i < parts.size(); ++i) any = or_(any, not_(parts[i]));
              deferred.push_back(any);
            }
            continue;
          }
          if (first_real_ite(f).valid() || !is_eq) {
            deferred.push_back(f);
            continue;
          }
          b.literals.push_back(f);
          continue;
        }
        case Op::Le:
        case Op::Lt:
        case Op::Ge:
        case Op::Gt:
          if (first_real_ite(f).valid()) deferred.push_back(f);
          else b.literals.push_back(f);
          continue;
        default: deferred.push_back(f); continue;
      }
    }
    if (!deferred.empty()) {
      Expr f = deferred.back();
      deferred.pop_back();
      b.todo = std::move(deferred);
      switch (f.op()) {
        case Op::Or: return split(std::move(b), {f.arg(0), f.arg(1)});
        case Op::Implies: return split(std::move(b), {not_(f.arg(0)), f.arg(1)});
        case Op::Iff:
          return split(std::move(b), {and_(f.arg(0), f.arg(1)), and_(not_(f.arg(0)), not_(f.arg(1)))});
        case Op::Ite:
          return split(std::move(b), {and_(f.arg(0), f.arg(1)), and_(not_(f.arg(0)), f.arg(2))});
        case Op::Neq:
          if (!first_real_ite(f).valid())
            return split(std::move(b), {lt(f.arg(0), f.arg(1)), gt(f.arg(0), f.arg(1))});
          [[fallthrough]];
        default: {
          Expr t = first_real_ite(f);
          if (t.valid())
            return split(std::move(b), {and_(t.arg(0), replace_node(f, t, t.arg(1))),
                                        and_(not_(t.arg(0)), replace_node(f, t, t.arg(2)))});
          b.todo.push_back(f);  // cannot happen for well-kinded input
          return false;
        }
      }
    }
    return refute_literals(b.literals);
  }

  // ---- arithmetic core -----------------------------------------------------

  /// Solves one equality for an atom that appears linearly and only once.
  static std::optional<std::pair<Expr, Expr>> solvable(const Poly& p) {
    for (const auto& atom : p.atoms()) {
      if (!(atom.is(Op::Var) || atom.is(Op::Logical))) continue;
      Rational coef;
      bool ok = true;
      Poly rest;
      for (const auto& [m, c] : p.terms()) {
        bool has = false;
        for (const auto& [a, n] : m) has = has || same(a, atom);
        if (has) {
          if (m.size() != 1 || m[0].second != 1 || coef != 0) ok = false;
          coef = c;
        } else {
          rest.add_term(m, c);
          for (const auto& [a, n] : m) ok = ok && !occurs(a, atom);
        }
      }
      if (ok && coef != 0) return std::make_pair(atom, rest.scaled(-1 / coef).to_expr());
    }
    return std::nullopt;
  }

  bool refute_literals(const std::vector<Expr>& input) {
    std::vector<ALit> lits;
    for (const auto& e : input) lits.push_back(to_alit(e));
    // eliminate variables defined by equalities
    for (bool again = true; again;) {
      again = false;
      for (std::size_t i = 0; i < lits.size(); ++i) {
        if (lits[i].rel != ALit::Rel::Eq) continue;
        auto s = solvable(lits[i].p);
        if (!s) continue;
        used_.insert("rewrite");
        std::vector<ALit> next;
        for (std::size_t j = 0; j < lits.size(); ++j) {
          if (j == i) continue;
          Expr e = subst_atom(alit_expr(lits[j]), s->first, s->second);
          next.push_back(to_alit(e));
        }
        lits = std::move(next);
        again = true;
        break;
      }
    }
    if (trivially_false(lits)) return true;
    add_atom_facts(lits);
    eliminate_divisions(lits);
    if (trivially_false(lits)) return true;
    if (positivstellensatz(lits, false) || (cfg_.use_products && positivstellensatz(lits, true))) {
      used_.insert("sign");
      return true;
    }
    if (interval_refute(lits)) {
      used_.insert("interval");
      return true;
    }
    return false;
  }

  static bool trivially_false(const std::vector<ALit>& lits) {
    for (const auto& l : lits) {
      if (!l.p.is_constant()) continue;
      Rational c = l.p.constant_term();
      if ((l.rel == ALit::Rel::Ge && c < 0) || (l.rel == ALit::Rel::Gt && c <= 0) || (l.rel == ALit::Rel::Eq && c != 0))
        return true;
    }
    return false;
  }

  /// Sign facts about transcendental atoms.
  void add_atom_facts(std::vector<ALit>& lits) {
    std::set<Expr, ExprLess> seen;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      for (const auto& a : lits[i].p.atoms()) {
        if (!seen.insert(a).second) continue;
        Poly x = Poly::atom(a);
        switch (a.op()) {
          case Op::Exp: lits.push_back({x, ALit::Rel::Gt}); break;
          case Op::Sqrt:
            lits.push_back({x, ALit::Rel::Ge});
            lits.push_back({to_poly(a.arg(0)), ALit::Rel::Ge});
            break;
          case Op::Sin:
          case Op::Cos:
            lits.push_back({Poly::constant(1) - x, ALit::Rel::Ge});
            lits.push_back({Poly::constant(1) + x, ALit::Rel::Ge});
            break;
          default: break;
        }
      }
    }
  }

  /// Replaces each non-constant quotient n/d by a fresh q with q*d = n.
  void eliminate_divisions(std::vector<ALit>& lits) {
    std::vector<std::pair<Expr, Expr>> subs;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      Poly out;
      bool changed = false;
      std::vector<ALit> defs;
      for (const auto& [m, c] : lits[i].p.terms()) {
        Poly term = Poly::constant(c);
        for (const auto& [a, n] : m) {
          Expr b = a;
          if (a.is(Op::Div)) {
            auto it = std::find_if(subs.begin(), subs.end(), [&](const auto& s) { return same(s.first, a); });
            if (it == subs.end()) {
              Expr q = logical(fresh("q"));
              subs.emplace_back(a, q);
              defs.push_back({Poly::atom(q) * to_poly(a.arg(1)) - to_poly(a.arg(0)), ALit::Rel::Eq});
              b = q;
            } else {
              b = it->second;
            }
            changed = true;
          }
          term = term * Poly::atom(b).pow(n);
        }
        out = out + term;
      }
      if (changed) lits[i].p = out;
      for (auto& d : defs) lits.push_back(std::move(d));
    }
  }

  /// Searches for a nonnegative combination of (products of) constraints
  /// that is identically zero yet strictly positive: a contradiction.
  bool positivstellensatz(const std::vector<ALit>& lits, bool products) {
    struct Col {
      Poly p;
      bool strict;
      bool free;
    };
    std::vector<Col> cols;
    std::vector<std::pair<Poly, bool>> ineqs;
    std::vector<Poly> eqs;
    std::set<Expr, ExprLess> atoms;
    for (const auto& l : lits) {
      if (l.rel == ALit::Rel::Eq) eqs.push_back(l.p);
      else ineqs.emplace_back(l.p, l.rel == ALit::Rel::Gt);
      for (const auto& a : l.p.atoms()) atoms.insert(a);
    }
    if (ineqs.empty()) return false;
    cols.push_back({Poly::constant(1), true, false});
    for (const auto& [p, s] : ineqs) cols.push_back({p, s, false});
    std::vector<Monomial> multipliers{{}};
    for (const auto& a : atoms) multipliers.push_back({{a, 1}});
    if (products) {
      std::vector<std::pair<Poly, bool>> base = ineqs;
      std::size_t n_ineq = base.size();
      for (const auto& a : atoms) base.emplace_back(Poly::atom(a).pow(2), false);
      for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = i; j < base.size(); ++j) {
          if (i >= n_ineq && j >= n_ineq) continue;
          if (i == j && i >= n_ineq) continue;
          cols.push_back({base[i].first * base[j].first, base[i].second && base[j].second, false});
          if (cols.size() > 800) break;
        }
      for (auto it = atoms.begin(); it != atoms.end(); ++it)
        for (auto jt = it; jt != atoms.end(); ++jt) multipliers.push_back(mono_mul({{*it, 1}}, {{*jt, 1}}));
    }
    for (const auto& e : eqs)
      for (const auto& m : multipliers) {
        Poly t;
        t.add_term(m, 1);
        cols.push_back({e * t, false, true});
      }
    lp::Problem prob;
    std::map<Monomial, std::size_t, MonomialLess> row_of;
    std::vector<std::map<std::size_t, Rational>> rows;
    auto row = [&](const Monomial& m) {
      auto [it, inserted] = row_of.emplace(m, rows.size());
      if (inserted) rows.emplace_back();
      return it->second;
    };
    std::size_t col = 0;
    std::map<std::size_t, Rational> norm;
    for (const auto& c : cols) {
      std::size_t width = c.free ? 2 : 1;
      for (const auto& [m, k] : c.p.terms()) {
        std::size_t r = row(m);
        rows[r][col] += k;
        if (c.free) rows[r][col + 1] -= k;
      }
      if (c.strict) norm[col] = 1;
      col += width;
    }
    prob.cols = col;
    for (auto& r : rows) prob.add_row(std::move(r), 0);
    prob.add_row(std::move(norm), 1);
    return lp::solve(prob).outcome == lp::Outcome::Feasible;
  }

  /// Branch and bound over a box read off single-variable bounds; applies
  /// only when every variable is bounded on both sides.
  bool interval_refute(const std::vector<ALit>& lits) {
    Box box;
    std::set<std::string> lower, upper;
    for (const auto& l : lits) {
      if (l.p.total_degree() != 1 || l.p.atoms().size() != 1) continue;
      Expr a = l.p.atoms()[0];
      if (!(a.is(Op::Var) || a.is(Op::Logical))) continue;
      std::string key = a.is(Op::Var) ? a.lens().str() : a.name();
      Rational c = l.p.constant_term(), k = l.p.terms().begin()->second;
      Rational bound = -c / k;
      // k x + c >= 0
      if (l.rel == ALit::Rel::Eq) {
        box.tighten(key, bound, bound, false);
        lower.insert(key);
        upper.insert(key);
      } else if (k > 0) {
        box.tighten(key, bound, std::nullopt, false);
        lower.insert(key);
      } else {
        box.tighten(key, std::nullopt, bound, false);
        upper.insert(key);
      }
    }
    std::vector<Expr> exprs;
    std::set<std::string> vars;
    for (const auto& l : lits) {
      Expr e = alit_expr(l);
      exprs.push_back(e);
      for (const auto& lr : free_lenses(e)) {
        if (!lr.is_primitive()) return false;
        vars.insert(lr.str());
      }
      for (const auto& [n, k] : free_logicals(e)) {
        if (!k.is_real()) return false;
        vars.insert(n);
      }
    }
    for (const auto& v : vars)
      if (!lower.count(v) || !upper.count(v)) return false;
    std::size_t budget = cfg_.max_boxes;
    return bisect(exprs, box, std::vector<std::string>(vars.begin(), vars.end()), cfg_.subdivision_depth, budget);
  }

  static bool bisect(const std::vector<Expr>& exprs, const Box& box, const std::vector<std::string>& vars, int depth,
                     std::size_t& budget) {
    if (budget == 0) return false;
    --budget;
    IEnv env;
    env.read = [&](const LensRef& l, const Kind& k) -> IVal {
      if (!k.is_real()) throw Undetermined{};
      return IVal::real(box.of(l.str()));
    };
    for (const auto& v : vars) env.logicals[v] = IVal::real(box.of(v));
    for (const auto& e : exprs)
      if (eval_tri(e, env) == Tri::False) return true;
    if (depth <= 0 || vars.empty()) return false;
    std::string widest = vars[0];
    for (const auto& v : vars)
      if (box.of(v).width() > box.of(widest).width()) widest = v;
    Interval w = box.of(widest);
    if (w.is_point()) return false;
    Box lo = box, hi = box;
    lo.bounds[widest] = {w.lo, w.mid()};
    hi.bounds[widest] = {w.mid(), w.hi};
    return bisect(exprs, lo, vars, depth - 1, budget) && bisect(exprs, hi, vars, depth - 1, budget);
  }

  const ArithConfig& cfg_;
  std::vector<Expr> facts_;
  std::set<std::string> taken_;
  std::set<std::string> used_;
  int counter_ = 0;
  std::size_t leaves_ = 0;
};

inline std::set<std::string> logical_names(const Expr& e) {
  std::set<std::string> out;
  transform(e, [&](const Expr& n) {
    if (n.is(Op::Logical) || n.is(Op::Forall) || n.is(Op::Exists)) out.insert(n.name());
    return n;
  });
  return out;
}

}  // namespace detail

/// Tries to prove a formula valid under the assumptions. Returns the method
/// tag on success.
inline std::optional<std::string> prove_formula(const Expr& f, const std::vector<Expr>& assumptions,
                                                const ArithConfig& cfg = {}) {
  Expr s = simplify(f);
  if (s.is_true()) return "simplify";
  auto taken = detail::logical_names(s);
  for (const auto& a : assumptions) {
    auto more = detail::logical_names(a);
    taken.insert(more.begin(), more.end());
  }
  detail::Prover p(cfg, assumptions, std::move(taken));
  if (p.prove(s)) return p.methods();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Falsification
// ---------------------------------------------------------------------------

namespace detail {

/// Outer universal prefix and antecedents of a VC: forall xs. A1 -> ... -> B.
struct Shape {
  std::vector<std::pair<std::string, Kind>> binders;
  std::vector<Expr> antecedents;
  Expr consequent;

  /// The VC with its outer binders read as free logical variables.
  Expr open() const { return implies(conj(antecedents), consequent); }
};

inline Shape shape_of(Expr f) {
  Shape s;
  for (;;) {
    if (f.is(Op::Forall)) {
      s.binders.emplace_back(f.name(), f.bound_kind());
      f = f.arg(0);
    } else if (f.is(Op::Implies)) {
      for (const auto& c : conjuncts(f.arg(0))) s.antecedents.push_back(c);
      f = f.arg(1);
    } else {
      s.consequent = f;
      return s;
    }
  }
}

inline Rational sample_in(std::mt19937_64& rng, const Interval& i) {
  std::uniform_int_distribution<int> pick(0, 9);
  int c = pick(rng);
  if (c == 0) return i.lo;
  if (c == 1) return i.hi;
  if (c == 2 && i.contains(0)) return 0;
  if (c == 3 && i.contains(1)) return 1;
  int den_bits = std::uniform_int_distribution<int>(0, 4)(rng);
  std::uniform_real_distribution<double> u(to_double(i.lo), to_double(i.hi));
  Rational q = make_rational(static_cast<long>(std::floor(u(rng) * (1 << den_bits))), 1L << den_bits);
  if (q < i.lo) q = i.lo;
  if (q > i.hi) q = i.hi;
  return q;
}

inline Value sample_value(std::mt19937_64& rng, const std::string& key, const Kind& k, const Box& box) {
  switch (k.tag) {
    case Kind::Tag::Bool: return Value(std::bernoulli_distribution(0.5)(rng));
    case Kind::Tag::Real: return Value(sample_in(rng, box.of(key)));
    case Kind::Tag::Vec: {
      std::vector<Rational> xs;
      for (unsigned i = 1; i <= k.dim; ++i) xs.push_back(sample_in(rng, box.of(key + "[" + std::to_string(i) + "]")));
      return Value(std::move(xs));
    }
  }
  return {};
}

/// Fast floating screen; true when the point might be a counterexample.
inline bool screen(const Expr& f, const Store& s, const Env& env) {
  if (has_quantifier(f)) return true;
  try {
    return !holds(f, to_num(s), to_num(env));
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

/// Seeded random search for a store and logical environment at which the
/// VC is certainly false while every assumption certainly holds.
inline Verdict falsify(const VC& vc, const ArithCtx& ctx, std::size_t trials, std::uint64_t seed) {
  if (!ctx.ds) return Verdict::unknown("no dataspace");
  Expr f = simplify(vc.formula);
  if (f.is_true()) return Verdict::unknown("formula simplifies to true");
  detail::Shape sh = detail::shape_of(f);
  Box box = ctx.box;
  for (const auto& a : sh.antecedents) box.absorb(a);
  std::vector<std::pair<std::string, Kind>> logicals = free_logicals(f);
  std::mt19937_64 rng(seed);
  Expr assumed = conj(ctx.assumptions);
  for (std::size_t t = 0; t < trials; ++t) {
    Store s(ctx.ds);
    for (const auto& d : ctx.ds->decls()) s.set(d.name, detail::sample_value(rng, d.name, d.kind, box));
    Env env;
    for (const auto& [n, k] : logicals) env[n] = detail::sample_value(rng, n, k, box);
    for (const auto& [n, k] : sh.binders) env[n] = detail::sample_value(rng, n, k, box);
    Expr body = sh.open();
    Expr claim = implies(assumed, body);
    if (!detail::screen(claim, s, env)) continue;
    IEnv ie = point_env(s, env);
    if (eval_tri(assumed, ie) == Tri::True && eval_tri(body, ie) == Tri::False) return Verdict::invalid(s, env);
  }
  return Verdict::unknown("no counterexample in " + std::to_string(trials) + " trials");
}

/// True if the witness certainly falsifies the VC (used to re-check).
inline bool witness_refutes(const VC& vc, const ArithCtx& ctx, const Store& s, const Env& env) {
  detail::Shape sh = detail::shape_of(simplify(vc.formula));
  IEnv ie = point_env(s, env);
  return eval_tri(conj(ctx.assumptions), ie) == Tri::True && eval_tri(sh.open(), ie) == Tri::False;
}

/// The discharge pipeline: simplification and polynomial identity, then
/// rewriting with linear-programming and interval refutation, then
/// counterexample search. Anything left is Unknown for external solvers.
inline Verdict prove_vc(const VC& vc, const ArithCtx& ctx) {
  if (auto m = prove_formula(vc.formula, ctx.assumptions, ctx.cfg)) return Verdict::valid(*m);
  Verdict v = falsify(vc, ctx, ctx.cfg.falsify_trials, ctx.cfg.seed);
  if (v.is_invalid()) return v;
  return Verdict::unknown("no decision procedure applied; " + v.detail);
}

// ---------------------------------------------------------------------------
// SMT-LIB export
// ---------------------------------------------------------------------------

namespace detail {

class SmtPrinter {
 public:
  std::string symbol_for(const LensRef& l) {
    std::string s = l.tag == LensRef::Tag::Coord ? l.name + "_" + std::to_string(l.index) : l.name;
    consts_[s] = "Real";
    return s;
  }

  std::string logical_symbol(const std::string& n, const Kind& k) {
    std::string s = "lg_" + n;
    if (!bound_.count(n)) consts_[s] = k.is_bool() ? "Bool" : "Real";
    return s;
  }

  /// Coordinate i (1-based) of a vector-kinded expression.
  std::string component(const Expr& e, unsigned i) {
    switch (e.op()) {
      case Op::Var: {
        if (e.lens().tag == LensRef::Tag::Coord) fail(ErrorCode::UnsupportedConstruct, "coordinate of a scalar");
        return symbol_for(LensRef::coord(e.lens().name, i));
      }
      case Op::Logical: return logical_symbol(e.name() + "_" + std::to_string(i), Kind::real());
      case Op::VecLit: return print(e.arg(i - 1));
      case Op::Neg: return "(- " + component(e.arg(0), i) + ")";
      case Op::Add: return "(+ " + component(e.arg(0), i) + " " + component(e.arg(1), i) + ")";
      case Op::Sub: return "(- " + component(e.arg(0), i) + " " + component(e.arg(1), i) + ")";
      case Op::ScalarMul: return "(* " + print(e.arg(0)) + " " + component(e.arg(1), i) + ")";
      case Op::Ite:
        return "(ite " + print(e.arg(0)) + " " + component(e.arg(1), i) + " " + component(e.arg(2), i) + ")";
      default: fail(ErrorCode::UnsupportedConstruct, "vector term " + to_string(e));
    }
  }

  std::string print(const Expr& e) {
    switch (e.op()) {
      case Op::Rat: return rational(e.num());
      case Op::Bool: return e.flag() ? "true" : "false";
      case Op::Var:
        if (e.kind().is_vec()) fail(ErrorCode::UnsupportedConstruct, "whole-vector read " + to_string(e));
        if (e.kind().is_bool()) {
          consts_[e.lens().name] = "Bool";
          return e.lens().name;
        }
        return symbol_for(e.lens());
      case Op::Logical:
        if (e.kind().is_vec()) fail(ErrorCode::UnsupportedConstruct, "vector logical " + e.name());
        return logical_symbol(e.name(), e.kind());
      case Op::Neg: return "(- " + print(e.arg(0)) + ")";
      case Op::Add: return chain("+", e);
      case Op::Sub: return bin("-", e);
      case Op::Mul: return chain("*", e);
      case Op::Div: return bin("/", e);
      case Op::Pow: {
        if (e.n() == 0) return "1";
        if (e.n() == 1) return print(e.arg(0));
        std::string b = print(e.arg(0)), out = "(*";
        for (unsigned i = 0; i < e.n(); ++i) out += " " + b;
        return out + ")";
      }
      case Op::Ln:
      case Op::Exp:
      case Op::Sin:
      case Op::Cos:
      case Op::Sqrt: {
        std::string f = fn_name(e.op());
        funs_.insert(f);
        return "(" + f + " " + print(e.arg(0)) + ")";
      }
      case Op::Norm: fail(ErrorCode::UnsupportedConstruct, "norm must be expanded to an inner product first");
      case Op::Inner: {
        unsigned n = e.arg(0).kind().dim;
        std::string out = "(+";
        for (unsigned i = 1; i <= n; ++i)
          out += " (* " + component(e.arg(0), i) + " " + component(e.arg(1), i) + ")";
        return n == 1 ? out + " 0)" : out + ")";
      }
      case Op::Nth: return component(e.arg(0), e.n());
      case Op::VecLit:
      case Op::ScalarMul: fail(ErrorCode::UnsupportedConstruct, "vector term " + to_string(e));
      case Op::Eq:
      case Op::Neq: {
        std::string body;
        if (e.arg(0).kind().is_vec()) {
          unsigned n = e.arg(0).kind().dim;
          body = "(and";
          for (unsigned i = 1; i <= n; ++i)
            body += " (= " + component(e.arg(0), i) + " " + component(e.arg(1), i) + ")";
          body += ")";
        } else {
          body = "(= " + print(e.arg(0)) + " " + print(e.arg(1)) + ")";
        }
        return e.is(Op::Eq) ? body : "(not " + body + ")";
      }
      case Op::Le: return bin("<=", e);
      case Op::Lt: return bin("<", e);
      case Op::Ge: return bin(">=", e);
      case Op::Gt: return bin(">", e);
      case Op::And: return bin("and", e);
      case Op::Or: return bin("or", e);
      case Op::Not: return "(not " + print(e.arg(0)) + ")";
      case Op::Implies: return bin("=>", e);
      case Op::Iff: return bin("=", e);
      case Op::Ite: return "(ite " + print(e.arg(0)) + " " + print(e.arg(1)) + " " + print(e.arg(2)) + ")";
      case Op::Exists:
      case Op::Forall: {
        if (e.bound_kind().is_vec()) fail(ErrorCode::UnsupportedConstruct, "vector binder " + e.name());
        quantified_ = true;
        bool fresh = bound_.insert(e.name()).second;
        std::string sort = e.bound_kind().is_bool() ? "Bool" : "Real";
        std::string out = std::string("(") + (e.is(Op::Forall) ? "forall" : "exists") + " ((lg_" + e.name() + " " +
                          sort + ")) " + print(e.arg(0)) + ")";
        if (fresh) bound_.erase(e.name());
        return out;
      }
    }
    return "";
  }

  const std::map<std::string, std::string>& consts() const { return consts_; }
  const std::set<std::string>& funs() const { return funs_; }
  bool quantified() const { return quantified_; }

 private:
  static std::string fn_name(Op op) {
    switch (op) {
      case Op::Ln: return "ln";
      case Op::Exp: return "exp";
      case Op::Sin: return "sin";
      case Op::Cos: return "cos";
      default: return "sqrt";
    }
  }
  static std::string rational(const Rational& q) {
    auto nat = [](const mpz_class& z) {
      std::string s = z.get_str();
      return s[0] == '-' ? s.substr(1) : s;
    };
    std::string body = is_integer(q) ? nat(q.get_num()) : "(/ " + nat(q.get_num()) + " " + nat(q.get_den()) + ")";
    return q < 0 ? "(- " + body + ")" : body;
  }
  /// Flattens left-nested chains of an associative operator.
  std::string chain(const char* op, const Expr& e) {
    std::vector<Expr> xs;
    Expr cur = e;
    while (cur.op() == e.op()) {
      xs.push_back(cur.arg(1));
      cur = cur.arg(0);
    }
    xs.push_back(cur);
    std::string out = std::string("(") + op;
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) out += " " + print(*it);
    return out + ")";
  }
  std::string bin(const char* op, const Expr& e) {
    return std::string("(") + op + " " + print(e.arg(0)) + " " + print(e.arg(1)) + ")";
  }

  std::map<std::string, std::string> consts_;
  std::set<std::string> funs_;
  std::set<std::string> bound_;
  bool quantified_ = false;
};

}  // namespace detail

/// SMT-LIB2 script asserting the negation of the VC under the assumptions.
/// Satisfiable means a counterexample exists.
inline std::string emit_smtlib(const VC& vc, const std::vector<Expr>& assumptions, bool axioms = false) {
  detail::SmtPrinter pr;
  std::vector<std::string> facts;
  for (const auto& a : assumptions) facts.push_back(pr.print(a));
  std::string goal = pr.print(vc.formula);
  std::string logic = pr.funs().empty() ? (pr.quantified() ? "NRA" : "QF_NRA") : "UFNRA";
  std::ostringstream out;
  out << "; " << vc.id << " (" << vc.origin << ")\n";
  out << "(set-logic " << logic << ")\n";
  for (const auto& f : pr.funs()) out << "(declare-fun " << f << " (Real) Real)\n";
  for (const auto& [n, sort] : pr.consts()) out << "(declare-const " << n << " " << sort << ")\n";
  if (axioms) {
    if (pr.funs().count("exp")) out << "(assert (forall ((u Real)) (> (exp u) 0)))\n";
    if (pr.funs().count("sqrt")) out << "(assert (forall ((u Real)) (=> (>= u 0) (= (* (sqrt u) (sqrt u)) u))))\n";
    for (const char* f : {"sin", "cos"})
      if (pr.funs().count(f))
        out << "(assert (forall ((u Real)) (and (<= (- 1) (" << f << " u)) (<= (" << f << " u) 1))))\n";
  }
  for (const auto& f : facts) out << "(assert " << f << ")\n";
  if (vc.formula.is(Op::Bool)) out << "(assert " << (vc.formula.flag() ? "false" : "true") << ")\n";
  else out << "(assert (not " << goal << "))\n";
  out << "(check-sat)\n";
  return out.str();
}

}  // namespace hsv
