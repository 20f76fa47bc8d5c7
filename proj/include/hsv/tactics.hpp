#pragma once

#include <hsv/arith.hpp>
#include <hsv/deriv.hpp>

namespace hsv {

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// One applied rule, for the proof trace.
struct RuleStep {
  std::string rule;
  std::string before;
  std::string after;
};

struct VcOutcome {
  VC vc;
  Verdict verdict;
};

struct ProofResult {
  enum class Status { Proved, Refuted, Unknown };
  Status status = Status::Unknown;
  std::vector<RuleStep> trace;
  /// Every VC that was handed to arithmetic, with its verdict.
  std::vector<VcOutcome> vcs;
  /// Refuted: the falsified VC and the point that falsifies it.
  std::optional<VcOutcome> refutation;

  bool proved() const { return status == Status::Proved; }
  bool refuted() const { return status == Status::Refuted; }

  std::vector<VC> residual() const {
    std::vector<VC> out;
    for (const auto& o : vcs)
      if (!o.verdict.is_valid()) out.push_back(o.vc);
    return out;
  }

  void note(std::string rule, const Expr& before, std::string after = "") {
    trace.push_back({std::move(rule), before.valid() ? to_string(before) : "", std::move(after)});
  }
};

inline const char* status_name(ProofResult::Status s) {
  switch (s) {
    case ProofResult::Status::Proved: return "Proved";
    case ProofResult::Status::Refuted: return "Refuted";
    default: return "Unknown";
  }
}

namespace detail {

inline const Ode& require_ode(const Triple& t) {
  if (!t.prog.is(Program::Tag::Ode)) fail(ErrorCode::NotAnODE, "expected a single ODE");
  return t.prog.ode();
}

inline Expr ode_guard(const Ode& o) { return simplify(and_(o.guard, o.dom)); }

inline Expr guarded(const Expr& g, const Expr& body) { return g.is_true() ? body : implies(g, body); }

/// Strips the structural zeros and unit powers left by the product rule,
/// keeping the derivative otherwise as computed.
inline Expr tidy_derivative(const Expr& e) {
  return transform(e, [](const Expr& n) {
    auto zero = [](const Expr& x) { return x.is_rat() && x.num() == 0; };
    if (n.is(Op::Pow) && n.n() == 1) return n.arg(0);
    if (n.is(Op::Mul) && (zero(n.arg(0)) || zero(n.arg(1)))) return lit(0);
    if (n.is(Op::Add) && zero(n.arg(0))) return n.arg(1);
    return n;
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Proof rules for ODEs
// ---------------------------------------------------------------------------

/// Differential induction premise for one comparison atom.
inline Expr d_induct_premise(const Ode& o, const Expr& atom, std::vector<Expr>* provisos = nullptr) {
  DerivCtx ctx{o.rhs, o.frame};
  Expr a = atom;
  if (a.is(Op::Ge) || a.is(Op::Gt)) a = compare(a.is(Op::Ge) ? Op::Le : Op::Lt, a.arg(1), a.arg(0));
  if (!(a.is(Op::Eq) || a.is(Op::Le) || a.is(Op::Lt)))
    fail(ErrorCode::UnsupportedRelation, "differential induction needs =, <= or <, got " + to_string(atom));
  if (!a.arg(0).kind().is_numeric())
    fail(ErrorCode::UnsupportedRelation, "boolean equality " + to_string(atom));
  ctx.check();
  auto l = lie_deriv_raw(ctx, a.arg(0)), r = lie_deriv_raw(ctx, a.arg(1));
  if (provisos) {
    for (const auto& p : l.provisos) provisos->push_back(simplify(p));
    for (const auto& p : r.provisos) provisos->push_back(simplify(p));
  }
  // strict invariants only need the non-strict premise
  return compare(a.is(Op::Lt) ? Op::Le : a.op(), detail::tidy_derivative(l.value), detail::tidy_derivative(r.value));
}

/// Differential induction: the invariant (conjunction of atoms) is
/// preserved when the derivatives keep the relation under the guard. A
/// second VC pre => post appears when the two differ.
inline std::vector<VC> d_induct(const Triple& t) {
  const Ode& o = detail::require_ode(t);
  std::vector<Expr> provisos, premises;
  for (const auto& atom : conjuncts(simplify(t.post))) premises.push_back(d_induct_premise(o, atom, &provisos));
  Expr side = conj(provisos);
  Expr body = provisos.empty() ? conj(premises) : and_(side, conj(premises));
  std::vector<VC> out{{"", detail::guarded(detail::ode_guard(o), body), "dInduct", provisos}};
  if (!same(simplify(t.pre), simplify(t.post))) out.push_back({"", simplify(implies(t.pre, t.post)), "dInduct-init", {}});
  number_vcs(out);
  return out;
}

struct CutGoals {
  /// {C} ODE {C}
  Triple cut;
  /// t with guard strengthened by C
  Triple main;
  /// P => C, needed to start the cut invariant.
  VC init;
};

/// Differential cut: prove C invariant, then use it as part of the guard.
inline CutGoals d_cut(const Triple& t, const Expr& c) {
  Ode o = detail::require_ode(t);
  CutGoals out;
  out.cut = Triple{c, t.prog, c, t.context};
  o.guard = simplify(and_(o.guard, c));
  out.main = Triple{t.pre, Program::ode(o), t.post, t.context};
  out.init = VC{"vc1", simplify(implies(t.pre, c)), "dCut-init", {}};
  return out;
}

/// Differential weakening: the postcondition follows from the guard.
inline VC d_weaken(const Triple& t) {
  const Ode& o = detail::require_ode(t);
  return VC{"vc1", simplify(implies(detail::ode_guard(o), t.post)), "dWeaken", {}};
}

/// Discrete invariants (nothing in the ODE frame) ride along unchanged.
inline Triple d_discrete_frame(const Triple& t, const Expr& inv) {
  const Ode& o = detail::require_ode(t);
  if (!unrest(o.frame, inv))
    fail(ErrorCode::UnrestViolation, to_string(inv) + " reads part of the frame " + o.frame.str());
  return Triple{and_(t.pre, inv), t.prog, and_(t.post, inv), t.context};
}

struct GhostGoals {
  /// pre <=> exists v. I[v/y]
  VC equivalence;
  /// {I} {x' = f, y' = k*y | G} {I}
  Triple goal;
};

/// Differential ghost with linear dynamics y' = k*y; concludes {P} ODE {P}.
inline GhostGoals d_ghost(const Triple& t, const LensRef& y, const Expr& inv, const Rational& k,
                          const Dataspace& ds) {
  const Ode& o = detail::require_ode(t);
  if (!y.is_primitive() || !ds.contains(y.name))
    fail(ErrorCode::GhostNotFresh, "ghost " + y.str() + " is not a declared variable");
  for (const auto& x : o.frame.items())
    if (!lens_indep(x, y)) fail(ErrorCode::GhostNotFresh, "ghost " + y.str() + " overlaps the frame " + o.frame.str());
  Frame yf{y};
  if (!unrest(yf, o.guard) || !unrest(yf, o.dom)) fail(ErrorCode::GhostInGuardOrField, y.str() + " occurs in the guard");
  for (const auto& [l, e] : o.rhs.entries())
    if (!unrest(yf, e)) fail(ErrorCode::GhostInGuardOrField, y.str() + " occurs in the field of " + l.str());
  Kind yk = lens_kind(y, ds);
  std::string v = detail::fresh_logical("v", {inv, t.pre});
  Expr exists_v = exists(v, subst_apply_expr(inv, Subst{{y, logical(v, yk)}}), yk);
  GhostGoals out;
  out.equivalence = VC{"vc1", iff(t.pre, exists_v), "dGhost-equiv", {}};
  Ode g = o;
  g.frame = o.frame.unite(yf);
  g.rhs.set(y, yk.is_vec() ? smul(lit(k), var(y, yk)) : lit(k) * var(y, yk));
  out.goal = Triple{inv, Program::ode(g), inv, t.context};
  return out;
}

// ---------------------------------------------------------------------------
// Flow certification
// ---------------------------------------------------------------------------

struct FlowCandidate {
  Ode ode;
  /// Solution over the logical tau, one entry per frame lens.
  Subst flow;
  std::optional<Rational> lipschitz;
};

struct CertConfig {
  DataspacePtr ds;
  std::size_t pairs = 1000;
  std::uint64_t seed = 0;
  Box box;
  /// Samples are drawn within this distance of each other (local condition).
  double neighbourhood = 1.0;
};

struct CertResult {
  Rational lipschitz;
  std::size_t pairs = 0;
  /// Largest observed |f(s1) - f(s2)| / |s1 - s2|. Numeric evidence only.
  double max_ratio = 0;
};

namespace detail {

inline const std::string& tau_read_name() {
  static const std::string n = "__tau";
  return n;
}

/// d/dtau of an expression over the logical tau.
inline Expr d_tau(const Expr& e) {
  Expr t = var(tau_read_name());
  Expr body = subst_logical(e, tau_name(), t);
  DerivCtx ctx{Subst{{LensRef::var(tau_read_name()), lit(1)}}, Frame{LensRef::var(tau_read_name())}};
  Expr d = lie_deriv(ctx, body);
  return subst_apply_expr(d, Subst{{LensRef::var(tau_read_name()), tau()}});
}

inline std::vector<double> flat(const NumValue& v) {
  if (v.is_real()) return {v.real()};
  if (v.is_vec()) return v.vec();
  return {};
}

inline double sample_double(std::mt19937_64& rng, const Interval& i) {
  return std::uniform_real_distribution<double>(to_double(i.lo), to_double(i.hi))(rng);
}

}  // namespace detail

/// Checks the flow solves the ODE (exactly), starts at the identity
/// (exactly) and that the field looks Lipschitz with constant L (sampled).
inline CertResult certify_flow(const FlowCandidate& c, const CertConfig& cfg) {
  const Ode& o = c.ode;
  if (!(c.flow.frame() == o.frame))
    fail(ErrorCode::DerivativeMismatch, "flow updates " + c.flow.frame().str() + " but the frame is " + o.frame.str());
  for (const auto& [x, rhs] : o.rhs.entries()) {
    const Expr* phi = c.flow.find(x);
    if (!phi) fail(ErrorCode::DerivativeMismatch, "no flow for " + x.str());
    Expr lhs = detail::d_tau(*phi);
    Expr rhs_at = subst_apply_expr(rhs, c.flow);
    if (!poly_equal(lhs, rhs_at))
      fail(ErrorCode::DerivativeMismatch,
           "d/dtau of the flow of " + x.str() + " differs from the field by " + to_string(poly_normalize(lhs - rhs_at)));
  }
  for (const auto& [x, phi] : c.flow.entries()) {
    Expr at0 = subst_logical(phi, tau_name(), lit(0));
    Expr id = var(x, phi.kind());
    if (!poly_equal(at0, id)) fail(ErrorCode::NotIdentityAtZero, "flow of " + x.str() + " at tau = 0 is " + to_string(simplify(at0)));
  }
  CertResult out;
  out.lipschitz = c.lipschitz.value_or(1);
  if (!cfg.ds) return out;
  double L = to_double(out.lipschitz);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> step(-cfg.neighbourhood, cfg.neighbourhood);
  auto field_at = [&](const NumStore& s) {
    std::vector<double> out;
    for (const auto& [x, e] : o.rhs.entries())
      for (double d : detail::flat(eval(e, s))) out.push_back(d);
    return out;
  };
  for (std::size_t attempt = 0; out.pairs < cfg.pairs && attempt < 20 * cfg.pairs; ++attempt) {
    NumStore s1(cfg.ds);
    for (const auto& d : cfg.ds->decls()) {
      switch (d.kind.tag) {
        case Kind::Tag::Bool: s1.set(d.name, NumValue(std::bernoulli_distribution(0.5)(rng))); break;
        case Kind::Tag::Real: s1.set(d.name, NumValue(detail::sample_double(rng, cfg.box.of(d.name)))); break;
        case Kind::Tag::Vec: {
          std::vector<double> xs;
          for (unsigned i = 1; i <= d.kind.dim; ++i)
            xs.push_back(detail::sample_double(rng, cfg.box.of(d.name + "[" + std::to_string(i) + "]")));
          s1.set(d.name, NumValue(std::move(xs)));
        }
      }
    }
    NumStore s2 = s1;
    double dist2 = 0;
    for (const auto& x : o.frame.items()) {
      NumValue v = lens_get(x, s1);
      if (v.is_real()) {
        double dx = step(rng);
        dist2 += dx * dx;
        s2 = lens_put(x, NumValue(v.real() + dx), s2);
      } else if (v.is_vec()) {
        std::vector<double> xs = v.vec();
        for (auto& xi : xs) {
          double dx = step(rng);
          dist2 += dx * dx;
          xi += dx;
        }
        s2 = lens_put(x, NumValue(std::move(xs)), s2);
      }
    }
    if (dist2 == 0) continue;
    std::vector<double> f1, f2;
    try {
      f1 = field_at(s1);
      f2 = field_at(s2);
    } catch (const Error&) {
      continue;  // outside the field's domain
    }
    double df2 = 0;
    for (std::size_t i = 0; i < f1.size(); ++i) df2 += (f1[i] - f2[i]) * (f1[i] - f2[i]);
    double ratio = std::sqrt(df2 / dist2);
    out.max_ratio = std::max(out.max_ratio, ratio);
    if (ratio > L * (1 + 1e-9) + 1e-12)
      fail(ErrorCode::LipschitzSampleFailure,
           "ratio " + std::to_string(ratio) + " exceeds L = " + to_string(out.lipschitz) + " at " + s1.str());
    ++out.pairs;
  }
  if (out.pairs < cfg.pairs)
    fail(ErrorCode::LipschitzSampleFailure, "only " + std::to_string(out.pairs) + " pairs were in the field's domain");
  return out;
}

/// Tries the Lipschitz constants 1/2, 1 and 2 in that order.
inline CertResult local_flow_auto(const Ode& ode, const Subst& flow, const CertConfig& cfg) {
  std::string last;
  for (const Rational& L : {make_rational(1, 2), make_rational(1), make_rational(2)}) {
    try {
      return certify_flow(FlowCandidate{ode, flow, L}, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LipschitzSampleFailure) throw;
      last = e.what();
    }
  }
  fail(ErrorCode::AllConstantsFailed, "no constant in {1/2, 1, 2} works: " + last);
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

namespace detail {

inline Verdict decide(const VC& vc, const ArithCtx& ctx, const std::vector<Expr>& facts) {
  ArithCtx c = ctx;
  c.assumptions.insert(c.assumptions.end(), facts.begin(), facts.end());
  return prove_vc(vc, c);
}

inline bool valid(const Expr& f, const ArithCtx& ctx, const std::vector<Expr>& facts) {
  std::vector<Expr> all = ctx.assumptions;
  all.insert(all.end(), facts.begin(), facts.end());
  return prove_formula(f, all, ctx.cfg).has_value();
}

inline void number_vcs_of(ProofResult& r) {
  for (std::size_t i = 0; i < r.vcs.size(); ++i) r.vcs[i].vc.id = "vc" + std::to_string(i + 1);
}

inline bool contains_same(const std::vector<Expr>& xs, const Expr& e) {
  return std::any_of(xs.begin(), xs.end(), [&](const Expr& x) { return same(x, e); });
}

}  // namespace detail

/// Worklist strategy over the atoms of pre and post. Each atom is closed by
/// facts, weakening, the discrete frame rule, or induction, and every atom
/// so proved is cut into the guard for the ones after it.
inline ProofResult d_induct_mega(const Triple& t, const std::vector<Expr>& facts, const ArithCtx& ctx) {
  ProofResult res;
  if (!t.prog.is(Program::Tag::Ode)) {
    res.note("dInductMega", t.post, "not a single ODE");
    return res;
  }
  const Ode& o = t.prog.ode();
  Expr g = detail::ode_guard(o);
  Expr pre = simplify(t.pre);
  std::vector<Expr> pre_atoms = conjuncts(pre), atoms = pre_atoms, post_atoms = conjuncts(simplify(t.post));
  for (const auto& a : post_atoms)
    if (!detail::contains_same(atoms, a)) atoms.push_back(a);
  std::vector<bool> done(atoms.size(), false);
  std::vector<Expr> cuts;
  auto in_post = [&](std::size_t i) { return detail::contains_same(post_atoms, atoms[i]); };
  auto all_post_done = [&] {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (in_post(i) && !done[i]) return false;
    return true;
  };
  // Each closed atom keeps the obligation that closed it as a Valid VC.
  std::vector<Expr> all_facts = ctx.assumptions;
  all_facts.insert(all_facts.end(), facts.begin(), facts.end());
  std::optional<std::string> how;
  auto check = [&](const Expr& f) { return (how = prove_formula(f, all_facts, ctx.cfg)).has_value(); };
  auto record = [&](const Expr& f, const char* rule) {
    res.vcs.push_back({VC{"", f, std::string("dInductMega-") + rule, {}}, Verdict::valid(*how)});
  };
  auto close = [&](std::size_t i, const char* rule, const std::string& why, const Expr& f) {
    done[i] = true;
    cuts.push_back(atoms[i]);
    record(f, rule);
    res.note(rule, atoms[i], why);
    res.note("dCut", atoms[i], "guard now includes it");
  };
  for (int pass = 0; pass < 8 && !all_post_done(); ++pass) {
    bool progress = false;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (done[i] || atoms[i].is_true()) {
        done[i] = true;
        continue;
      }
      const Expr& a = atoms[i];
      Expr known = conj(cuts);
      Expr f_fact = implies(known, a), f_weak = implies(and_(g, known), a), f_disc = implies(pre, a);
      if (!cuts.empty() && check(f_fact)) {
        close(i, "fact", "follows from facts and earlier invariants", f_fact);
      } else if (check(f_weak)) {
        close(i, "dWeaken", "follows from the guard", f_weak);
      } else if (unrest(o.frame, a) && check(f_disc)) {
        close(i, "dD", "discrete, holds initially", f_disc);
      } else {
        Expr premise;
        try {
          premise = d_induct_premise(o, a);
        } catch (const Error& e) {
          res.note("dInduct", a, std::string("not applicable: ") + e.what());
          continue;
        }
        Expr f_init = implies(and_(pre, g), a), f_step = implies(and_(g, known), premise);
        bool in_pre = detail::contains_same(pre_atoms, a);
        if (!in_pre && !check(f_init)) continue;
        if (!in_pre) record(f_init, "init");
        if (check(f_step)) close(i, "dInduct", to_string(premise), f_step);
        else continue;
      }
      progress = true;
    }
    if (!progress) break;
  }
  if (all_post_done()) {
    detail::number_vcs_of(res);
    res.status = ProofResult::Status::Proved;
    return res;
  }
  // residual obligations; a failed start condition is a real counterexample
  std::vector<VC> residual;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!in_post(i) || done[i]) continue;
    const Expr& a = atoms[i];
    VC init{"", simplify(implies(and_(pre, g), a)), "dInductMega-init", {}};
    Verdict vi = detail::decide(init, ctx, facts);
    if (vi.is_invalid()) {
      res.status = ProofResult::Status::Refuted;
      res.vcs.push_back({init, vi});
      detail::number_vcs_of(res);
      res.refutation = res.vcs.back();
      return res;
    }
    Expr premise;
    try {
      premise = d_induct_premise(o, a);
    } catch (const Error&) {
      premise = a;
    }
    VC step{"", simplify(implies(and_(g, conj(cuts)), premise)), "dInductMega-step", {}};
    res.vcs.push_back({step, Verdict::unknown("strategy exhausted")});
  }
  res.note("dInductMega", t.post, "exhausted");
  detail::number_vcs_of(res);
  return res;
}

namespace detail {

/// An ODE obligation {pre} ode {post} produced while computing wlp.
struct OdeObligation {
  Triple triple;
  std::vector<Expr> path_facts;
};

/// wlp in which ODEs without a certified flow contribute their postcondition
/// and an invariance obligation, using the branch and test conditions that
/// still hold when the ODE starts.
class ProveWlp {
 public:
  ProveWlp(const FlowTable& flows, std::vector<VC>& side, std::vector<OdeObligation>& obligations)
      : flows_(flows), side_(side), obligations_(obligations) {}

  Expr run(const Program& p, const Expr& q, const std::vector<Expr>& facts) {
    switch (p.tag()) {
      case Program::Tag::Seq: {
        const Program& a = p.kid(0);
        std::vector<Expr> after = keep(facts, modset(a));
        add_tail_tests(a, after);
        return run(a, run(p.kid(1), q, after), facts);
      }
      case Program::Tag::Choice: return and_(run(p.kid(0), q, facts), run(p.kid(1), q, facts));
      case Program::Tag::If: {
        auto yes = facts, no = facts;
        yes.push_back(p.cond());
        no.push_back(not_(p.cond()));
        return and_(implies(p.cond(), run(p.kid(0), q, yes)), implies(not_(p.cond()), run(p.kid(1), q, no)));
      }
      case Program::Tag::Loop: {
        if (!p.invariant().valid()) fail(ErrorCode::MissingLoopInvariant, "loop without inv");
        const Expr& inv = p.invariant();
        Expr body = run(p.kid(0), inv, {inv});
        side_.push_back({"", implies(inv, body), "loop-preserve", {}});
        side_.push_back({"", implies(inv, q), "loop-use", {}});
        return inv;
      }
      case Program::Tag::Ode: {
        const Ode& o = p.ode();
        if (const auto* e = flows_.find(o)) return flow_wlp(e->flow, and_(o.guard, o.dom), o.dur, q);
        obligations_.push_back({Triple{and_(q, conj(facts)), p, q, {}}, facts});
        return q;
      }
      default: return Wlp(flows_, &side_).run(p, q);
    }
  }

 private:
  static std::vector<Expr> keep(const std::vector<Expr>& facts, const Frame& mods) {
    std::vector<Expr> out;
    for (const auto& f : facts)
      if (unrest(mods, f)) out.push_back(f);
    return out;
  }

  /// Tests at the end of a program hold right after it.
  static void add_tail_tests(const Program& p, std::vector<Expr>& out) {
    if (p.is(Program::Tag::Test)) out.push_back(p.cond());
    if (p.is(Program::Tag::Seq)) {
      add_tail_tests(p.kid(1), out);
      if (p.kid(1).is(Program::Tag::Test)) {
        std::vector<Expr> before;
        add_tail_tests(p.kid(0), before);
        for (auto& f : keep(before, modset(p.kid(1)))) out.push_back(f);
      }
    }
  }

  const FlowTable& flows_;
  std::vector<VC>& side_;
  std::vector<OdeObligation>& obligations_;
};

}  // namespace detail

/// Whole-system strategy: loop rule and wlp for the discrete parts, flows
/// where certified, and dInduct-mega on every other ODE.
inline ProofResult d_prove(const Triple& t, const ArithCtx& ctx, const FlowTable& flows = {},
                           const std::vector<Expr>& facts = {}) {
  ProofResult res;
  std::vector<VC> side;
  std::vector<detail::OdeObligation> obligations;
  Expr w = detail::ProveWlp(flows, side, obligations).run(t.prog, t.post, {});
  std::vector<VC> vcs;
  vcs.push_back({"", simplify(implies(t.pre, w)), t.prog.is(Program::Tag::Loop) ? "loop-init" : "wp", {}});
  for (auto& v : side) {
    v.formula = simplify(v.formula);
    vcs.push_back(std::move(v));
  }
  number_vcs(vcs);
  res.note(t.prog.is(Program::Tag::Loop) ? "loop" : "wp", t.post, std::to_string(vcs.size()) + " VCs");
  bool all = true;
  for (const auto& vc : vcs) {
    Verdict v = detail::decide(vc, ctx, facts);
    res.vcs.push_back({vc, v});
    if (v.is_invalid() && !res.refutation) res.refutation = VcOutcome{vc, v};
    all = all && v.is_valid();
  }
  for (const auto& ob : obligations) {
    res.note("ode", ob.triple.post, "obligation under " + std::to_string(ob.path_facts.size()) + " path facts");
    ProofResult sub = d_induct_mega(ob.triple, facts, ctx);
    for (auto& s : sub.trace) res.trace.push_back(std::move(s));
    for (auto& v : sub.vcs) res.vcs.push_back(std::move(v));
    if (sub.refuted() && !res.refutation) res.refutation = sub.refutation;
    all = all && sub.proved();
  }
  if (res.refutation) res.status = ProofResult::Status::Refuted;
  else if (all) res.status = ProofResult::Status::Proved;
  return res;
}

}  // namespace hsv
