#pragma once

#include <hsv/eval.hpp>
#include <hsv/simplify.hpp>
#include <hsv/subst.hpp>

namespace hsv {

/// Direction (vector field) and the continuous frame it moves.
struct DerivCtx {
  Subst f;
  Frame frame;

  /// Checks that every updated lens is part of the frame.
  void check() const {
    for (const auto& [l, e] : f.entries())
      if (!frame.covers(l)) fail(ErrorCode::NotPartOf, "field updates " + l.str() + " outside " + frame.str());
  }
};

struct DerivResult {
  Expr value;
  /// Positivity side conditions required by ln and sqrt.
  std::vector<Expr> provisos;
};

namespace detail {

class Differ {
 public:
  explicit Differ(const DerivCtx& ctx) : ctx_(ctx) {}

  std::vector<Expr> provisos;

  Expr d(const Expr& e) {
    if (unrest(ctx_.frame, e)) {
      if (e.kind().is_bool()) not_differentiable(e);
      return zero_of(e.kind());
    }
    const auto& a = e.args();
    switch (e.op()) {
      case Op::Var: return read(e);
      case Op::Neg: return -d(a[0]);
      case Op::Add: return d(a[0]) + d(a[1]);
      case Op::Sub: return d(a[0]) - d(a[1]);
      case Op::Mul: return d(a[0]) * a[1] + a[0] * d(a[1]);
      case Op::Div:
        if (!unrest(ctx_.frame, a[1])) not_differentiable(e);
        return d(a[0]) / a[1];
      case Op::Pow:
        if (e.n() == 0) return lit(0);
        return lit(static_cast<long>(e.n())) * d(a[0]) * pow(a[0], e.n() - 1);
      case Op::Ln:
        provisos.push_back(gt(a[0], lit(0)));
        return d(a[0]) / a[0];
      case Op::Exp: return d(a[0]) * e;
      case Op::Sin: return d(a[0]) * cos(a[0]);
      case Op::Cos: return -(d(a[0]) * sin(a[0]));
      case Op::Sqrt:
        provisos.push_back(gt(a[0], lit(0)));
        return d(a[0]) / (lit(2) * e);
      case Op::Norm:
        provisos.push_back(gt(inner(a[0], a[0]), lit(0)));
        return inner(a[0], d(a[0])) / e;
      case Op::Inner: return inner(d(a[0]), a[1]) + inner(a[0], d(a[1]));
      case Op::ScalarMul: return smul(d(a[0]), a[1]) + smul(a[0], d(a[1]));
      case Op::VecLit: {
        std::vector<Expr> xs;
        for (const auto& x : a) xs.push_back(d(x));
        return veclit(std::move(xs));
      }
      case Op::Nth: return nth(d(a[0]), e.n());
      case Op::Ite:
        if (!unrest(ctx_.frame, a[0])) not_differentiable(e);
        return ite(a[0], d(a[1]), d(a[2]));
      default: not_differentiable(e);
    }
  }

 private:
  [[noreturn]] static void not_differentiable(const Expr& e) {
    fail(ErrorCode::NotDifferentiable, to_string(e));
  }

  Expr read(const Expr& e) {
    const LensRef& x = e.lens();
    if (ctx_.frame.covers(x)) return subst_lookup(ctx_.f, x, e.kind());
    // Only some coordinates of a vector variable are continuous.
    std::vector<Expr> xs;
    for (unsigned i = 1; i <= e.kind().dim; ++i) {
      LensRef c = LensRef::coord(x.name, i);
      xs.push_back(ctx_.frame.covers(c) ? subst_lookup(ctx_.f, c) : lit(0));
    }
    return veclit(std::move(xs));
  }

  const DerivCtx& ctx_;
};

}  // namespace detail

/// Framed Lie derivative without simplification, plus provisos.
inline DerivResult lie_deriv_raw(const DerivCtx& ctx, const Expr& e) {
  if (has_quantifier(e)) fail(ErrorCode::NotDifferentiable, "quantified expression " + to_string(e));
  detail::Differ dv(ctx);
  Expr v = dv.d(e);
  return {v, std::move(dv.provisos)};
}

inline DerivResult lie_deriv_full(const DerivCtx& ctx, const Expr& e) {
  auto r = lie_deriv_raw(ctx, e);
  r.value = simplify(r.value);
  for (auto& p : r.provisos) p = simplify(p);
  return r;
}

/// Framed Lie derivative of e along ctx.f, simplified.
inline Expr lie_deriv(const DerivCtx& ctx, const Expr& e) { return lie_deriv_full(ctx, e).value; }

/// Central finite difference of e along the field at s, moving only the
/// framed part of the store.
inline double fd_oracle(const DerivCtx& ctx, const Expr& e, const NumStore& s, double h, const NumEnv& env = {}) {
  const Dataspace& ds = s.dataspace();
  std::vector<std::pair<LensRef, NumValue>> dirs;
  for (const auto& p : ctx.frame.items()) {
    Kind k = lens_kind(p, ds);
    Expr rhs = subst_lookup(ctx.f, p, k);
    dirs.emplace_back(p, eval(rhs, s, env));
  }
  auto shifted = [&](double t) {
    NumStore out = s;
    for (const auto& [p, dv] : dirs) {
      NumValue cur = lens_get(p, s);
      if (cur.is_vec()) {
        auto xs = cur.vec();
        for (std::size_t i = 0; i < xs.size(); ++i) xs[i] += t * dv.vec()[i];
        out = lens_put(p, NumValue(std::move(xs)), out);
      } else {
        out = lens_put(p, NumValue(cur.real() + t * dv.real()), out);
      }
    }
    return out;
  };
  double up = eval(e, shifted(h), env).real();
  double down = eval(e, shifted(-h), env).real();
  return (up - down) / (2 * h);
}

}  // namespace hsv
