#pragma once

#include <hsv/program.hpp>

#include <cmath>
#include <random>

namespace hsv {

struct SimConfig {
  double step = 0.01;
  double horizon = 10.0;
  double guard_tolerance = 1e-9;
  std::size_t samples_per_orbit = 20;
  std::uint64_t rng_seed = 0;
  /// Iterations explored per loop.
  std::size_t max_loop_iterations = 8;
  /// Cap on the number of stores carried between statements.
  std::size_t max_states = 64;

  void check() const {
    if (!(step > 0)) throw std::invalid_argument("step must be positive");
    if (!(horizon >= 0)) throw std::invalid_argument("horizon must be nonnegative");
  }
};

/// A store at an instant of (accumulated) evolution time.
struct TracePoint {
  double time = 0;
  NumStore store;
};

namespace detail {

inline NumEnv tau_env(const NumEnv& env, double t) {
  NumEnv e = env;
  e[tau_name()] = NumValue(t);
  return e;
}

inline bool guard_holds(const Expr& g, const NumStore& s, const NumEnv& env, double tol) {
  if (g.is_true()) return true;
  return holds(g, s, env, EvalOptions{tol});
}

/// Evaluation of a framed field as a flat vector of rates.
class Field {
 public:
  Field(const Ode& ode, const Dataspace& ds) {
    for (const auto& p : ode.frame.items()) {
      Kind k = lens_kind(p, ds);
      lenses_.push_back(p);
      rates_.push_back(subst_lookup(ode.rhs, p, k));
      dims_.push_back(k.is_vec() ? k.dim : 0);
    }
  }

  std::vector<double> get(const NumStore& s) const {
    std::vector<double> out;
    for (const auto& l : lenses_) append(out, lens_get(l, s));
    return out;
  }
  NumStore put(const std::vector<double>& x, const NumStore& s) const {
    NumStore out = s;
    std::size_t k = 0;
    for (std::size_t i = 0; i < lenses_.size(); ++i) {
      if (dims_[i]) {
        std::vector<double> v(x.begin() + static_cast<long>(k), x.begin() + static_cast<long>(k + dims_[i]));
        k += dims_[i];
        out = lens_put(lenses_[i], NumValue(std::move(v)), out);
      } else {
        out = lens_put(lenses_[i], NumValue(x[k++]), out);
      }
    }
    return out;
  }
  std::vector<double> rate(const NumStore& s, const NumEnv& env) const {
    std::vector<double> out;
    for (const auto& r : rates_) append(out, eval(r, s, env));
    return out;
  }

 private:
  static void append(std::vector<double>& out, const NumValue& v) {
    if (v.is_vec()) out.insert(out.end(), v.vec().begin(), v.vec().end());
    else out.push_back(v.real());
  }

  std::vector<LensRef> lenses_;
  std::vector<Expr> rates_;
  std::vector<unsigned> dims_;
};

inline std::vector<double> axpy(const std::vector<double>& x, double a, const std::vector<double>& y) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
  return out;
}

}  // namespace detail

namespace detail {
inline NumStore rk4(const Field& f, const NumStore& s, double h, const NumEnv& env) {
  auto x = f.get(s);
  auto k1 = f.rate(s, env);
  auto k2 = f.rate(f.put(axpy(x, h / 2, k1), s), env);
  auto k3 = f.rate(f.put(axpy(x, h / 2, k2), s), env);
  auto k4 = f.rate(f.put(axpy(x, h, k3), s), env);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return f.put(x, s);
}
}  // namespace detail

/// One classical Runge-Kutta step of the framed field from s.
inline NumStore rk4_step(const Ode& ode, const NumStore& s, double h, const NumEnv& env = {}) {
  return detail::rk4(detail::Field(ode, s.dataspace()), s, h, env);
}

/// Guarded orbit of an evolution command from s, one point per step while
/// the guard holds (down-closed: integration stops at the first violation,
/// located by bisection). Durations outside the admissible set are skipped.
inline std::vector<TracePoint> orbit(const Program& p, const NumStore& s, const SimConfig& cfg, double max_time,
                                     const NumEnv& env = {}) {
  cfg.check();
  std::vector<TracePoint> out;
  const bool is_ode = p.is(Program::Tag::Ode);
  const Expr& guard = is_ode ? p.ode().guard : p.evol().guard;
  const Expr dom = is_ode ? p.ode().dom : tt();
  const Duration& dur = is_ode ? p.ode().dur : p.evol().dur;
  Expr g = simplify(and_(guard, dom));
  Expr member = simplify(dur.member(tau()));
  auto admissible = [&](const NumStore& st, double t) {
    if (member.is_true() || dur.is_default()) return true;
    return holds(member, st, detail::tau_env(env, t), EvalOptions{cfg.guard_tolerance});
  };
  if (!detail::guard_holds(g, s, env, cfg.guard_tolerance)) return out;
  if (admissible(s, 0)) out.push_back({0, s});

  std::optional<detail::Field> field;
  if (is_ode) field.emplace(p.ode(), s.dataspace());
  // State at time t0 + h, reached from the state `from` at time t0.
  auto advance = [&](const NumStore& from, double t0, double h) {
    if (is_ode) return detail::rk4(*field, from, h, env);
    return subst_apply(p.evol().flow, s, detail::tau_env(env, t0 + h));
  };
  // A half step rather than the chord average: chords of curved orbits
  // leave equality guards.
  auto midpoint = [&](const NumStore& a, double t0, double h) { return advance(a, t0, h / 2); };
  NumStore cur = s;
  double t = 0;
  bool entered = out.size() == 1;
  const auto steps = static_cast<std::size_t>(std::floor(max_time / cfg.step + 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    double t_next = static_cast<double>(k) * cfg.step;
    double h = t_next - t;
    NumStore next = advance(cur, t, h);
    bool ok_end = detail::guard_holds(g, next, env, cfg.guard_tolerance);
    bool ok_mid = detail::guard_holds(g, midpoint(cur, t, h), env, cfg.guard_tolerance);
    if (ok_end && !ok_mid)
      fail(ErrorCode::StepSizeTooLarge, "guard excursion inside one step at t=" + std::to_string(t));
    if (!ok_end) {
      // Bisect for the last point before the guard fails.
      double lo = 0, hi = h;
      NumStore best = cur;
      for (int it = 0; it < 60 && hi - lo > cfg.guard_tolerance; ++it) {
        double m = (lo + hi) / 2;
        NumStore probe = advance(cur, t, m);
        if (detail::guard_holds(g, probe, env, cfg.guard_tolerance)) {
          lo = m;
          best = std::move(probe);
        } else {
          hi = m;
        }
      }
      if (lo > 0 && admissible(best, t + lo)) out.push_back({t + lo, std::move(best)});
      break;
    }
    cur = std::move(next);
    t = t_next;
    if (admissible(cur, t)) {
      out.push_back({t, cur});
      entered = true;
    } else if (entered && dur.tag == Duration::Tag::Bound) {
      break;  // left the admissible window
    }
  }
  return out;
}

namespace detail {

class Simulator {
 public:
  Simulator(const SimConfig& cfg, const NumEnv& env) : cfg_(cfg), env_(env), rng_(cfg.rng_seed) {}

  std::vector<NumStore> run(const Program& p, std::vector<NumStore> in) {
    switch (p.tag()) {
      case Program::Tag::Skip: return in;
      case Program::Tag::Abort: return {};
      case Program::Tag::Assign: {
        std::vector<NumStore> out;
        for (const auto& s : in) out.push_back(subst_apply(p.subst(), s, env_));
        return out;
      }
      case Program::Tag::Test: {
        std::vector<NumStore> out;
        for (auto& s : in)
          if (holds(p.cond(), s, env_)) out.push_back(std::move(s));
        return out;
      }
      case Program::Tag::Seq: return cap(run(p.kid(1), cap(run(p.kid(0), std::move(in)))));
      case Program::Tag::Choice: {
        auto a = run(p.kid(0), in);
        auto b = run(p.kid(1), std::move(in));
        a.insert(a.end(), b.begin(), b.end());
        return cap(std::move(a));
      }
      case Program::Tag::If: {
        std::vector<NumStore> yes, no;
        for (auto& s : in) (holds(p.cond(), s, env_) ? yes : no).push_back(std::move(s));
        auto a = run(p.kid(0), std::move(yes));
        auto b = run(p.kid(1), std::move(no));
        a.insert(a.end(), b.begin(), b.end());
        return a;
      }
      case Program::Tag::Loop: {
        std::vector<NumStore> all = in, cur = std::move(in);
        for (std::size_t i = 0; i < cfg_.max_loop_iterations && !cur.empty(); ++i) {
          cur = cap(run(p.kid(0), std::move(cur)));
          all.insert(all.end(), cur.begin(), cur.end());
        }
        return cap(std::move(all));
      }
      case Program::Tag::Ode:
      case Program::Tag::Evol: {
        std::vector<NumStore> out;
        for (const auto& s : in) {
          auto pts = orbit(p, s, cfg_, cfg_.horizon, env_);
          for (auto& tp : thin(std::move(pts))) out.push_back(std::move(tp.store));
        }
        return cap(std::move(out));
      }
    }
    return {};
  }

  /// Evenly spaced subset of an orbit, always keeping its last point.
  std::vector<TracePoint> thin(std::vector<TracePoint> pts) const {
    std::size_t n = cfg_.samples_per_orbit;
    if (n == 0 || pts.size() <= n) return pts;
    std::vector<TracePoint> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(pts[(pts.size() - 1) * (i + 1) / n]);
    return out;
  }

  /// Seeded subsample (order preserving) of at most max_states stores.
  std::vector<NumStore> cap(std::vector<NumStore> xs) {
    if (xs.size() <= cfg_.max_states) return xs;
    std::vector<std::size_t> idx(xs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng_);
    idx.resize(cfg_.max_states);
    std::sort(idx.begin(), idx.end());
    std::vector<NumStore> out;
    for (auto i : idx) out.push_back(std::move(xs[i]));
    return out;
  }

  /// A single run: choices by coin flip, evolutions to their maximal extent.
  void trace(const Program& p, std::vector<TracePoint>& out, bool& halted) {
    if (halted) return;
    const TracePoint cur = out.back();
    switch (p.tag()) {
      case Program::Tag::Skip: return;
      case Program::Tag::Abort: halted = true; return;
      case Program::Tag::Assign: out.push_back({cur.time, subst_apply(p.subst(), cur.store, env_)}); return;
      case Program::Tag::Test:
        if (!holds(p.cond(), cur.store, env_)) halted = true;
        return;
      case Program::Tag::Seq:
        trace(p.kid(0), out, halted);
        trace(p.kid(1), out, halted);
        return;
      case Program::Tag::Choice: trace(p.kid(coin() ? 0 : 1), out, halted); return;
      case Program::Tag::If: trace(p.kid(holds(p.cond(), cur.store, env_) ? 0 : 1), out, halted); return;
      case Program::Tag::Loop:
        for (std::size_t i = 0; !halted && out.back().time < cfg_.horizon; ++i) {
          double before = out.back().time;
          trace(p.kid(0), out, halted);
          if (out.back().time <= before && i >= cfg_.max_loop_iterations) break;
        }
        return;
      case Program::Tag::Ode:
      case Program::Tag::Evol: {
        double remaining = cfg_.horizon - cur.time;
        if (remaining <= 0) return;
        auto pts = orbit(p, cur.store, cfg_, remaining, env_);
        if (pts.empty()) {
          halted = true;
          return;
        }
        for (std::size_t i = 0; i < pts.size(); ++i)
          if (pts[i].time > 0) out.push_back({cur.time + pts[i].time, std::move(pts[i].store)});
        return;
      }
    }
  }

 private:
  bool coin() { return std::bernoulli_distribution(0.5)(rng_); }

  const SimConfig& cfg_;
  const NumEnv& env_;
  std::mt19937_64 rng_;
};

}  // namespace detail

/// Sample of stores reachable by p from s.
inline std::vector<NumStore> simulate(const Program& p, const NumStore& s, const SimConfig& cfg,
                                      const NumEnv& env = {}) {
  cfg.check();
  detail::Simulator sim(cfg, env);
  return sim.run(p, {s});
}

/// One seeded execution of p as a time-stamped trace starting with s.
inline std::vector<TracePoint> simulate_trace(const Program& p, const NumStore& s, const SimConfig& cfg,
                                              const NumEnv& env = {}) {
  cfg.check();
  detail::Simulator sim(cfg, env);
  std::vector<TracePoint> out{{0, s}};
  bool halted = false;
  sim.trace(p, out, halted);
  return out;
}

/// Trace dump: one line per point, `time<TAB>name=value ...` in declaration
/// order.
inline std::string format_trace(const std::vector<TracePoint>& pts) {
  std::string out;
  for (const auto& tp : pts) {
    out += detail::scalar_str(tp.time);
    const auto& ds = tp.store.dataspace();
    for (std::size_t i = 0; i < ds.decls().size(); ++i)
      out += (i ? " " : "\t") + ds.decls()[i].name + "=" + tp.store.values()[i].str();
    out += "\n";
  }
  return out;
}

}  // namespace hsv
