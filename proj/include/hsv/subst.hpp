#pragma once

#include <hsv/eval.hpp>
#include <hsv/expr.hpp>

#include <functional>
#include <utility>

namespace hsv {

/// Ordered list of updates to primitive lenses; unmentioned lenses are left
/// unchanged. Right-hand sides are read in the pre-state.
class Subst {
 public:
  using Entry = std::pair<LensRef, Expr>;

  Subst() = default;
  Subst(std::initializer_list<Entry> es) {
    for (const auto& [l, e] : es) set(l, e);
  }

  /// Adds or overwrites the update of a primitive lens (sums are split).
  void set(const LensRef& l, const Expr& e) {
    if (!l.is_primitive()) {
      if (!e.is(Op::VecLit) || e.args().size() != l.parts.size())
        fail(ErrorCode::KindMismatch, "tuple update of " + l.str() + " needs a matching literal");
      for (std::size_t i = 0; i < l.parts.size(); ++i) set(l.parts[i], e.arg(i));
      return;
    }
    if (l.tag == LensRef::Tag::Var) {
      std::erase_if(entries_, [&](const Entry& en) { return en.first.name == l.name; });
      entries_.emplace_back(l, e);
      return;
    }
    if (!e.kind().is_real()) detail::kind_error("coordinate " + l.str() + " updated with " + e.kind().str());
    for (auto& en : entries_) {
      if (en.first == l) {
        en.second = e;
        return;
      }
      if (en.first.tag == LensRef::Tag::Var && en.first.name == l.name) {
        // Fold the coordinate into the existing whole-vector update.
        std::vector<Expr> parts;
        for (unsigned k = 1; k <= en.second.kind().dim; ++k)
          parts.push_back(k == l.index ? e : (en.second.is(Op::VecLit) ? en.second.arg(k - 1) : nth(en.second, k)));
        en.second = veclit(std::move(parts));
        return;
      }
    }
    entries_.emplace_back(l, e);
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  /// The lenses written by this substitution.
  Frame frame() const {
    Frame f;
    for (const auto& en : entries_) f.insert(en.first);
    return f;
  }

  /// Entry for exactly this lens, if any.
  const Expr* find(const LensRef& l) const {
    for (const auto& en : entries_)
      if (en.first == l) return &en.second;
    return nullptr;
  }

  friend bool operator==(const Subst& a, const Subst& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i)
      if (!(a.entries_[i].first == b.entries_[i].first) || !same(a.entries_[i].second, b.entries_[i].second))
        return false;
    return true;
  }

  std::string str() const {
    std::string out = "[";
    for (std::size_t i = 0; i < entries_.size(); ++i)
      out += (i ? ", " : "") + entries_[i].first.str() + " ~> " + to_string(entries_[i].second);
    return out + "]";
  }

 private:
  std::vector<Entry> entries_;
};

/// Checks each update against the dataspace (declared lens, matching kind).
inline void check_subst(const Subst& s, const Dataspace& ds) {
  for (const auto& [l, e] : s.entries()) {
    Kind k = lens_kind(l, ds);
    if (!(k == e.kind())) detail::kind_error(l.str() + " : " + k.str() + " updated with " + e.kind().str());
  }
}

/// Applies the substitution to a store: every right-hand side is evaluated in
/// s, then the puts happen in order.
template <class S>
BasicStore<S> subst_apply(const Subst& sigma, const BasicStore<S>& s, const BasicEnv<S>& env = {}) {
  std::vector<BasicValue<S>> vals;
  vals.reserve(sigma.size());
  for (const auto& [l, e] : sigma.entries()) vals.push_back(eval(e, s, env));
  BasicStore<S> out = s;
  for (std::size_t i = 0; i < vals.size(); ++i) out = lens_put(sigma.entries()[i].first, vals[i], out);
  return out;
}

/// The expression that sigma assigns to the primitive lens x (a read of x if
/// x is not updated). k is the kind of the value x views.
inline Expr subst_lookup(const Subst& sigma, const LensRef& x, Kind k = Kind::real()) {
  if (x.tag == LensRef::Tag::Coord) {
    for (const auto& [l, e] : sigma.entries()) {
      if (l == x) return e;
      if (l.tag == LensRef::Tag::Var && l.name == x.name) return e.is(Op::VecLit) ? e.arg(x.index - 1) : nth(e, x.index);
    }
    return var(x, Kind::real());
  }
  if (const Expr* e = sigma.find(x)) return *e;
  bool partial = false;
  for (const auto& [l, e] : sigma.entries()) partial = partial || l.name == x.name;
  if (!partial) return var(x, k);
  std::vector<Expr> parts;
  for (unsigned i = 1; i <= k.dim; ++i) parts.push_back(subst_lookup(sigma, LensRef::coord(x.name, i)));
  return veclit(std::move(parts));
}

/// True if no variable read in e overlaps the frame.
inline bool unrest(const Frame& a, const Expr& e) {
  if (e.is(Op::Var)) return !a.overlaps(e.lens());
  for (const auto& c : e.args())
    if (!unrest(a, c)) return false;
  return true;
}

namespace detail {

inline std::string fresh_name(const std::string& base, const std::vector<std::pair<std::string, Kind>>& avoid,
                              const Expr& body) {
  auto used = free_logicals(body);
  for (int i = 1;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    bool clash = false;
    for (const auto& [n, k] : avoid) clash = clash || n == cand;
    for (const auto& [n, k] : used) clash = clash || n == cand;
    if (!clash) return cand;
  }
}

/// Generic capture-avoiding replacement. leaf maps Var/Logical nodes to
/// replacements (or an invalid Expr to keep them); captured lists the logical
/// names free in any replacement.
using Leaf = std::function<Expr(const Expr&)>;

inline Expr replace(const Expr& e, const Leaf& leaf, const std::vector<std::pair<std::string, Kind>>& captured,
             const std::set<std::string>& shadowed) {
  if (e.is(Op::Var) || (e.is(Op::Logical) && !shadowed.count(e.name()))) {
    Expr r = leaf(e);
    return r.valid() ? r : e;
  }
  if (e.args().empty()) return e;
  if (e.is(Op::Exists) || e.is(Op::Forall)) {
    std::string name = e.name();
    Expr body = e.arg(0);
    bool clash = false;
    for (const auto& [n, k] : captured) clash = clash || n == name;
    if (clash) {
      std::string fresh = fresh_name(name, captured, body);
      Expr fv = logical(fresh, e.bound_kind());
      std::set<std::string> none;
      body = replace(body, [&](const Expr& x) { return x.is(Op::Logical) && x.name() == name ? fv : Expr(); }, {},
                     none);
      name = fresh;
    }
    std::set<std::string> sh = shadowed;
    sh.insert(name);
    Expr nb = replace(body, leaf, captured, sh);
    return e.is(Op::Exists) ? exists(name, nb, e.bound_kind()) : forall(name, nb, e.bound_kind());
  }
  std::vector<Expr> args;
  bool changed = false;
  for (const auto& a : e.args()) {
    args.push_back(replace(a, leaf, captured, shadowed));
    changed = changed || args.back().identity() != a.identity();
  }
  return changed ? rebuild(e, std::move(args)) : e;
}

}  // namespace detail

/// Symbolic substitution e[sigma]: every read of an updated lens is replaced
/// by its lookup.
inline Expr subst_apply_expr(const Expr& e, const Subst& sigma) {
  if (sigma.empty()) return e;
  std::vector<std::pair<std::string, Kind>> captured;
  for (const auto& [l, r] : sigma.entries())
    for (const auto& fl : free_logicals(r)) captured.push_back(fl);
  Frame written = sigma.frame();
  auto leaf = [&](const Expr& x) -> Expr {
    if (!x.is(Op::Var) || !written.overlaps(x.lens())) return Expr();
    return subst_lookup(sigma, x.lens(), x.kind());
  };
  return detail::replace(e, leaf, captured, {});
}

/// Replaces free occurrences of the logical variable name by r.
inline Expr subst_logical(const Expr& e, const std::string& name, const Expr& r) {
  auto captured = free_logicals(r);
  auto leaf = [&](const Expr& x) -> Expr { return x.is(Op::Logical) && x.name() == name ? r : Expr(); };
  return detail::replace(e, leaf, captured, {});
}

/// Replaces free occurrences of several logical variables at once.
inline Expr subst_logicals(const Expr& e, const std::map<std::string, Expr>& m) {
  if (m.empty()) return e;
  std::vector<std::pair<std::string, Kind>> captured;
  for (const auto& [n, r] : m)
    for (const auto& fl : free_logicals(r)) captured.push_back(fl);
  auto leaf = [&](const Expr& x) -> Expr {
    if (!x.is(Op::Logical)) return Expr();
    auto it = m.find(x.name());
    return it == m.end() ? Expr() : it->second;
  };
  return detail::replace(e, leaf, captured, {});
}

/// Replaces reads of variables by arbitrary expressions (keyed by lens).
inline Expr replace_reads(const Expr& e, const std::vector<std::pair<LensRef, Expr>>& m) {
  std::vector<std::pair<std::string, Kind>> captured;
  for (const auto& [l, r] : m)
    for (const auto& fl : free_logicals(r)) captured.push_back(fl);
  auto leaf = [&](const Expr& x) -> Expr {
    if (!x.is(Op::Var)) return Expr();
    for (const auto& [l, r] : m)
      if (l == x.lens()) return r;
    return Expr();
  };
  return detail::replace(e, leaf, captured, {});
}

}  // namespace hsv
