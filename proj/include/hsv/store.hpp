#pragma once

#include <hsv/error.hpp>
#include <hsv/value.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hsv {

enum class Role { Constant, Variable, Ghost };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::Constant: return "constant";
    case Role::Variable: return "variable";
    case Role::Ghost: return "ghost";
  }
  return "?";
}

struct Decl {
  std::string name;
  Kind kind;
  Role role = Role::Variable;
};

/// Declared state space: every store over a dataspace binds exactly these
/// names, in declaration order.
class Dataspace {
 public:
  Dataspace() = default;
  explicit Dataspace(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  void declare(const std::string& name, Kind kind, Role role = Role::Variable) {
    if (index_.count(name)) fail(ErrorCode::DuplicateName, "'" + name + "' declared twice");
    if (kind.is_vec() && kind.dim == 0) fail(ErrorCode::KindError, "vector '" + name + "' needs dimension >= 1");
    index_[name] = decls_.size();
    decls_.push_back({name, kind, role});
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorCode::UndeclaredVariable, "'" + name + "'");
    return it->second;
  }

  const Decl& decl(const std::string& name) const { return decls_[index_of(name)]; }
  const std::vector<Decl>& decls() const { return decls_; }
  std::size_t size() const { return decls_.size(); }

 private:
  std::string name_;
  std::vector<Decl> decls_;
  std::map<std::string, std::size_t> index_;
};

using DataspacePtr = std::shared_ptr<const Dataspace>;

/// Total map from the dataspace's names to values. Copy-on-update.
template <class S>
class BasicStore {
 public:
  using Val = BasicValue<S>;

  BasicStore() = default;
  explicit BasicStore(DataspacePtr ds) : ds_(std::move(ds)) {
    for (const auto& d : ds_->decls()) values_.push_back(Val::zero(d.kind));
  }

  const Dataspace& dataspace() const { return *ds_; }
  const DataspacePtr& dataspace_ptr() const { return ds_; }

  const Val& get(const std::string& name) const { return values_[ds_->index_of(name)]; }

  void set(const std::string& name, Val v) {
    std::size_t i = ds_->index_of(name);
    const Kind& k = ds_->decls()[i].kind;
    if (!v.has_kind(k))
      fail(ErrorCode::KindMismatch, "'" + name + "' : " + k.str() + " cannot hold " + v.str());
    values_[i] = std::move(v);
  }

  BasicStore with(const std::string& name, Val v) const {
    BasicStore s = *this;
    s.set(name, std::move(v));
    return s;
  }

  const std::vector<Val>& values() const { return values_; }

  friend bool operator==(const BasicStore& a, const BasicStore& b) { return a.values_ == b.values_; }

  /// "{x: 1, y: 2}" in declaration order.
  std::string str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (i) out += ", ";
      out += ds_->decls()[i].name + ": " + values_[i].str();
    }
    return out + "}";
  }

 private:
  DataspacePtr ds_;
  std::vector<Val> values_;
};

using Store = BasicStore<Rational>;
using NumStore = BasicStore<double>;

inline NumStore to_num(const Store& s) {
  NumStore out(s.dataspace_ptr());
  for (std::size_t i = 0; i < s.values().size(); ++i)
    out.set(s.dataspace().decls()[i].name, to_num(s.values()[i]));
  return out;
}

inline Store to_exact(const NumStore& s) {
  Store out(s.dataspace_ptr());
  for (std::size_t i = 0; i < s.values().size(); ++i)
    out.set(s.dataspace().decls()[i].name, to_exact(s.values()[i]));
  return out;
}

// ---------------------------------------------------------------------------
// Lenses
// ---------------------------------------------------------------------------

struct LensRef;
bool lens_indep(const LensRef& a, const LensRef& b);

/// Reified lens: a whole variable, one coordinate of a vector variable
/// (1-based), or a sum of pairwise independent lenses.
struct LensRef {
  enum class Tag { Var, Coord, Sum };
  Tag tag = Tag::Var;
  std::string name;
  unsigned index = 0;
  std::vector<LensRef> parts;

  static LensRef var(std::string n) { return {Tag::Var, std::move(n), 0, {}}; }
  static LensRef coord(std::string n, unsigned i) {
    if (i == 0) fail(ErrorCode::CoordOutOfRange, "coordinates are 1-based");
    return {Tag::Coord, std::move(n), i, {}};
  }
  static LensRef sum(std::vector<LensRef> ps) {
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j)
        if (!lens_indep(ps[i], ps[j]))
          fail(ErrorCode::NotIndependent, ps[i].str() + " and " + ps[j].str() + " overlap");
    return {Tag::Sum, "", 0, std::move(ps)};
  }

  bool is_primitive() const { return tag != Tag::Sum; }

  /// Primitive components (a primitive is its own single component).
  std::vector<LensRef> primitives() const {
    if (is_primitive()) return {*this};
    std::vector<LensRef> out;
    for (const auto& p : parts) {
      auto sub = p.primitives();
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }

  std::string str() const {
    switch (tag) {
      case Tag::Var: return name;
      case Tag::Coord: return name + "[" + std::to_string(index) + "]";
      case Tag::Sum: {
        std::string out = "(";
        for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " + " : "") + parts[i].str();
        return out + ")";
      }
    }
    return "?";
  }

  friend bool operator==(const LensRef&, const LensRef&) = default;
  friend std::strong_ordering operator<=>(const LensRef& a, const LensRef& b) {
    if (auto c = a.name <=> b.name; c != 0) return c;
    if (auto c = static_cast<int>(a.tag) <=> static_cast<int>(b.tag); c != 0) return c;
    if (auto c = a.index <=> b.index; c != 0) return c;
    return std::lexicographical_compare_three_way(a.parts.begin(), a.parts.end(), b.parts.begin(),
                                                  b.parts.end());
  }
};

namespace detail {
inline bool prim_indep(const LensRef& a, const LensRef& b) {
  if (a.name != b.name) return true;
  return a.tag == LensRef::Tag::Coord && b.tag == LensRef::Tag::Coord && a.index != b.index;
}
inline bool prim_le(const LensRef& a, const LensRef& b) {
  if (a.name != b.name) return false;
  if (b.tag == LensRef::Tag::Var) return true;
  return a.tag == LensRef::Tag::Coord && a.index == b.index;
}
}  // namespace detail

/// Syntactic independence: puts commute on every store.
inline bool lens_indep(const LensRef& a, const LensRef& b) {
  for (const auto& p : a.primitives())
    for (const auto& q : b.primitives())
      if (!detail::prim_indep(p, q)) return false;
  return true;
}

/// Part-of preorder: every primitive of a is covered by a primitive of b.
inline bool lens_le(const LensRef& a, const LensRef& b) {
  auto bs = b.primitives();
  for (const auto& p : a.primitives()) {
    bool covered = std::any_of(bs.begin(), bs.end(), [&](const LensRef& q) { return detail::prim_le(p, q); });
    if (!covered) return false;
  }
  return true;
}

/// Canonical set of primitive lenses; Var(x) absorbs every Coord(x, _).
class Frame {
 public:
  Frame() = default;
  Frame(std::initializer_list<LensRef> ls) {
    for (const auto& l : ls) insert(l);
  }
  explicit Frame(const std::vector<LensRef>& ls) {
    for (const auto& l : ls) insert(l);
  }

  void insert(const LensRef& l) {
    for (const auto& p : l.primitives()) insert_primitive(p);
  }

  Frame unite(const Frame& other) const {
    Frame f = *this;
    for (const auto& p : other.items_) f.insert_primitive(p);
    return f;
  }

  const std::vector<LensRef>& items() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

  /// l is part of this frame.
  bool covers(const LensRef& l) const { return lens_le(l, as_lens()); }
  /// l shares some part with the frame.
  bool overlaps(const LensRef& l) const {
    for (const auto& p : l.primitives())
      for (const auto& q : items_)
        if (!detail::prim_indep(p, q)) return true;
    return false;
  }
  bool disjoint(const Frame& other) const {
    for (const auto& p : other.items_)
      if (overlaps(p)) return false;
    return true;
  }

  /// The frame as a single lens (a sum of its components).
  LensRef as_lens() const {
    if (items_.size() == 1) return items_.front();
    LensRef s;
    s.tag = LensRef::Tag::Sum;
    s.parts = items_;
    return s;
  }

  std::string str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < items_.size(); ++i) out += (i ? ", " : "") + items_[i].str();
    return out + "}";
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  void insert_primitive(const LensRef& p) {
    for (const auto& q : items_)
      if (detail::prim_le(p, q)) return;
    if (p.tag == LensRef::Tag::Var)
      std::erase_if(items_, [&](const LensRef& q) { return q.name == p.name; });
    items_.insert(std::upper_bound(items_.begin(), items_.end(), p), p);
  }

  std::vector<LensRef> items_;
};

/// Checks that l refers to declared variables with in-range coordinates.
inline void check_lens(const LensRef& l, const Dataspace& ds) {
  for (const auto& p : l.primitives()) {
    const Decl& d = ds.decl(p.name);
    if (p.tag == LensRef::Tag::Coord && (!d.kind.is_vec() || p.index > d.kind.dim))
      fail(ErrorCode::CoordOutOfRange, p.str() + " on " + d.name + " : " + d.kind.str());
  }
}

/// Kind of the value viewed by a primitive lens.
inline Kind lens_kind(const LensRef& l, const Dataspace& ds) {
  check_lens(l, ds);
  if (l.tag == LensRef::Tag::Coord) return Kind::real();
  if (l.tag == LensRef::Tag::Var) return ds.decl(l.name).kind;
  fail(ErrorCode::KindMismatch, "sum lens " + l.str() + " has a tuple kind");
}

template <class S>
BasicValue<S> lens_get(const LensRef& l, const BasicStore<S>& s) {
  check_lens(l, s.dataspace());
  switch (l.tag) {
    case LensRef::Tag::Var: return s.get(l.name);
    case LensRef::Tag::Coord: return BasicValue<S>(s.get(l.name).vec()[l.index - 1]);
    case LensRef::Tag::Sum: {
      typename BasicValue<S>::Tuple parts;
      for (const auto& p : l.parts) parts.push_back(lens_get(p, s));
      return BasicValue<S>::tuple(std::move(parts));
    }
  }
  return {};
}

template <class S>
BasicStore<S> lens_put(const LensRef& l, const BasicValue<S>& v, const BasicStore<S>& s) {
  check_lens(l, s.dataspace());
  switch (l.tag) {
    case LensRef::Tag::Var: return s.with(l.name, v);
    case LensRef::Tag::Coord: {
      if (!v.is_real()) fail(ErrorCode::KindMismatch, l.str() + " needs a real, got " + v.str());
      auto xs = s.get(l.name).vec();
      xs[l.index - 1] = v.real();
      return s.with(l.name, BasicValue<S>(std::move(xs)));
    }
    case LensRef::Tag::Sum: {
      const auto& parts = v.tuple();
      if (parts.size() != l.parts.size())
        fail(ErrorCode::KindMismatch, l.str() + " needs a " + std::to_string(l.parts.size()) + "-tuple");
      BasicStore<S> out = s;
      for (std::size_t i = 0; i < parts.size(); ++i) out = lens_put(l.parts[i], parts[i], out);
      return out;
    }
  }
  return s;
}

/// A lens into the local store selected by a frame: a path of 1-based
/// projections. The empty path is the identity.
struct LocalLens {
  std::vector<unsigned> path;

  bool is_identity() const { return path.empty(); }
  std::string str() const {
    if (path.empty()) return "1";
    std::string out;
    for (std::size_t i = path.size(); i-- > 0;) {
      if (!out.empty()) out += " ; ";
      out += "\xCE\xA0(" + std::to_string(path[i]) + ")";
    }
    return out;
  }
  friend bool operator==(const LocalLens&, const LocalLens&) = default;

  template <class S>
  BasicValue<S> get(const BasicValue<S>& local) const {
    BasicValue<S> cur = local;
    for (unsigned k : path) {
      BasicValue<S> next = cur.is_vec() ? BasicValue<S>(cur.vec().at(k - 1)) : cur.tuple().at(k - 1);
      cur = std::move(next);
    }
    return cur;
  }
};

/// Localises l to the store selected by frame A (requires l part of A).
inline LocalLens lens_quot(const LensRef& l, const Frame& frame) {
  if (!l.is_primitive()) fail(ErrorCode::UnsupportedConstruct, "quotient of a lens sum");
  if (!frame.covers(l)) fail(ErrorCode::NotPartOf, l.str() + " is not part of " + frame.str());
  const auto& items = frame.items();
  for (std::size_t j = 0; j < items.size(); ++j) {
    if (!detail::prim_le(l, items[j])) continue;
    LocalLens out;
    if (items.size() > 1) out.path.push_back(static_cast<unsigned>(j + 1));
    if (l.tag == LensRef::Tag::Coord && items[j].tag == LensRef::Tag::Var) out.path.push_back(l.index);
    return out;
  }
  fail(ErrorCode::NotPartOf, l.str());
}

}  // namespace hsv
