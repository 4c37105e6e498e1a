#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgs/assertions.hpp"
#include "sgs/smr/automaton.hpp"

namespace sgs::smr {

// Declared pointer variables with their roles. Shared variables can be
// reassigned by other threads at interference points; always-active sentinels
// are the ones @inv active annotations may be generated for; protectable
// variables get protect productions.
struct PtrTable {
  std::vector<std::string> names;
  std::vector<bool> shared;
  std::vector<bool> protectable;
  std::vector<bool> always_active;

  int index_of(const std::string& n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return static_cast<int>(i);
    return -1;
  }
  std::size_t size() const { return names.size(); }
};

// SMR command vocabulary. `text` preserves the source line for program
// rendering. Interference points are explicit commands: the lowering places
// one after every statement outside atomic blocks and after every block.
struct Command {
  enum class Kind {
    Skip,           // data-only statements, null checks
    Copy,           // a := b
    ProtectInvoke,  // in:protect(a)
    ProtectReturn,  // re:protect(a)
    Unprotect,      // in:unprotect()
    InvActive,      // @inv active(a)
    AssumeEqual,    // assume(a == b), pure guarantee merge
    Access,         // dereference/compare use of a
    CasAssume,      // assume(cas succeeds): use of a and b, merge, then swap
    Interfere,      // environment steps of the other threads
  };
  Kind kind = Kind::Skip;
  int a = -1, b = -1;
  bool inserted = false;  // came from an enrichment nonterminal
  std::string text = "skip";

  friend bool operator==(const Command& x, const Command& y) {
    return x.kind == y.kind && x.a == y.a && x.b == y.b && x.text == y.text;
  }
};

// Cartesian assertion domain: fail, or one automaton state set per declared
// pointer. A value with any empty component is smashed to the canonical
// bottom (all components empty) so that equality and the Galois insertion
// are exact.
class Domain {
 public:
  using Value = std::vector<StateMask>;
  using Command = smr::Command;

  explicit Domain(PtrTable ptrs) : ptrs_(std::move(ptrs)) {}
  const PtrTable& ptrs() const { return ptrs_; }

  Value bottom() const { return Value(ptrs_.size(), 0); }
  Value top() const { return Value(ptrs_.size(), kMaskTop); }

  static Value smash(Value v) {
    for (auto m : v)
      if (m == 0) return Value(v.size(), 0);
    return v;
  }
  bool is_bottom(const Value& v) const {
    return !v.empty() && v[0] == 0;
  }

  bool value_leq(const Value& a, const Value& b) const {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] & ~b[i]) return false;
    return true;
  }
  // Canonical order is descending precision: scans meet the weakest
  // predicates first, which is what lets plain skips win during extraction.
  bool value_less(const Value& a, const Value& b) const { return b < a; }
  Value value_join(const Value& a, const Value& b) const {
    if (is_bottom(a)) return b;
    if (is_bottom(b)) return a;
    Value out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] | b[i];
    return out;
  }
  Value value_meet(const Value& a, const Value& b) const {
    Value out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] & b[i];
    return smash(std::move(out));
  }

  // Interference point: shared variables may be reassigned arbitrarily, local
  // pointers keep their cell but the environment may retire or free it.
  Value interfere(Value v) const {
    if (is_bottom(v)) return v;
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = typed_union(v[i], [&](StateMask t) {
        return typed_interfere(t, ptrs_.shared[i]);
      });
    return v;
  }

  std::optional<Value> transfer(const Command& c, const Value& v) const {
    if (is_bottom(v)) return v;  // no reachable states, nothing can fail
    Value out = v;
    switch (c.kind) {
      case Command::Kind::Skip:
        break;
      case Command::Kind::Copy:
        out[c.a] = v[c.b];
        break;
      case Command::Kind::ProtectInvoke:
        for (std::size_t i = 0; i < out.size(); ++i)
          out[i] = static_cast<int>(i) == c.a
                       ? typed_union(v[i], typed_protect_same)
                       : typed_union(v[i], typed_protect_other);
        break;
      case Command::Kind::ProtectReturn:
        out[c.a] = typed_union(v[c.a], typed_return);
        break;
      case Command::Kind::Unprotect:
        for (auto& m : out) m = typed_union(m, typed_cancel);
        break;
      case Command::Kind::InvActive:
        out[c.a] = v[c.a] & kMaskActive;
        break;
      case Command::Kind::AssumeEqual: {
        StateMask t = v[c.a] & v[c.b];
        out[c.a] = t;
        out[c.b] = t;
        break;
      }
      case Command::Kind::Access:
        if (v[c.a] & ~kMaskDerefSafe) return std::nullopt;
        break;
      case Command::Kind::CasAssume: {
        if ((v[c.a] & ~kMaskDerefSafe) || (v[c.b] & ~kMaskDerefSafe))
          return std::nullopt;
        StateMask t = v[c.a] & v[c.b];
        out[c.b] = t;
        // the swap itself: a now points to an unknown (untracked) cell
        out[c.a] = t ? kMaskTop : 0;
        break;
      }
      case Command::Kind::Interfere:
        return interfere(std::move(out));
    }
    return smash(std::move(out));
  }

  std::string render(const Value& v) const {
    if (is_bottom(v)) return "empty";
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      out += ptrs_.names[i] + ": " + render_mask(v[i]);
    }
    out += ")";
    return out;
  }

  std::string render_command(const Command& c) const { return c.text; }

  // Interference points are semantic steps between lines, not proof
  // obligations of their own.
  bool silent_command(const Command& c) const {
    return c.kind == Command::Kind::Interfere;
  }

  // Production copies need no per-occurrence rewriting: interference points
  // are their own commands in the sketch.
  void apply_site_tail(Command&, const Command&) const {}

 private:
  PtrTable ptrs_;
};

// --- Cartesian abstraction against the explicit enumeration domain ---------

// Concrete SMR state: one type per pointer variable, each a mask from the
// type lattice.
using ConcreteState = std::vector<StateMask>;

// Explicit-set domain over type-valued states, used as the brute-force oracle
// side of the Galois pair. Commands are shared with the abstract domain; the
// per-state semantics is set-valued where the events leave the cell identity
// or the environment's behavior open.
class ConcreteDomain {
 public:
  using Value = std::vector<ConcreteState>;  // canonical sorted set
  using Command = smr::Command;

  explicit ConcreteDomain(PtrTable ptrs) : ptrs_(std::move(ptrs)) {}
  const PtrTable& ptrs() const { return ptrs_; }

  Value bottom() const { return {}; }
  Value all_states() const {
    Value out;
    ConcreteState st(ptrs_.size(), 0);
    enumerate(0, st, out);
    return out;
  }

  bool value_leq(const Value& a, const Value& b) const {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  }
  bool value_less(const Value& a, const Value& b) const { return a < b; }
  Value value_join(const Value& a, const Value& b) const {
    Value out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }
  Value value_meet(const Value& a, const Value& b) const {
    Value out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
  }

  std::optional<Value> transfer(const Command& c, const Value& v) const {
    Value out;
    for (const auto& st : v) {
      // Per-variable sets of successor types; an empty assignment set marks a
      // filtered state, nullopt a failure.
      std::vector<std::vector<StateMask>> succ(ptrs_.size());
      for (std::size_t i = 0; i < ptrs_.size(); ++i) succ[i] = {st[i]};
      bool filtered = false;
      switch (c.kind) {
        case Command::Kind::Skip:
          break;
        case Command::Kind::Copy:
          succ[c.a] = {st[c.b]};
          break;
        case Command::Kind::ProtectInvoke:
          for (std::size_t i = 0; i < succ.size(); ++i) {
            if (static_cast<int>(i) == c.a)
              succ[i] = {typed_protect_same(st[i])};
            else
              succ[i] = {typed_protect_same(st[i]), typed_cancel(st[i])};
          }
          break;
        case Command::Kind::ProtectReturn:
          succ[c.a] = {typed_return(st[c.a])};
          break;
        case Command::Kind::Unprotect:
          for (std::size_t i = 0; i < succ.size(); ++i)
            succ[i] = {typed_cancel(st[i])};
          break;
        case Command::Kind::InvActive: {
          StateMask t = st[c.a] & kMaskActive;
          if (t)
            succ[c.a] = {t};
          else
            filtered = true;
          break;
        }
        case Command::Kind::AssumeEqual: {
          StateMask t = st[c.a] & st[c.b];
          if (t) {
            succ[c.a] = {t};
            succ[c.b] = {t};
          } else {
            filtered = true;
          }
          break;
        }
        case Command::Kind::Access:
          if (st[c.a] & ~kMaskDerefSafe) return std::nullopt;
          break;
        case Command::Kind::CasAssume: {
          if ((st[c.a] & ~kMaskDerefSafe) || (st[c.b] & ~kMaskDerefSafe))
            return std::nullopt;
          StateMask t = st[c.a] & st[c.b];
          if (t) {
            succ[c.b] = {t};
            succ[c.a] = {kMaskTop};  // the swapped-in cell
          } else {
            filtered = true;
          }
          break;
        }
        case Command::Kind::Interfere:
          for (std::size_t i = 0; i < succ.size(); ++i) {
            if (ptrs_.shared[i])
              succ[i] = type_masks();
            else
              succ[i] = {typed_interfere(st[i], false)};
          }
          break;
      }
      if (filtered) continue;
      expand(succ, out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::string render(const Value& v) const {
    std::string out = "{" + std::to_string(v.size()) + " states}";
    return out;
  }
  std::string render_command(const Command& c) const { return c.text; }
  bool silent_command(const Command& c) const {
    return c.kind == Command::Kind::Interfere;
  }
  void apply_site_tail(Command&, const Command&) const {}

 private:
  void enumerate(std::size_t i, ConcreteState& st, Value& out) const {
    if (i == ptrs_.size()) {
      out.push_back(st);
      return;
    }
    for (StateMask t : type_masks()) {
      st[i] = t;
      enumerate(i + 1, st, out);
    }
  }
  void expand(const std::vector<std::vector<StateMask>>& succ, Value& out) const {
    ConcreteState st(succ.size(), 0);
    std::function<void(std::size_t)> go = [&](std::size_t i) {
      if (i == succ.size()) {
        out.push_back(st);
        return;
      }
      for (StateMask t : succ[i]) {
        st[i] = t;
        go(i + 1);
      }
    };
    go(0);
  }

  PtrTable ptrs_;
};

// Cartesian abstraction: componentwise union of the type masks over the
// concrete states. Fail maps to fail one level up.
inline Domain::Value alpha_value(const Domain& dom, const ConcreteDomain::Value& r) {
  Domain::Value out = dom.bottom();
  for (const auto& st : r)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] |= st[i];
  return Domain::smash(std::move(out));
}

// Concretization: all type assignments componentwise admitted by the value.
inline ConcreteDomain::Value gamma_value(const Domain& dom, const Domain::Value& a) {
  ConcreteDomain::Value out;
  if (dom.is_bottom(a)) return out;
  ConcreteState st(a.size(), 0);
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == a.size()) {
      out.push_back(st);
      return;
    }
    for (StateMask t : type_masks())
      if ((t & ~a[i]) == 0) {
        st[i] = t;
        go(i + 1);
      }
  };
  go(0);
  return out;
}

template <class From, class To>
Pred<To> map_pred(const Pred<From>& p,
                  std::function<typename To::Value(const typename From::Value&)> f) {
  if (p.is_fail()) return Pred<To>::fail();
  return Pred<To>::of(f(p.value()));
}

inline Pred<Domain> alpha_pred(const Domain& dom, const Pred<ConcreteDomain>& r) {
  if (r.is_fail()) return Pred<Domain>::fail();
  return Pred<Domain>::of(alpha_value(dom, r.value()));
}

inline Pred<ConcreteDomain> gamma_pred(const Domain& dom, const Pred<Domain>& a) {
  if (a.is_fail()) return Pred<ConcreteDomain>::fail();
  return Pred<ConcreteDomain>::of(gamma_value(dom, a.value()));
}

// Componentwise more-precise relation on abstract predicates.
inline bool abs_leq(const Domain& dom, const Pred<Domain>& a, const Pred<Domain>& b) {
  return pred_leq(dom, a, b);
}

// Loop invariant candidate: the selection available at the loop head, taken
// verbatim; the annotation check validates it afterwards.
template <class S>
S auto_invariant(const S& entry) {
  return entry;
}

}  // namespace sgs::smr
