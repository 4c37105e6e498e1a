#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sgs {

// Counters owned by one engine instance. pred_leq is the unit of work the
// call-count theorems are stated over, so every comparison is attributed to
// either the forward (vc) or the backward (syn) phase.
struct Counters {
  std::uint64_t vc_pred_leq = 0;
  std::uint64_t syn_pred_leq = 0;
  std::uint64_t syn_checks = 0;  // scan positions consumed by syn
  std::uint64_t sel_leq_calls = 0;
  std::uint64_t max_pred_leq_per_sel = 0;

  void reset() { *this = Counters{}; }
};

// A predicate is either the distinguished failure element or a domain value
// (for the explicit domain: a canonical set of states). Failure is the top of
// the precision order: every predicate is more precise than fail.
template <class D>
class Pred {
 public:
  using Value = typename D::Value;

  static Pred fail() {
    Pred p;
    p.is_fail_ = true;
    return p;
  }
  static Pred of(Value v) {
    Pred p;
    p.value_ = std::move(v);
    return p;
  }
  static Pred bottom(const D& dom) { return of(dom.bottom()); }

  bool is_fail() const { return is_fail_; }
  const Value& value() const {
    assert(!is_fail_);
    return value_;
  }

  // Canonical order used for deterministic iteration; fail sorts last.
  static bool less(const D& dom, const Pred& a, const Pred& b) {
    if (a.is_fail_ || b.is_fail_) return !a.is_fail_ && b.is_fail_;
    return dom.value_less(a.value_, b.value_);
  }

  std::string render(const D& dom) const {
    return is_fail_ ? "fail" : dom.render(value_);
  }

 private:
  bool is_fail_ = false;
  Value value_{};
};

template <class D>
bool operator==(const Pred<D>& a, const Pred<D>& b) {
  if (a.is_fail() != b.is_fail()) return false;
  return a.is_fail() || a.value() == b.value();
}

// r is more precise than s: s = fail, or neither fails and r's value is below
// s's in the domain order (set inclusion for the explicit domain).
template <class D>
bool pred_leq(const D& dom, const Pred<D>& r, const Pred<D>& s,
              std::uint64_t* counter = nullptr) {
  if (counter) ++*counter;
  if (s.is_fail()) return true;
  if (r.is_fail()) return false;
  return dom.value_leq(r.value(), s.value());
}

// Least upper bound: fail if any element fails, else the domain join.
// The join of an empty collection is the bottom value.
template <class D>
Pred<D> pred_join(const D& dom, std::span<const Pred<D>> rs) {
  auto acc = dom.bottom();
  for (const auto& r : rs) {
    if (r.is_fail()) return Pred<D>::fail();
    acc = dom.value_join(acc, r.value());
  }
  return Pred<D>::of(std::move(acc));
}

template <class D>
Pred<D> pred_join2(const D& dom, const Pred<D>& a, const Pred<D>& b) {
  if (a.is_fail() || b.is_fail()) return Pred<D>::fail();
  return Pred<D>::of(dom.value_join(a.value(), b.value()));
}

// Greatest lower bound: fail only when every element fails, else the domain
// meet over the non-failing elements.
template <class D>
Pred<D> pred_meet(const D& dom, std::span<const Pred<D>> rs) {
  assert(!rs.empty());
  std::optional<typename D::Value> acc;
  for (const auto& r : rs) {
    if (r.is_fail()) continue;
    acc = acc ? dom.value_meet(*acc, r.value()) : r.value();
  }
  if (!acc) return Pred<D>::fail();
  return Pred<D>::of(std::move(*acc));
}

// A selection: a finite, duplicate-free, canonically ordered set of
// predicates. The empty selection, {fail} and {bottom} are all distinct.
template <class D>
class Selection {
 public:
  Selection() = default;

  static Selection of(const D& dom, std::vector<Pred<D>> preds) {
    Selection s;
    s.preds_ = std::move(preds);
    s.normalize(dom);
    return s;
  }
  static Selection single(const Pred<D>& p) {
    Selection s;
    s.preds_.push_back(p);
    return s;
  }

  const std::vector<Pred<D>>& preds() const { return preds_; }
  bool empty() const { return preds_.empty(); }
  std::size_t size() const { return preds_.size(); }

  bool contains(const Pred<D>& p) const {
    return std::find(preds_.begin(), preds_.end(), p) != preds_.end();
  }
  bool contains_fail() const {
    return !preds_.empty() && preds_.back().is_fail();
  }

  void insert(const D& dom, Pred<D> p) {
    auto at = std::lower_bound(
        preds_.begin(), preds_.end(), p,
        [&](const Pred<D>& a, const Pred<D>& b) { return Pred<D>::less(dom, a, b); });
    if (at != preds_.end() && *at == p) return;
    preds_.insert(at, std::move(p));
  }

  static Selection unite(const D& dom, const Selection& a, const Selection& b) {
    Selection out = a;
    for (const auto& p : b.preds_) out.insert(dom, p);
    return out;
  }

  static bool less(const D& dom, const Selection& a, const Selection& b) {
    auto ai = a.preds_.begin(), bi = b.preds_.begin();
    for (; ai != a.preds_.end() && bi != b.preds_.end(); ++ai, ++bi) {
      if (Pred<D>::less(dom, *ai, *bi)) return true;
      if (Pred<D>::less(dom, *bi, *ai)) return false;
    }
    return ai == a.preds_.end() && bi != b.preds_.end();
  }

  std::string render(const D& dom) const {
    std::string out = "{";
    for (std::size_t i = 0; i < preds_.size(); ++i) {
      if (i) out += ", ";
      out += preds_[i].render(dom);
    }
    out += "}";
    return out;
  }

 private:
  void normalize(const D& dom) {
    std::sort(preds_.begin(), preds_.end(),
              [&](const Pred<D>& a, const Pred<D>& b) { return Pred<D>::less(dom, a, b); });
    preds_.erase(std::unique(preds_.begin(), preds_.end()), preds_.end());
  }

  std::vector<Pred<D>> preds_;
};

template <class D>
bool operator==(const Selection<D>& a, const Selection<D>& b) {
  return a.preds() == b.preds();
}

// The versatility order: R is more versatile than S when every predicate of S
// has a more precise witness in R. Quadratic scan; every pred_leq is counted.
template <class D>
bool sel_leq(const D& dom, const Selection<D>& lhs, const Selection<D>& rhs,
             Counters* counters = nullptr, std::uint64_t* pred_counter = nullptr) {
  std::uint64_t local = 0;
  bool ok = true;
  for (const auto& s : rhs.preds()) {
    bool witness = false;
    for (const auto& r : lhs.preds()) {
      ++local;
      if (pred_leq(dom, r, s)) {
        witness = true;
        break;
      }
    }
    if (!witness) {
      ok = false;
      break;
    }
  }
  if (pred_counter) *pred_counter += local;
  if (counters) {
    ++counters->sel_leq_calls;
    counters->max_pred_leq_per_sel = std::max(counters->max_pred_leq_per_sel, local);
  }
  return ok;
}

// The rhs predicate with no witness in lhs, if any. Used for failure reports.
template <class D>
std::optional<Pred<D>> sel_leq_witness(const D& dom, const Selection<D>& lhs,
                                       const Selection<D>& rhs) {
  for (const auto& s : rhs.preds()) {
    bool witness = false;
    for (const auto& r : lhs.preds()) {
      if (pred_leq(dom, r, s)) {
        witness = true;
        break;
      }
    }
    if (!witness) return s;
  }
  return std::nullopt;
}

}  // namespace sgs
