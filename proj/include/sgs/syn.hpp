#pragma once

#include <memory>
#include <optional>
#include <string>

#include "sgs/assertions.hpp"
#include "sgs/engine.hpp"
#include "sgs/sketch.hpp"

namespace sgs {

// Result of the backward extraction: the chosen precondition predicate, the
// extracted program, and how many scan positions were consumed. A fail
// precondition with no program signals abort (possible only on unvalidated
// or hand-written outlines).
template <class D>
struct SynResult {
  Pred<D> pre = Pred<D>::fail();
  SketchPtr<D> program;
  bool ok = false;
  int abort_node = -1;

  static SynResult success(Pred<D> r, SketchPtr<D> prog) {
    SynResult res;
    res.pre = std::move(r);
    res.program = std::move(prog);
    res.ok = true;
    return res;
  }
  static SynResult abort(int node) {
    SynResult res;
    res.abort_node = node;
    return res;
  }
};

// Memoized sub-outline lookup for a Choice branch or Star body analyzed with
// singleton precondition {r}. For choices the postcondition is narrowed to
// {s}: the lookup aborts when s is not covered by the memoized joined post.
template <class D>
std::optional<typename OutlineStore<D>::ChoiceEntry> outl_choice(
    const OutlineStore<D>& store, int node, const Pred<D>& r, const Pred<D>& s) {
  auto it = store.choice.find({node, r});
  if (it == store.choice.end()) return std::nullopt;
  if (!it->second.joined.contains(s)) return std::nullopt;
  return it->second;
}

template <class D>
std::optional<typename OutlineStore<D>::StarEntry> outl_star(
    const OutlineStore<D>& store, int node, const Pred<D>& i) {
  auto it = store.star.find({node, i});
  if (it == store.star.end()) return std::nullopt;
  return it->second;
}

// The synthesis function: walks the proof outline backward from the target
// postcondition predicate, committing to one predicate per selection and one
// production per nonterminal. On outlines whose verification conditions hold
// it cannot abort (backtracking freedom) and consumes at most one scan
// position per outline element.
template <class D>
SynResult<D> syn(Engine<D>& eng, const OutlinePtr<D>& po,
                 const OutlineStore<D>& store, const Pred<D>& s) {
  const D& dom = eng.dom();
  Counters& ctr = eng.counters();

  if (po->pre.empty()) return SynResult<D>::abort(po->sk->id);

  switch (po->kind) {
    case SketchKind::Com: {
      // Exact image matches first: committing to the predicate that produces
      // s itself keeps the backward targets exact and the lazier earlier
      // alternatives reachable.
      for (const auto& r : po->pre.preds()) {
        if (r.is_fail()) continue;
        if (eng.transfer(po->sk->cmd, r) == s)
          return SynResult<D>::success(r, mk_com<D>(po->sk->cmd));
      }
      for (const auto& r : po->pre.preds()) {
        if (r.is_fail()) continue;
        ++ctr.syn_checks;
        Pred<D> t = eng.transfer(po->sk->cmd, r);
        if (pred_leq(dom, t, s, &ctr.syn_pred_leq))
          return SynResult<D>::success(r, mk_com<D>(po->sk->cmd));
      }
      return SynResult<D>::abort(po->sk->id);
    }

    case SketchKind::Seq: {
      auto right = syn(eng, po->children[1], store, s);
      if (!right.ok) return right;
      auto left = syn(eng, po->children[0], store, right.pre);
      if (!left.ok) return left;
      return SynResult<D>::success(left.pre, mk_seq<D>(left.program, right.program));
    }

    case SketchKind::Nonterminal: {
      // Alternatives in production order; exact postcondition membership
      // first, then weaker witnesses.
      for (const auto& child : po->children) {
        if (!child->post.contains(s)) continue;
        auto res = syn(eng, child, store, s);
        if (res.ok) return res;
      }
      for (const auto& child : po->children) {
        if (child->post.contains(s)) continue;
        for (const auto& p : child->post.preds()) {
          ++ctr.syn_checks;
          if (!pred_leq(dom, p, s, &ctr.syn_pred_leq)) continue;
          auto res = syn(eng, child, store, p);
          if (res.ok) return res;
          break;
        }
      }
      return SynResult<D>::abort(po->sk->id);
    }

    case SketchKind::Choice: {
      // Find a precondition predicate r and per-branch targets whose join is
      // the requested predicate; both branch outlines come from the store.
      // The target itself is tried first for both branches so that weaker
      // targets (and the productions they allow, e.g. plain skips) win.
      auto attempt = [&](const typename OutlineStore<D>::ChoiceEntry& entry,
                         const Pred<D>& r, const Pred<D>& s1,
                         const Pred<D>& s2) -> SynResult<D> {
        auto r1 = syn(eng, entry.branch[0], store, s1);
        if (!r1.ok) return r1;
        auto r2 = syn(eng, entry.branch[1], store, s2);
        if (!r2.ok) return r2;
        return SynResult<D>::success(r, mk_choice<D>(r1.program, r2.program));
      };
      for (int pass = 0; pass < 3; ++pass) {
        for (const auto& r : po->pre.preds()) {
          if (r.is_fail()) continue;
          auto it = store.choice.find({po->sk->id, r});
          if (it == store.choice.end()) continue;
          const auto& entry = it->second;
          if (pass == 0) {
            if (!entry.branch_post[0].contains(s) || !entry.branch_post[1].contains(s))
              continue;
            auto res = attempt(entry, r, s, s);
            if (res.ok) return res;
            continue;
          }
          for (const auto& s1 : entry.branch_post[0].preds()) {
            for (const auto& s2 : entry.branch_post[1].preds()) {
              Pred<D> j = pred_join2(dom, s1, s2);
              bool hit;
              if (pass == 1) {
                hit = j == s;
              } else {
                ++ctr.syn_checks;
                hit = pred_leq(dom, j, s, &ctr.syn_pred_leq);
              }
              if (!hit) continue;
              auto res = attempt(entry, r, s1, s2);
              if (res.ok) return res;
            }
          }
        }
      }
      return SynResult<D>::abort(po->sk->id);
    }

    case SketchKind::Star: {
      for (const auto& i : po->invariant.preds()) {
        if (i.is_fail()) continue;
        ++ctr.syn_checks;
        if (!pred_leq(dom, i, s, &ctr.syn_pred_leq)) continue;
        auto entry = outl_star(store, po->sk->id, i);
        if (!entry) continue;
        auto body = syn(eng, entry->body, store, i);
        if (!body.ok) continue;
        // Return a precondition from the outer selection that entails the
        // invariant element.
        for (const auto& r : po->pre.preds()) {
          if (r.is_fail()) continue;
          ++ctr.syn_checks;
          if (pred_leq(dom, r, i, &ctr.syn_pred_leq))
            return SynResult<D>::success(
                r, mk_star<D>(body.program, po->invariant, false));
        }
      }
      return SynResult<D>::abort(po->sk->id);
    }
  }
  return SynResult<D>::abort(po->sk->id);
}

// Entry point for a target that may sit above the computed strongest post:
// resolve it to the most precise available witness in the outline post first.
template <class D>
SynResult<D> syn_for_target(Engine<D>& eng, const OutlinePtr<D>& po,
                            const OutlineStore<D>& store, const Pred<D>& target) {
  const D& dom = eng.dom();
  if (po->post.contains(target)) return syn(eng, po, store, target);
  for (const auto& p : po->post.preds()) {
    ++eng.counters().syn_checks;
    if (pred_leq(dom, p, target, &eng.counters().syn_pred_leq))
      return syn(eng, po, store, p);
  }
  return SynResult<D>::abort(po->sk ? po->sk->id : -1);
}

// Outline size per the call-count accounting: one scan position per outline
// element (node plus each predicate of its precondition, plus the invariant
// elements and the outer-precondition re-scan for loops).
template <class D>
std::uint64_t outline_size(const OutlinePtr<D>& po) {
  std::uint64_t n = 1 + po->pre.size();
  if (po->kind == SketchKind::Star) n += po->invariant.size() + po->pre.size();
  for (const auto& c : po->children) n += outline_size<D>(c);
  return n;
}

}  // namespace sgs
