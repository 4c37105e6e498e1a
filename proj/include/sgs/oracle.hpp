#pragma once

#include "sgs/assertions.hpp"
#include "sgs/engine.hpp"
#include "sgs/sketch.hpp"

namespace sgs {

struct OracleConfig {
  int unroll_bound = 8;
  int derivation_depth = 4;
};

// Left-to-right fold of the command semantics over one execution.
template <class D>
Pred<D> eval_exec(const D& dom, const Execution<D>& e, Pred<D> r) {
  for (const auto& cmd : e) {
    if (r.is_fail()) return r;
    auto v = dom.transfer(cmd, r.value());
    r = v ? Pred<D>::of(std::move(*v)) : Pred<D>::fail();
  }
  return r;
}

// Bounded-unrolling Hoare validity: every execution of p from r ends within s.
// Exact for loop-free programs, refutation-sound in general.
template <class D>
bool brute_force_hoare(const D& dom, const Pred<D>& r, const SketchPtr<D>& p,
                       const Pred<D>& s, const OracleConfig& cfg) {
  for (const auto& e : executions<D>(p, cfg.unroll_bound))
    if (!pred_leq(dom, eval_exec(dom, e, r), s)) return false;
  return true;
}

// Exhaustive realizability at the configured bounds: every predicate of S is
// justified by some precondition predicate and some derivable program.
template <class D>
bool brute_force_realizability(const D& dom, const Grammar<D>& g,
                               const Selection<D>& R, const SketchPtr<D>& sk,
                               const Selection<D>& S, const OracleConfig& cfg) {
  auto programs = derivable_programs<D>(g, sk, cfg.derivation_depth);
  for (const auto& s : S.preds()) {
    bool justified = false;
    for (const auto& r : R.preds()) {
      for (const auto& p : programs) {
        if (brute_force_hoare(dom, r, p, s, cfg)) {
          justified = true;
          break;
        }
      }
      if (justified) break;
    }
    if (!justified) return false;
  }
  return true;
}

}  // namespace sgs
