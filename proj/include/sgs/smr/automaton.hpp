#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sgs::smr {

// Hazard-pointer specification automaton, eight states with qf final. The
// automaton tracks one cell from the perspective of one thread; subsets of
// states form the guarantees. Transcription used here (bottom row = cell not
// retired, top row = cell retired; columns = protection progress none /
// invoked / returned / validated):
//
//   q0 --in:protect(same)--> q2 --re:protect--> q4        (not retired)
//   q1 --in:protect(same)--> q3 --re:protect--> q5        (retired)
//   retire:  q0->q1, q2->q3, q4->q6, q5->q6
//   free:    q1->q0, q3->q2, q5->q4; from q0,q2,q4,q6 free cannot occur
//   protect of another cell / unprotect: q2,q4 -> q0 and q3,q5,q6 -> q1
//
// Guarantee zones: L = A = {q0,q2,q4}, S = {q4,q6}, Einv = {q2..q6},
// Eisu = {q4,q5,q6}. A cell is dereference-safe when its state set stays
// within L|A|S, i.e. within {q0,q2,q4,q6}: exactly the states whose free
// transitions are forbidden.
enum AutomatonState : int { Q0, Q1, Q2, Q3, Q4, Q5, Q6, QF };

using StateMask = std::uint8_t;  // bit i = state qi; qf never appears in values

constexpr StateMask kMaskTop = 0x7F;   // all non-final states, no guarantee
constexpr StateMask kMaskLocal = 0x15;      // {q0,q2,q4}
constexpr StateMask kMaskActive = 0x15;     // {q0,q2,q4}
constexpr StateMask kMaskSafe = 0x50;       // {q4,q6}
constexpr StateMask kMaskEinv = 0x7C;       // {q2,q3,q4,q5,q6}
constexpr StateMask kMaskEisu = 0x70;       // {q4,q5,q6}
constexpr StateMask kMaskDerefSafe = 0x55;  // {q0,q2,q4,q6}

inline StateMask bit(int q) { return static_cast<StateMask>(1u << q); }

// Per-state successor sets for the events the commands raise.
struct EdgeMap {
  std::array<StateMask, 7> succ{};
  StateMask image(StateMask m) const {
    StateMask out = 0;
    for (int q = 0; q < 7; ++q)
      if (m & bit(q)) out |= succ[q];
    return out;
  }
};

// in:protect on the tracked cell itself.
inline const EdgeMap& protect_invoke_same() {
  static const EdgeMap e = [] {
    EdgeMap m;
    for (int q = 0; q < 7; ++q) m.succ[q] = bit(q);
    m.succ[Q0] = bit(Q2);
    m.succ[Q1] = bit(Q3);
    return m;
  }();
  return e;
}

// in:protect seen by a different variable: the cell may or may not alias the
// protected one, so both outcomes are kept.
inline const EdgeMap& protect_invoke_other() {
  static const EdgeMap e = [] {
    EdgeMap m;
    m.succ[Q0] = bit(Q0) | bit(Q2);
    m.succ[Q1] = bit(Q1) | bit(Q3);
    m.succ[Q2] = bit(Q0) | bit(Q2);
    m.succ[Q3] = bit(Q1) | bit(Q3);
    m.succ[Q4] = bit(Q0) | bit(Q4);
    m.succ[Q5] = bit(Q1) | bit(Q5);
    m.succ[Q6] = bit(Q1) | bit(Q6);
    return m;
  }();
  return e;
}

// re:protect completing the pending invocation on the tracked cell.
inline const EdgeMap& protect_return() {
  static const EdgeMap e = [] {
    EdgeMap m;
    for (int q = 0; q < 7; ++q) m.succ[q] = bit(q);
    m.succ[Q2] = bit(Q4);
    m.succ[Q3] = bit(Q5);
    return m;
  }();
  return e;
}

// in:unprotect, and in:protect of a definitely different cell.
inline const EdgeMap& protect_cancel() {
  static const EdgeMap e = [] {
    EdgeMap m;
    m.succ[Q0] = bit(Q0);
    m.succ[Q1] = bit(Q1);
    m.succ[Q2] = bit(Q0);
    m.succ[Q3] = bit(Q1);
    m.succ[Q4] = bit(Q0);
    m.succ[Q5] = bit(Q1);
    m.succ[Q6] = bit(Q1);
    return m;
  }();
  return e;
}

// Environment steps other threads may take between atomic sections: retire
// the cell, or free it where the specification allows a free.
inline const EdgeMap& interference_step() {
  static const EdgeMap e = [] {
    EdgeMap m;
    for (int q = 0; q < 7; ++q) m.succ[q] = bit(q);
    m.succ[Q0] |= bit(Q1);
    m.succ[Q2] |= bit(Q3);
    m.succ[Q4] |= bit(Q6);
    m.succ[Q5] |= bit(Q6);
    m.succ[Q1] |= bit(Q0);
    m.succ[Q3] |= bit(Q2);
    m.succ[Q5] |= bit(Q4);
    return m;
  }();
  return e;
}

// Saturation under environment steps; what a local pointer's knowledge decays
// to across an interference point.
inline StateMask interference_closure(StateMask m) {
  StateMask cur = m;
  for (;;) {
    StateMask next = cur | interference_step().image(cur);
    if (next == cur) return cur;
    cur = next;
  }
}

// The type lattice: conjunctions of guarantees, as state sets. Pointers carry
// one type; transfer results are rounded up to the weakest type covering the
// reachable states, exactly like the underlying type system.
inline const std::vector<StateMask>& type_masks() {
  static const std::vector<StateMask> types = [] {
    std::vector<StateMask> zones{kMaskTop, kMaskEinv, kMaskEisu, kMaskSafe,
                                 kMaskLocal};
    std::vector<StateMask> out{kMaskTop};
    for (std::size_t i = 0; i < out.size(); ++i)
      for (StateMask z : zones) {
        StateMask t = out[i] & z;
        if (t && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
      }
    std::sort(out.begin(), out.end());
    return out;
  }();
  return types;
}

// Weakest type covering a nonempty state set.
inline StateMask round_type(StateMask m) {
  if (m == 0) return 0;
  StateMask best = kMaskTop;
  for (StateMask t : type_masks())
    if ((m & ~t) == 0 && (t & ~best) == 0) best = t;
  return best;
}

// The value lattice for one variable: all unions of types (what the Cartesian
// abstraction of type-valued states can produce), plus the empty set.
inline const std::vector<StateMask>& value_masks() {
  static const std::vector<StateMask> values = [] {
    std::vector<StateMask> out{0};
    for (StateMask t : type_masks()) out.push_back(t);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (StateMask t : type_masks()) {
        StateMask u = out[i] | t;
        if (std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
      }
    std::sort(out.begin(), out.end());
    return out;
  }();
  return values;
}

// Per-type outcomes of the command events. A pointer carries one type; every
// event maps it to the weakest type covering the reachable automaton states,
// with the alias-unknown protect invocation yielding either of two types.
inline StateMask typed_protect_same(StateMask t) {
  return round_type(protect_invoke_same().image(t));
}
inline StateMask typed_protect_other(StateMask t) {
  return static_cast<StateMask>(round_type(protect_invoke_same().image(t)) |
                                round_type(protect_cancel().image(t)));
}
inline StateMask typed_return(StateMask t) {
  return round_type(protect_return().image(t));
}
inline StateMask typed_cancel(StateMask t) {
  return round_type(protect_cancel().image(t));
}
inline StateMask typed_interfere(StateMask t, bool shared) {
  return shared ? kMaskTop : round_type(interference_closure(t));
}

// Lifts a per-type outcome function to a value (a union of types): the union
// of the outcomes over every type the value admits.
template <class F>
StateMask typed_union(StateMask value, F&& per_type) {
  StateMask out = 0;
  for (StateMask t : type_masks())
    if ((t & ~value) == 0) out |= per_type(t);
  return out;
}

// Renders a mask as the minimal conjunction of guarantee names covering it
// exactly, falling back to an explicit state list.
std::string render_mask(StateMask m);

}  // namespace sgs::smr
