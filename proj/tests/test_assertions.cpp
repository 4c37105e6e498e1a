#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sgs/assertions.hpp"
#include "sgs/finite.hpp"

using namespace sgs;
using FD = finite::Domain;
using P = Pred<FD>;
using Sel = Selection<FD>;

namespace {

FD small_domain() {
  finite::VarTable vars;
  vars.names = {"q"};
  vars.lo = {0};
  vars.hi = {3};
  return FD(vars);
}

P states(const FD&, std::initializer_list<int> qs) {
  FD::Value v;
  for (int q : qs) v.push_back({q});
  std::sort(v.begin(), v.end());
  return P::of(v);
}

std::vector<P> all_preds_over(const FD& dom, int n) {
  // every subset of {0..n-1} plus fail
  std::vector<P> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    FD::Value v;
    for (int q = 0; q < n; ++q)
      if (mask & (1 << q)) v.push_back({q});
    out.push_back(P::of(v));
  }
  out.push_back(P::fail());
  return out;
}

}  // namespace

TEST_CASE("pred_leq matches the precision order") {
  auto dom = small_domain();
  auto q1 = states(dom, {1});
  CHECK(pred_leq(dom, q1, P::fail()));              // fail is the top element
  CHECK(pred_leq(dom, states(dom, {}), q1));        // empty set below anything
  CHECK_FALSE(pred_leq(dom, P::fail(), q1));        // fail only below fail
  CHECK(pred_leq(dom, P::fail(), P::fail()));
}

TEST_CASE("pred_leq is a partial order") {
  auto dom = small_domain();
  auto preds = all_preds_over(dom, 4);
  for (const auto& r : preds) CHECK(pred_leq(dom, r, r));
  for (const auto& r : preds)
    for (const auto& s : preds) {
      if (pred_leq(dom, r, s) && pred_leq(dom, s, r)) CHECK(r == s);
      for (const auto& t : preds)
        if (pred_leq(dom, r, s) && pred_leq(dom, s, t)) CHECK(pred_leq(dom, r, t));
    }
}

TEST_CASE("pred_join formulas") {
  auto dom = small_domain();
  auto q1 = states(dom, {1});
  auto q2 = states(dom, {2});

  std::vector<P> with_fail{P::fail(), q1};
  CHECK(pred_join<FD>(dom, with_fail) == P::fail());

  std::vector<P> two{q1, q2};
  CHECK(pred_join<FD>(dom, two) == states(dom, {1, 2}));

  std::vector<P> one{q1};
  CHECK(pred_join<FD>(dom, one) == q1);

  std::vector<P> none;
  CHECK(pred_join<FD>(dom, none) == states(dom, {}));
}

TEST_CASE("pred_meet formulas") {
  auto dom = small_domain();
  std::vector<P> only_fail{P::fail()};
  CHECK(pred_meet<FD>(dom, only_fail) == P::fail());

  std::vector<P> fail_and_set{P::fail(), states(dom, {1, 2})};
  CHECK(pred_meet<FD>(dom, fail_and_set) == states(dom, {1, 2}));

  std::vector<P> two{states(dom, {1, 2}), states(dom, {2, 3})};
  CHECK(pred_meet<FD>(dom, two) == states(dom, {2}));
}

TEST_CASE("join and meet are least upper / greatest lower bounds") {
  // exhaustive over predicates on a 3-state universe
  finite::VarTable vars;
  vars.names = {"q"};
  vars.lo = {0};
  vars.hi = {2};
  FD dom(vars);
  auto preds = all_preds_over(dom, 3);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = i; j < preds.size(); ++j) {
      std::vector<P> rs{preds[i], preds[j]};
      auto join = pred_join<FD>(dom, rs);
      auto meet = pred_meet<FD>(dom, rs);
      CHECK(pred_leq(dom, preds[i], join));
      CHECK(pred_leq(dom, preds[j], join));
      CHECK(pred_leq(dom, meet, preds[i]));
      CHECK(pred_leq(dom, meet, preds[j]));
      for (const auto& u : preds) {
        if (pred_leq(dom, preds[i], u) && pred_leq(dom, preds[j], u))
          CHECK(pred_leq(dom, join, u));
        if (pred_leq(dom, u, preds[i]) && pred_leq(dom, u, preds[j]))
          CHECK(pred_leq(dom, u, meet));
      }
    }
  }
}

TEST_CASE("sel_leq spec cases") {
  auto dom = small_domain();
  auto q1 = states(dom, {1});

  Sel empty;
  Sel any = Sel::of(dom, {q1, P::fail()});
  CHECK(sel_leq(dom, any, empty));  // empty rhs: vacuous
  CHECK(sel_leq(dom, empty, empty));
  CHECK_FALSE(sel_leq(dom, empty, any));

  // the most versatile selection: the empty predicate justifies anything
  Sel bottom = Sel::single(states(dom, {}));
  CHECK(sel_leq(dom, bottom, Sel::of(dom, {q1, P::fail()})));

  // subset witness
  CHECK(sel_leq(dom, Sel::single(q1), Sel::single(states(dom, {1, 2}))));
}

TEST_CASE("sel_leq reflexive, transitive, union laws") {
  auto dom = small_domain();
  std::mt19937 rng(7);
  auto preds = all_preds_over(dom, 4);
  auto random_sel = [&] {
    std::vector<P> ps;
    int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) ps.push_back(preds[rng() % preds.size()]);
    return Sel::of(dom, ps);
  };
  for (int iter = 0; iter < 400; ++iter) {
    Sel r = random_sel(), s = random_sel(), t = random_sel();
    CHECK(sel_leq(dom, r, r));
    if (sel_leq(dom, r, s) && sel_leq(dom, s, t)) CHECK(sel_leq(dom, r, t));
    // adding alternatives preserves versatility
    if (sel_leq(dom, r, s)) CHECK(sel_leq(dom, Sel::unite(dom, r, t), s));
    // split of the rhs
    Sel st = Sel::unite(dom, s, t);
    CHECK(sel_leq(dom, r, st) == (sel_leq(dom, r, s) && sel_leq(dom, r, t)));
  }
}

TEST_CASE("selections keep canonical order and dedupe") {
  auto dom = small_domain();
  auto a = states(dom, {1});
  auto b = states(dom, {2});
  Sel s = Sel::of(dom, {b, a, b, P::fail(), a});
  CHECK(s.size() == 3);
  CHECK(s.preds().back().is_fail());  // fail sorts last
  CHECK(s == Sel::of(dom, {P::fail(), a, b}));
}

TEST_CASE("counters attribute pred_leq calls") {
  auto dom = small_domain();
  Counters c;
  std::uint64_t bucket = 0;
  Sel lhs = Sel::of(dom, {states(dom, {1}), states(dom, {2})});
  Sel rhs = Sel::of(dom, {states(dom, {1, 2}), P::fail()});
  sel_leq(dom, lhs, rhs, &c, &bucket);
  CHECK(bucket > 0);
  CHECK(c.sel_leq_calls == 1);
  CHECK(c.max_pred_leq_per_sel == bucket);
}
