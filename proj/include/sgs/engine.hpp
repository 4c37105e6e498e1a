#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgs/assertions.hpp"
#include "sgs/sketch.hpp"

namespace sgs {

// Proof outline: the sketch tree decorated with pre/post selections.
// Seq children share the intermediary assertion; Choice children carry equal
// pre- and postconditions (their roots are weakened to the joined selection);
// Star nodes keep the invariant selection unweakened next to the outer pre/post.
template <class D>
struct Outline {
  SketchKind kind;
  SketchPtr<D> sk;
  Selection<D> pre, post;
  Selection<D> invariant;                               // Star
  std::vector<std::shared_ptr<Outline<D>>> children;    // Seq/Choice: 2, Nont: explored
  int explored_j = 0;                                   // Nont
};

template <class D>
using OutlinePtr = std::shared_ptr<Outline<D>>;

// proofToProg: the sketch underlying a proof outline.
template <class D>
SketchPtr<D> extract_program(const OutlinePtr<D>& po) {
  return po->sk;
}

// Memo table filled while the strongest post descends into Choice branches
// and Star bodies with singleton preconditions. Keyed by (node id, predicate).
template <class D>
struct OutlineStore {
  struct PredLess {
    const D* dom;
    bool operator()(const std::pair<int, Pred<D>>& a,
                    const std::pair<int, Pred<D>>& b) const {
      if (a.first != b.first) return a.first < b.first;
      return Pred<D>::less(*dom, a.second, b.second);
    }
  };

  struct ChoiceEntry {
    OutlinePtr<D> branch[2];
    Selection<D> branch_post[2];  // raw strongest posts of each branch
    Selection<D> joined;          // pairwise joins: the per-singleton choice post
  };
  struct StarEntry {
    OutlinePtr<D> body;
    Selection<D> body_post;
  };

  explicit OutlineStore(const D* dom)
      : choice(PredLess{dom}), star(PredLess{dom}) {}

  std::map<std::pair<int, Pred<D>>, ChoiceEntry, PredLess> choice;
  std::map<std::pair<int, Pred<D>>, StarEntry, PredLess> star;
};

// One verification condition: the claim lhs is more versatile than rhs,
// tagged with the sketch node that generated it.
template <class D>
struct Vc {
  Selection<D> lhs, rhs;
  int node_id = -1;
  std::string note;
  bool valid = false;
};

template <class D>
struct VcReport {
  std::vector<Vc<D>> vcs;
  bool discharged = false;
  bool all_valid = false;
  std::size_t unique_count = 0;
  std::optional<Pred<D>> witness;  // rhs predicate with no witness, on failure
  int witness_node = -1;
  std::string witness_note;
  std::string annotation_error;          // nonterminal budget exhaustion
  std::map<int, int> nonterminal_j;      // site node id -> minimal sufficient j
  std::uint64_t filter_pred_leq = 0;     // loop-filter and min-j search comparisons
  // Selection comparisons performed outside the collected conditions: the
  // loop filter and the min-j coverage probes.
  std::vector<std::pair<Selection<D>, Selection<D>>> search_pairs;
};

struct EngineConfig {
  std::size_t oracle_budget = 64;  // max j for the annotation check
  int nt_depth = 8;                // rewrite-step depth for default transformers
  // Drop the fail alternative from computed selections (a rule-of-consequence
  // step: fail is justified by any predicate, so tracking it adds nothing
  // when the target postconditions exclude it).
  bool prune_fail = false;
};

// Forward analysis over one synthesis task: strongest post over selections,
// verification conditions, proof-outline construction. Single-threaded; one
// instance per task.
template <class D>
class Engine {
 public:
  Engine(const D* dom, const Grammar<D>* grammar, EngineConfig cfg = {})
      : dom_(dom), grammar_(grammar), cfg_(cfg), store_(dom), next_id_(1 << 20) {}

  const D& dom() const { return *dom_; }
  const OutlineStore<D>& store() const { return store_; }
  OutlineStore<D>& store() { return store_; }
  Counters& counters() { return counters_; }
  const EngineConfig& config() const { return cfg_; }

  // One command step. Fail is absorbing; the domain applies any trailing
  // interference the command carries.
  Pred<D> transfer(const typename D::Command& cmd, const Pred<D>& r) const {
    if (r.is_fail()) return Pred<D>::fail();
    auto v = dom_->transfer(cmd, r.value());
    if (!v) return Pred<D>::fail();
    return Pred<D>::of(std::move(*v));
  }

  // Strongest post per the selection-level definition; no verification
  // conditions, no memo-table writes.
  Selection<D> strongest_post(const Selection<D>& R, const SketchPtr<D>& s) {
    return sp(R, s, nullptr, nullptr);
  }

  // Verification conditions plus the proof outline for {R} sketch <S>.
  std::pair<VcReport<D>, OutlinePtr<D>> gen_vcs(const Selection<D>& R,
                                                const SketchPtr<D>& s,
                                                const Selection<D>& S) {
    VcReport<D> report;
    auto outline = vcgen(R, s, &S, &report);
    return {std::move(report), std::move(outline)};
  }

  // ca for loops: one VC group per invariant element, singleton pre and post.
  std::vector<Vc<D>> check_annotation_loop(const Selection<D>& I,
                                           const SketchPtr<D>& body) {
    VcReport<D> scratch;
    for (const auto& i : I.preds()) {
      Selection<D> si = Selection<D>::single(i);
      vcgen(si, body, &si, &scratch);
    }
    return std::move(scratch.vcs);
  }

  // ca for nonterminals against an explicit transformer, by name.
  std::vector<Vc<D>> check_annotation_nonterminal(const Selection<D>& R,
                                                  const std::string& name,
                                                  const SelectionTransformer<D>& gamma,
                                                  int* j_out = nullptr,
                                                  std::string* error = nullptr) {
    auto site = mk_nonterminal<D>(name, gamma);
    assign_ids<D>(site, &next_id_);
    VcReport<D> scratch;
    Selection<D> claimed = gamma(R);
    check_nonterminal(R, site, claimed, &scratch);
    if (j_out) {
      auto it = scratch.nonterminal_j.find(site->id);
      *j_out = it == scratch.nonterminal_j.end() ? -1 : it->second;
    }
    if (error) *error = scratch.annotation_error;
    return std::move(scratch.vcs);
  }

  // Checks every verification condition; structurally identical conditions
  // are checked once. Records the first unjustified rhs predicate.
  bool discharge(VcReport<D>& report) {
    struct SelPairLess {
      const D* dom;
      bool operator()(const std::pair<Selection<D>, Selection<D>>& a,
                      const std::pair<Selection<D>, Selection<D>>& b) const {
        if (Selection<D>::less(*dom, a.first, b.first)) return true;
        if (Selection<D>::less(*dom, b.first, a.first)) return false;
        return Selection<D>::less(*dom, a.second, b.second);
      }
    };
    std::map<std::pair<Selection<D>, Selection<D>>, bool, SelPairLess> seen(
        SelPairLess{dom_});
    bool all = report.annotation_error.empty();
    for (auto& vc : report.vcs) {
      auto key = std::make_pair(vc.lhs, vc.rhs);
      auto it = seen.find(key);
      if (it == seen.end()) {
        bool ok = sel_leq(*dom_, vc.lhs, vc.rhs, &counters_, &counters_.vc_pred_leq);
        it = seen.emplace(key, ok).first;
      }
      vc.valid = it->second;
      if (!vc.valid && all) {
        all = false;
        report.witness = sel_leq_witness(*dom_, vc.lhs, vc.rhs);
        report.witness_node = vc.node_id;
        report.witness_note = vc.note;
      }
    }
    report.discharged = true;
    report.all_valid = all;
    report.unique_count = seen.size();
    return all;
  }

  // Production instances for a nonterminal occurrence: deep copies with fresh
  // node ids and the occurrence's trailing command attribute applied.
  const std::vector<SketchPtr<D>>& instances(const SketchPtr<D>& site) {
    if (!site->instantiated) {
      OracleEnumerator<D> e(grammar_, site->name, cfg_.oracle_budget * 64);
      const auto& progs = e.first(cfg_.oracle_budget);
      for (std::size_t i = 0; i < progs.size(); ++i) {
        if (e.depth_of(i) > cfg_.nt_depth) break;
        auto copy = instantiate(progs[i], site);
        assign_ids<D>(copy, &next_id_);
        site->instances.push_back(std::move(copy));
      }
      site->instantiated = true;
    }
    return site->instances;
  }

  // The default transformer: union of strongest posts over the occurrence's
  // oracle programs up to the configured depth.
  Selection<D> default_gamma(const Selection<D>& R, const SketchPtr<D>& site) {
    Selection<D> out;
    for (const auto& prog : instances(site))
      out = Selection<D>::unite(*dom_, out, sp(R, prog, nullptr, nullptr));
    return out;
  }

 private:
  // Shared recursion for strongest post and vc generation. When `report` is
  // non-null, verification conditions are emitted and the memo tables filled;
  // `S` null means the entailment target is the computed post itself.
  Selection<D> sp(const Selection<D>& R, const SketchPtr<D>& s,
                  const Selection<D>* S, VcReport<D>* report) {
    auto outline = vcgen_impl(R, s, S, report, /*build=*/false);
    return outline.post;
  }

  struct Result {
    Selection<D> post;
    OutlinePtr<D> outline;
  };

  OutlinePtr<D> vcgen(const Selection<D>& R, const SketchPtr<D>& s,
                      const Selection<D>* S, VcReport<D>* report) {
    auto res = vcgen_impl(R, s, S, report, /*build=*/true);
    return res.outline;
  }

  Result vcgen_impl(const Selection<D>& R, const SketchPtr<D>& s,
                    const Selection<D>* S, VcReport<D>* report, bool build) {
    Result res;
    OutlinePtr<D> node;
    if (build) {
      node = std::make_shared<Outline<D>>();
      node->kind = s->kind;
      node->sk = s;
      node->pre = R;
    }
    switch (s->kind) {
      case SketchKind::Com: {
        std::vector<Pred<D>> posts;
        for (const auto& r : R.preds()) posts.push_back(transfer(s->cmd, r));
        res.post = prune(Selection<D>::of(*dom_, std::move(posts)));
        if (S || !dom_->silent_command(s->cmd))
          emit(res.post, S, s->id, "command post", report);
        break;
      }
      case SketchKind::Seq: {
        auto left = vcgen_impl(R, s->left, nullptr, report, build);
        auto right = vcgen_impl(left.post, s->right, S, report, build);
        res.post = right.post;
        if (build) {
          node->children = {left.outline, right.outline};
        }
        break;
      }
      case SketchKind::Choice: {
        Selection<D> post;
        OutlinePtr<D> gathered[2];
        for (const auto& r : R.preds()) {
          Selection<D> sr = Selection<D>::single(r);
          Result br[2];
          br[0] = vcgen_impl(sr, s->left, nullptr, report, build);
          br[1] = vcgen_impl(sr, s->right, nullptr, report, build);
          Selection<D> joined;
          for (const auto& p1 : br[0].post.preds())
            for (const auto& p2 : br[1].post.preds())
              joined.insert(*dom_, pred_join2(*dom_, p1, p2));
          joined = prune(joined);
          post = Selection<D>::unite(*dom_, post, joined);
          if (build && !r.is_fail()) {
            typename OutlineStore<D>::ChoiceEntry entry;
            for (int k = 0; k < 2; ++k) {
              entry.branch_post[k] = br[k].post;
              br[k].outline->post = joined;  // weakened to the shared choice post
              entry.branch[k] = br[k].outline;
            }
            entry.joined = joined;
            store_.choice.insert({{s->id, r}, entry});
            for (int k = 0; k < 2; ++k)
              gathered[k] = gathered[k] ? gather(*dom_, gathered[k], br[k].outline)
                                        : clone_outline(br[k].outline);
          }
        }
        res.post = post;
        emit(res.post, S, s->id, "choice post", report);
        if (build && gathered[0]) node->children = {gathered[0], gathered[1]};
        break;
      }
      case SketchKind::Star: {
        Selection<D> I = s->invariant_auto ? R : s->invariant;
        std::vector<Pred<D>> kept;
        for (const auto& i : I.preds()) {
          Selection<D> si = Selection<D>::single(i);
          if (report) report->search_pairs.emplace_back(R, si);
          if (sel_leq(*dom_, R, si, &counters_,
                      report ? &report->filter_pred_leq : nullptr))
            kept.push_back(i);
        }
        res.post = Selection<D>::of(*dom_, std::move(kept));
        if (res.post.empty() && S && !S->empty())
          emit(res.post, S, s->id, "no invariant element reachable", report);
        else
          emit(res.post, S, s->id, "loop post", report);
        if (build) node->invariant = I;
        OutlinePtr<D> gathered;
        for (const auto& i : I.preds()) {
          if (i.is_fail()) continue;
          Selection<D> si = Selection<D>::single(i);
          auto body = vcgen_impl(si, s->body, &si, report, build);
          if (build) {
            typename OutlineStore<D>::StarEntry entry;
            entry.body_post = body.post;
            entry.body = body.outline;
            store_.star.insert({{s->id, i}, entry});
            gathered = gathered ? gather(*dom_, gathered, body.outline)
                                : clone_outline(body.outline);
          }
        }
        if (build && gathered) node->children = {gathered};
        break;
      }
      case SketchKind::Nonterminal: {
        Selection<D> claimed =
            prune(s->transformer ? s->transformer(R) : default_gamma(R, s));
        res.post = claimed;
        emit(res.post, S, s->id, "nonterminal post", report);
        check_nonterminal(R, s, claimed, report, build ? node.get() : nullptr);
        break;
      }
    }
    if (build) {
      node->post = res.post;
      res.outline = std::move(node);
    }
    return res;
  }

  // min-j search justifying the transformer claim, then one VC group per
  // oracle program. Unsound annotations surface as a budget failure.
  void check_nonterminal(const Selection<D>& R, const SketchPtr<D>& site,
                         const Selection<D>& claimed, VcReport<D>* report,
                         Outline<D>* node = nullptr) {
    const auto& progs = instances(site);
    std::size_t j = 0;
    Selection<D> covered;
    bool justified = claimed.empty();
    std::vector<Selection<D>> posts;
    while (!justified && j < progs.size()) {
      posts.push_back(sp(R, progs[j], nullptr, nullptr));
      covered = Selection<D>::unite(*dom_, covered, posts.back());
      ++j;
      if (report) report->search_pairs.emplace_back(covered, claimed);
      justified = sel_leq(*dom_, covered, claimed, &counters_,
                          report ? &report->filter_pred_leq : nullptr);
    }
    if (report) report->nonterminal_j[site->id] = static_cast<int>(j);
    if (node) node->explored_j = static_cast<int>(j);
    if (!justified && report && report->annotation_error.empty()) {
      report->annotation_error =
          "transformer annotation not justified within budget (nonterminal " +
          site->name + ", node " + std::to_string(site->id) + ", j=" +
          std::to_string(j) + ")";
    }
    for (std::size_t k = 0; k < j; ++k) {
      auto child = vcgen_impl(R, progs[k], nullptr, report, node != nullptr);
      if (node) node->children.push_back(child.outline);
    }
  }

  Selection<D> prune(Selection<D> sel) const {
    if (!cfg_.prune_fail || !sel.contains_fail()) return sel;
    std::vector<Pred<D>> keep;
    for (const auto& p : sel.preds())
      if (!p.is_fail()) keep.push_back(p);
    return Selection<D>::of(*dom_, std::move(keep));
  }

  void emit(const Selection<D>& post, const Selection<D>* S, int node_id,
            const std::string& note, VcReport<D>* report) {
    if (!report) return;
    Vc<D> vc;
    vc.lhs = post;
    vc.rhs = S ? *S : post;
    vc.node_id = node_id;
    vc.note = note;
    report->vcs.push_back(std::move(vc));
  }

  static OutlinePtr<D> clone_outline(const OutlinePtr<D>& o) {
    auto n = std::make_shared<Outline<D>>(*o);
    n->children.clear();
    for (const auto& c : o->children) n->children.push_back(clone_outline(c));
    return n;
  }

 public:
  // Combines two proofs over the same sketch by pointwise selection union.
  // For nonterminals, children over the same production are merged and the
  // rest concatenated.
  static OutlinePtr<D> gather(const D& dom, const OutlinePtr<D>& a,
                              const OutlinePtr<D>& b) {
    assert(sketch_equal<D>(a->sk, b->sk));
    auto out = std::make_shared<Outline<D>>();
    out->kind = a->kind;
    out->sk = a->sk;
    out->pre = Selection<D>::unite(dom, a->pre, b->pre);
    out->post = Selection<D>::unite(dom, a->post, b->post);
    out->invariant = Selection<D>::unite(dom, a->invariant, b->invariant);
    out->explored_j = std::max(a->explored_j, b->explored_j);
    if (a->kind == SketchKind::Nonterminal) {
      std::vector<bool> used(b->children.size(), false);
      for (const auto& ca : a->children) {
        bool merged = false;
        for (std::size_t i = 0; i < b->children.size(); ++i) {
          if (!used[i] && sketch_equal<D>(ca->sk, b->children[i]->sk)) {
            out->children.push_back(gather(dom, ca, b->children[i]));
            used[i] = true;
            merged = true;
            break;
          }
        }
        if (!merged) out->children.push_back(clone_outline(ca));
      }
      for (std::size_t i = 0; i < b->children.size(); ++i)
        if (!used[i]) out->children.push_back(clone_outline(b->children[i]));
    } else {
      assert(a->children.size() == b->children.size());
      for (std::size_t i = 0; i < a->children.size(); ++i)
        out->children.push_back(gather(dom, a->children[i], b->children[i]));
    }
    return out;
  }

 private:
  const D* dom_;
  const Grammar<D>* grammar_;
  EngineConfig cfg_;
  Counters counters_;
  OutlineStore<D> store_;
  int next_id_;

  // Deep copy of a production for one occurrence; the domain may rewrite the
  // trailing commands (interference points depend on the occurrence).
  SketchPtr<D> instantiate(const SketchPtr<D>& prod, const SketchPtr<D>& site) {
    std::function<SketchPtr<D>(const SketchPtr<D>&, bool)> go =
        [&](const SketchPtr<D>& n, bool tail) -> SketchPtr<D> {
      switch (n->kind) {
        case SketchKind::Com: {
          auto cmd = n->cmd;
          if (tail) dom_->apply_site_tail(cmd, site->cmd);
          return mk_com<D>(std::move(cmd));
        }
        case SketchKind::Seq:
          return mk_seq<D>(go(n->left, false), go(n->right, tail));
        case SketchKind::Choice:
          return mk_choice<D>(go(n->left, tail), go(n->right, tail));
        case SketchKind::Star:
          return mk_star<D>(go(n->body, false), n->invariant, n->invariant_auto);
        case SketchKind::Nonterminal: {
          auto c = mk_nonterminal<D>(n->name, n->transformer);
          const_cast<SketchNode<D>*>(c.get())->cmd = site->cmd;
          return c;
        }
      }
      return nullptr;
    };
    return go(prod, true);
  }
};

// Free-function wrapper matching the specification surface.
template <class D>
OutlinePtr<D> gather(const D& dom, const OutlinePtr<D>& a, const OutlinePtr<D>& b) {
  return Engine<D>::gather(dom, a, b);
}

}  // namespace sgs
