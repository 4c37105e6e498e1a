#pragma once

#include <cassert>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "sgs/assertions.hpp"

namespace sgs {

// Sketch AST. Nodes are immutable after construction; every node carries a
// unique id assigned in preorder so verification conditions and outline memo
// tables can name the exact position they came from.
template <class D>
struct SketchNode;

template <class D>
using SketchPtr = std::shared_ptr<const SketchNode<D>>;

enum class SketchKind { Com, Seq, Choice, Star, Nonterminal };

// How a nonterminal is summarized during the forward analysis: either an
// explicit selection transformer or the oracle default (union of strongest
// posts over enumerated productions up to a configured depth).
template <class D>
using SelectionTransformer = std::function<Selection<D>(const Selection<D>&)>;

template <class D>
struct SketchNode {
  SketchKind kind;
  int id = -1;

  // Com
  typename D::Command cmd{};

  // Seq / Choice
  SketchPtr<D> left, right;

  // Star
  SketchPtr<D> body;
  Selection<D> invariant;
  bool invariant_auto = false;  // invariant filled from the loop-entry selection

  // Nonterminal
  std::string name;
  SelectionTransformer<D> transformer;  // empty: oracle default
  // Per-occurrence instantiations of the productions (fresh node ids and
  // context-dependent command attributes such as interference points).
  mutable std::vector<SketchPtr<D>> instances;
  mutable bool instantiated = false;
};

template <class D>
SketchPtr<D> mk_com(typename D::Command c) {
  auto n = std::make_shared<SketchNode<D>>();
  n->kind = SketchKind::Com;
  n->cmd = std::move(c);
  return n;
}

template <class D>
SketchPtr<D> mk_seq(SketchPtr<D> a, SketchPtr<D> b) {
  auto n = std::make_shared<SketchNode<D>>();
  n->kind = SketchKind::Seq;
  n->left = std::move(a);
  n->right = std::move(b);
  return n;
}

// Right-nested sequence of one or more statements.
template <class D>
SketchPtr<D> mk_seq_list(std::vector<SketchPtr<D>> parts) {
  assert(!parts.empty());
  SketchPtr<D> out = parts.back();
  for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it)
    out = mk_seq<D>(*it, out);
  return out;
}

template <class D>
SketchPtr<D> mk_choice(SketchPtr<D> a, SketchPtr<D> b) {
  auto n = std::make_shared<SketchNode<D>>();
  n->kind = SketchKind::Choice;
  n->left = std::move(a);
  n->right = std::move(b);
  return n;
}

template <class D>
SketchPtr<D> mk_star(SketchPtr<D> body, Selection<D> invariant, bool auto_inv = false) {
  auto n = std::make_shared<SketchNode<D>>();
  n->kind = SketchKind::Star;
  n->body = std::move(body);
  n->invariant = std::move(invariant);
  n->invariant_auto = auto_inv;
  return n;
}

template <class D>
SketchPtr<D> mk_nonterminal(std::string name, SelectionTransformer<D> gamma = {}) {
  auto n = std::make_shared<SketchNode<D>>();
  n->kind = SketchKind::Nonterminal;
  n->name = std::move(name);
  n->transformer = std::move(gamma);
  return n;
}

// Assigns preorder ids starting at *next. Nodes are shared immutable values,
// so ids are written through a const cast during the one-time freeze step.
template <class D>
void assign_ids(const SketchPtr<D>& s, int* next) {
  auto* n = const_cast<SketchNode<D>*>(s.get());
  n->id = (*next)++;
  switch (s->kind) {
    case SketchKind::Com:
      break;
    case SketchKind::Seq:
    case SketchKind::Choice:
      assign_ids<D>(s->left, next);
      assign_ids<D>(s->right, next);
      break;
    case SketchKind::Star:
      assign_ids<D>(s->body, next);
      break;
    case SketchKind::Nonterminal:
      break;
  }
}

template <class D>
bool is_program(const SketchPtr<D>& s) {
  switch (s->kind) {
    case SketchKind::Com:
      return true;
    case SketchKind::Seq:
    case SketchKind::Choice:
      return is_program<D>(s->left) && is_program<D>(s->right);
    case SketchKind::Star:
      return is_program<D>(s->body);
    case SketchKind::Nonterminal:
      return false;
  }
  return false;
}

template <class D>
int count_nonterminals(const SketchPtr<D>& s) {
  switch (s->kind) {
    case SketchKind::Com:
      return 0;
    case SketchKind::Seq:
    case SketchKind::Choice:
      return count_nonterminals<D>(s->left) + count_nonterminals<D>(s->right);
    case SketchKind::Star:
      return count_nonterminals<D>(s->body);
    case SketchKind::Nonterminal:
      return 1;
  }
  return 0;
}

// Structural equality modulo node ids; commands compare by D::Command::operator==.
template <class D>
bool sketch_equal(const SketchPtr<D>& a, const SketchPtr<D>& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case SketchKind::Com:
      return a->cmd == b->cmd;
    case SketchKind::Seq:
    case SketchKind::Choice:
      return sketch_equal<D>(a->left, b->left) && sketch_equal<D>(a->right, b->right);
    case SketchKind::Star:
      return sketch_equal<D>(a->body, b->body);
    case SketchKind::Nonterminal:
      return a->name == b->name;
  }
  return false;
}

// Grammar: nonterminal name -> nonempty ordered production list.
template <class D>
class Grammar {
 public:
  void add(const std::string& name, SketchPtr<D> production) {
    if (!table_.count(name)) order_.push_back(name);
    table_[name].push_back(std::move(production));
  }

  bool has(const std::string& name) const { return table_.count(name) > 0; }
  const std::vector<SketchPtr<D>>& productions(const std::string& name) const {
    auto it = table_.find(name);
    assert(it != table_.end());
    return it->second;
  }
  const std::vector<std::string>& names() const { return order_; }

  // Cycle detection over the nonterminal reference graph; diagnostics only,
  // recursion is a supported feature.
  std::vector<std::string> recursive_nonterminals() const {
    std::vector<std::string> out;
    for (const auto& name : order_) {
      std::set<std::string> seen;
      if (reaches(name, name, seen)) out.push_back(name);
    }
    return out;
  }

 private:
  bool reaches(const std::string& from, const std::string& target,
               std::set<std::string>& seen) const {
    auto it = table_.find(from);
    if (it == table_.end()) return false;
    for (const auto& prod : it->second)
      if (sketch_reaches(prod, target, seen)) return true;
    return false;
  }
  bool sketch_reaches(const SketchPtr<D>& s, const std::string& target,
                      std::set<std::string>& seen) const {
    switch (s->kind) {
      case SketchKind::Com:
        return false;
      case SketchKind::Seq:
      case SketchKind::Choice:
        return sketch_reaches(s->left, target, seen) ||
               sketch_reaches(s->right, target, seen);
      case SketchKind::Star:
        return sketch_reaches(s->body, target, seen);
      case SketchKind::Nonterminal: {
        if (s->name == target) return true;
        if (!seen.insert(s->name).second) return false;
        return reaches(s->name, target, seen);
      }
    }
    return false;
  }

  std::map<std::string, std::vector<SketchPtr<D>>> table_;
  std::vector<std::string> order_;
};

// An execution: a straight-line command sequence. The empty execution is skip.
template <class D>
using Execution = std::vector<typename D::Command>;

// All executions of a program: choices resolved both ways, stars unrolled
// 0..bound times.
template <class D>
std::vector<Execution<D>> executions(const SketchPtr<D>& p, int unroll_bound) {
  assert(is_program<D>(p));
  switch (p->kind) {
    case SketchKind::Com:
      return {Execution<D>{p->cmd}};
    case SketchKind::Seq: {
      auto ls = executions<D>(p->left, unroll_bound);
      auto rs = executions<D>(p->right, unroll_bound);
      std::vector<Execution<D>> out;
      for (const auto& l : ls)
        for (const auto& r : rs) {
          Execution<D> e = l;
          e.insert(e.end(), r.begin(), r.end());
          out.push_back(std::move(e));
        }
      return out;
    }
    case SketchKind::Choice: {
      auto out = executions<D>(p->left, unroll_bound);
      auto rs = executions<D>(p->right, unroll_bound);
      out.insert(out.end(), rs.begin(), rs.end());
      return out;
    }
    case SketchKind::Star: {
      auto bodies = executions<D>(p->body, unroll_bound);
      std::vector<Execution<D>> layer{Execution<D>{}};
      std::vector<Execution<D>> out{Execution<D>{}};
      for (int k = 0; k < unroll_bound; ++k) {
        std::vector<Execution<D>> next;
        for (const auto& pre : layer)
          for (const auto& b : bodies) {
            Execution<D> e = pre;
            e.insert(e.end(), b.begin(), b.end());
            next.push_back(std::move(e));
          }
        layer = next;
        out.insert(out.end(), next.begin(), next.end());
      }
      return out;
    }
    case SketchKind::Nonterminal:
      break;
  }
  return {};
}

// All programs derivable from a sketch with at most `depth` rounds of
// simultaneous nonterminal substitution; sentential forms still holding a
// nonterminal at the bound are dropped.
template <class D>
std::vector<SketchPtr<D>> derivable_programs(const Grammar<D>& g, const SketchPtr<D>& s,
                                             int depth) {
  auto expand_once = [&](const SketchPtr<D>& form) {
    std::vector<SketchPtr<D>> out{nullptr};
    std::function<std::vector<SketchPtr<D>>(const SketchPtr<D>&)> go =
        [&](const SketchPtr<D>& node) -> std::vector<SketchPtr<D>> {
      switch (node->kind) {
        case SketchKind::Com:
          return {node};
        case SketchKind::Seq:
        case SketchKind::Choice: {
          std::vector<SketchPtr<D>> res;
          for (const auto& l : go(node->left))
            for (const auto& r : go(node->right))
              res.push_back(node->kind == SketchKind::Seq ? mk_seq<D>(l, r)
                                                          : mk_choice<D>(l, r));
          return res;
        }
        case SketchKind::Star: {
          std::vector<SketchPtr<D>> res;
          for (const auto& b : go(node->body))
            res.push_back(mk_star<D>(b, node->invariant, node->invariant_auto));
          return res;
        }
        case SketchKind::Nonterminal:
          // Occurrences analyzed by an engine carry per-site production
          // instances (context-dependent command attributes); substituting
          // those keeps the oracle semantics aligned with the analysis.
          if (node->instantiated && !node->instances.empty()) return node->instances;
          return g.productions(node->name);
      }
      return {};
    };
    return go(form);
  };

  std::vector<SketchPtr<D>> forms{s};
  std::vector<SketchPtr<D>> programs;
  auto push_program = [&](const SketchPtr<D>& p) {
    for (const auto& q : programs)
      if (sketch_equal<D>(p, q)) return;
    programs.push_back(p);
  };
  for (const auto& f : forms)
    if (is_program<D>(f)) push_program(f);
  for (int round = 0; round < depth; ++round) {
    std::vector<SketchPtr<D>> next;
    for (const auto& f : forms) {
      if (is_program<D>(f)) continue;
      for (const auto& g2 : expand_once(f)) next.push_back(g2);
    }
    forms = next;
    for (const auto& f : forms)
      if (is_program<D>(f)) push_program(f);
    if (forms.empty()) break;
  }
  return programs;
}

// Deterministic oracle enumeration for one nonterminal: breadth-first in the
// number of rewriting steps, ties broken by production index then by position
// (leftmost first). Prefix-stable and complete in the limit.
template <class D>
class OracleEnumerator {
 public:
  OracleEnumerator(const Grammar<D>* g, std::string name, std::size_t queue_budget = 100000)
      : grammar_(g), queue_budget_(queue_budget) {
    queue_.push_back(Item{mk_nonterminal<D>(name), 0});
  }

  // Programs enumerated so far, extended on demand to the first j results.
  // Returns fewer when the language is exhausted or the search budget is hit.
  const std::vector<SketchPtr<D>>& first(std::size_t j) {
    while (results_.size() < j && !queue_.empty() && expansions_ < queue_budget_) {
      Item item = queue_.front();
      queue_.pop_front();
      if (is_program<D>(item.form)) {
        results_.push_back(item.form);
        depths_.push_back(item.depth);
        continue;
      }
      ++expansions_;
      bool done = false;
      for (const auto& succ : rewrite_leftmost(item.form, &done))
        queue_.push_back(Item{succ, item.depth + 1});
    }
    return results_;
  }

  // Rewrite depth (number of rewriting steps) of result i.
  int depth_of(std::size_t i) const { return depths_[i]; }
  bool exhausted() const { return queue_.empty(); }

 private:
  struct Item {
    SketchPtr<D> form;
    int depth;
  };

  std::vector<SketchPtr<D>> rewrite_leftmost(const SketchPtr<D>& form, bool* done) {
    switch (form->kind) {
      case SketchKind::Com:
        return {};
      case SketchKind::Seq:
      case SketchKind::Choice: {
        if (count_nonterminals<D>(form->left) > 0) {
          std::vector<SketchPtr<D>> out;
          for (const auto& l : rewrite_leftmost(form->left, done))
            out.push_back(form->kind == SketchKind::Seq ? mk_seq<D>(l, form->right)
                                                        : mk_choice<D>(l, form->right));
          return out;
        }
        std::vector<SketchPtr<D>> out;
        for (const auto& r : rewrite_leftmost(form->right, done))
          out.push_back(form->kind == SketchKind::Seq ? mk_seq<D>(form->left, r)
                                                      : mk_choice<D>(form->left, r));
        return out;
      }
      case SketchKind::Star: {
        std::vector<SketchPtr<D>> out;
        for (const auto& b : rewrite_leftmost(form->body, done))
          out.push_back(mk_star<D>(b, form->invariant, form->invariant_auto));
        return out;
      }
      case SketchKind::Nonterminal: {
        *done = true;
        return grammar_->productions(form->name);
      }
    }
    return {};
  }

  const Grammar<D>* grammar_;
  std::deque<Item> queue_;
  std::vector<SketchPtr<D>> results_;
  std::vector<int> depths_;
  std::size_t expansions_ = 0;
  std::size_t queue_budget_;
};

// The first j oracle programs for nonterminal n.
template <class D>
std::vector<SketchPtr<D>> oracle_programs(const Grammar<D>& g, const std::string& n,
                                          std::size_t j) {
  OracleEnumerator<D> e(&g, n);
  auto res = e.first(j);
  if (res.size() > j) res.resize(j);
  return res;
}

}  // namespace sgs
