#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgs/assertions.hpp"

namespace sgs::finite {

// Declared variables with inclusive integer ranges.
struct VarTable {
  std::vector<std::string> names;
  std::vector<int> lo, hi;

  int index_of(const std::string& n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return static_cast<int>(i);
    return -1;
  }
  std::size_t size() const { return names.size(); }
};

// A state: one value per declared variable, in declaration order.
using State = std::vector<int>;

// Arithmetic and boolean expressions over the declared variables.
struct Expr {
  enum class Kind { Num, Var, Add, Sub, Mul, Div };
  Kind kind;
  long num = 0;
  int var = -1;
  std::shared_ptr<Expr> a, b;
};

struct BExpr {
  enum class Kind { Cmp, And, Or, Not, True };
  enum class Op { Eq, Ne, Lt, Le, Gt, Ge };
  Kind kind = Kind::True;
  Op op = Op::Eq;
  std::shared_ptr<Expr> lhs, rhs;
  std::shared_ptr<BExpr> a, b;
};

inline std::shared_ptr<Expr> e_num(long v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Num;
  e->num = v;
  return e;
}
inline std::shared_ptr<Expr> e_var(int idx) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->var = idx;
  return e;
}
inline std::shared_ptr<Expr> e_bin(Expr::Kind k, std::shared_ptr<Expr> a,
                                   std::shared_ptr<Expr> b) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

// nullopt signals a failing evaluation (division by zero).
inline std::optional<long> eval_expr(const Expr& e, const State& st) {
  switch (e.kind) {
    case Expr::Kind::Num:
      return e.num;
    case Expr::Kind::Var:
      return st[e.var];
    default: {
      auto va = eval_expr(*e.a, st);
      auto vb = eval_expr(*e.b, st);
      if (!va || !vb) return std::nullopt;
      switch (e.kind) {
        case Expr::Kind::Add:
          return *va + *vb;
        case Expr::Kind::Sub:
          return *va - *vb;
        case Expr::Kind::Mul:
          return *va * *vb;
        case Expr::Kind::Div:
          if (*vb == 0) return std::nullopt;
          return *va / *vb;
        default:
          return std::nullopt;
      }
    }
  }
}

inline std::optional<bool> eval_bexpr(const BExpr& b, const State& st) {
  switch (b.kind) {
    case BExpr::Kind::True:
      return true;
    case BExpr::Kind::Cmp: {
      auto l = eval_expr(*b.lhs, st);
      auto r = eval_expr(*b.rhs, st);
      if (!l || !r) return std::nullopt;
      switch (b.op) {
        case BExpr::Op::Eq:
          return *l == *r;
        case BExpr::Op::Ne:
          return *l != *r;
        case BExpr::Op::Lt:
          return *l < *r;
        case BExpr::Op::Le:
          return *l <= *r;
        case BExpr::Op::Gt:
          return *l > *r;
        case BExpr::Op::Ge:
          return *l >= *r;
      }
      return std::nullopt;
    }
    case BExpr::Kind::And: {
      auto l = eval_bexpr(*b.a, st), r = eval_bexpr(*b.b, st);
      if (!l || !r) return std::nullopt;
      return *l && *r;
    }
    case BExpr::Kind::Or: {
      auto l = eval_bexpr(*b.a, st), r = eval_bexpr(*b.b, st);
      if (!l || !r) return std::nullopt;
      return *l || *r;
    }
    case BExpr::Kind::Not: {
      auto l = eval_bexpr(*b.a, st);
      if (!l) return std::nullopt;
      return !*l;
    }
  }
  return std::nullopt;
}

struct Command {
  enum class Kind { Skip, Assign, Assume, Assert };
  Kind kind = Kind::Skip;
  int var = -1;
  std::shared_ptr<Expr> expr;
  std::shared_ptr<BExpr> cond;
  std::string text = "skip";

  // Identity for memo keys and structural program equality.
  friend bool operator==(const Command& a, const Command& b) {
    return a.text == b.text;
  }
};

// Explicit finite-state domain. A value is a canonical (sorted, deduped)
// set of states; fail lives one level up in Pred.
class Domain {
 public:
  using Value = std::vector<State>;
  using Command = finite::Command;

  explicit Domain(VarTable vars) : vars_(std::move(vars)) {}
  const VarTable& vars() const { return vars_; }

  Value bottom() const { return {}; }

  Value all_states() const {
    Value out;
    State st(vars_.size(), 0);
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

  // Per-state semantics lifted to predicates; failure is demonic, so any
  // failing state poisons the whole result.
  std::optional<Value> transfer(const Command& c, const Value& v) const {
    Value out;
    for (const State& st : v) {
      switch (c.kind) {
        case Command::Kind::Skip:
          out.push_back(st);
          break;
        case Command::Kind::Assign: {
          auto val = eval_expr(*c.expr, st);
          if (!val || *val < vars_.lo[c.var] || *val > vars_.hi[c.var])
            return std::nullopt;  // division by zero or out-of-range result
          State nst = st;
          nst[c.var] = static_cast<int>(*val);
          out.push_back(std::move(nst));
          break;
        }
        case Command::Kind::Assume: {
          auto ok = eval_bexpr(*c.cond, st);
          if (!ok) return std::nullopt;
          if (*ok) out.push_back(st);
          break;
        }
        case Command::Kind::Assert: {
          auto ok = eval_bexpr(*c.cond, st);
          if (!ok || !*ok) return std::nullopt;
          out.push_back(st);
          break;
        }
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::string render(const Value& v) const {
    if (v.empty()) return "empty";
    if (v.size() == all_count()) return "*";
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += " | ";
      for (std::size_t j = 0; j < vars_.size(); ++j) {
        if (j) out += "&";
        out += vars_.names[j] + "=" + std::to_string(v[i][j]);
      }
    }
    return out;
  }

  std::string render_command(const Command& c) const { return c.text; }

  // Every command is a proof-obligation line in this domain.
  bool silent_command(const Command&) const { return false; }

  // Production copies need no per-occurrence rewriting in this domain.
  void apply_site_tail(Command&, const Command&) const {}

  std::size_t all_count() const {
    std::size_t n = 1;
    for (std::size_t j = 0; j < vars_.size(); ++j)
      n *= static_cast<std::size_t>(vars_.hi[j] - vars_.lo[j] + 1);
    return n;
  }

 private:
  void enumerate(std::size_t j, State& st, Value& out) const {
    if (j == vars_.size()) {
      out.push_back(st);
      return;
    }
    for (int v = vars_.lo[j]; v <= vars_.hi[j]; ++v) {
      st[j] = v;
      enumerate(j + 1, st, out);
    }
  }

  VarTable vars_;
};

// No interference points in this domain.
inline void mark_interference(Command&) {}

inline Command cmd_skip() { return Command{}; }
inline Command cmd_assign(int var, std::shared_ptr<Expr> e, std::string text) {
  Command c;
  c.kind = Command::Kind::Assign;
  c.var = var;
  c.expr = std::move(e);
  c.text = std::move(text);
  return c;
}
inline Command cmd_assume(std::shared_ptr<BExpr> b, std::string text) {
  Command c;
  c.kind = Command::Kind::Assume;
  c.cond = std::move(b);
  c.text = std::move(text);
  return c;
}
inline Command cmd_assert(std::shared_ptr<BExpr> b, std::string text) {
  Command c;
  c.kind = Command::Kind::Assert;
  c.cond = std::move(b);
  c.text = std::move(text);
  return c;
}

}  // namespace sgs::finite
