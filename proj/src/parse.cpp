#include "sgs/parse.hpp"

#include <cctype>
#include <cstring>
#include <optional>
#include <functional>
#include <map>
#include <set>

#include "sgs/smr/treiber.hpp"

namespace sgs {
namespace {

struct Token {
  enum class Kind { Ident, Number, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  long number = 0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }
  bool at(const std::string& text) const {
    return tok_.kind != Token::Kind::End && tok_.text == text;
  }
  bool at_ident() const { return tok_.kind == Token::Kind::Ident; }
  bool at_number() const { return tok_.kind == Token::Kind::Number; }
  bool accept(const std::string& text) {
    if (!at(text)) return false;
    advance();
    return true;
  }
  Token expect(const std::string& text) {
    if (!at(text)) fail("expected '" + text + "'");
    return take();
  }
  Token expect_ident(const std::string& what) {
    if (!at_ident()) fail("expected " + what);
    return take();
  }
  long expect_number() {
    bool neg = false;
    if (at("-")) {
      take();
      neg = true;
    }
    if (!at_number()) fail("expected number");
    long v = take().number;
    return neg ? -v : v;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(tok_.line, tok_.col, msg);
  }

 private:
  void advance() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_;
        ++pos_;
      } else if (c == '#' || (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      tok_.text = "<eof>";
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '@') {
      std::string id;
      while (pos_ < src_.size()) {
        char d = src_[pos_];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '@' ||
            d == ':' || d == '-') {
          // ':' only glues protocol-style names (in:protect); a trailing ':'
          // or '-' stays punctuation.
          if ((d == ':' || d == '-') &&
              !(pos_ + 1 < src_.size() &&
                (std::isalpha(static_cast<unsigned char>(src_[pos_ + 1])) ||
                 src_[pos_ + 1] == '_'))) {
            break;
          }
          if (d == ':' && id != "in" && id != "re") break;
          if (d == '-' && id != "ac") break;
          id += d;
          ++pos_;
          ++col_;
        } else {
          break;
        }
      }
      tok_.kind = Token::Kind::Ident;
      tok_.text = id;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long v = 0;
      std::string text;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        v = v * 10 + (src_[pos_] - '0');
        text += src_[pos_];
        ++pos_;
        ++col_;
      }
      tok_.kind = Token::Kind::Number;
      tok_.number = v;
      tok_.text = text;
      return;
    }
    // multi-char punctuation
    static const char* puncts[] = {"::=", "[]", "==", "!=", "<=", ">=", "&&",
                                   "||",  "..", ":="};
    for (const char* p : puncts) {
      std::size_t n = std::strlen(p);
      if (src_.compare(pos_, n, p) == 0) {
        tok_.kind = Token::Kind::Punct;
        tok_.text = p;
        pos_ += n;
        col_ += static_cast<int>(n);
        return;
      }
    }
    tok_.kind = Token::Kind::Punct;
    tok_.text = std::string(1, c);
    ++pos_;
    ++col_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Statement tree shared by both dialects before lowering to the sketch AST.

template <class D>
struct Stmt {
  enum class Kind { Cmd, Atomic, Choice, Loop, Nont };
  Kind kind = Kind::Cmd;
  typename D::Command cmd{};
  std::vector<std::vector<Stmt>> blocks;  // Atomic: 1, Choice: n, Loop: 1
  Selection<D> inv;
  bool inv_auto = false;
  std::string nt;
};

// ---------------------------------------------------------------------------
// Finite dialect

using FD = finite::Domain;

struct FiniteParser {
  Lexer& lx;
  finite::VarTable vars;

  int var_index(const Token& t) const {
    int i = vars.index_of(t.text);
    if (i < 0) throw ParseError(t.line, t.col, "undeclared variable '" + t.text + "'");
    return i;
  }

  std::shared_ptr<finite::Expr> parse_expr() { return parse_add(); }
  std::shared_ptr<finite::Expr> parse_add() {
    auto e = parse_mul();
    for (;;) {
      if (lx.accept("+"))
        e = finite::e_bin(finite::Expr::Kind::Add, e, parse_mul());
      else if (lx.accept("-"))
        e = finite::e_bin(finite::Expr::Kind::Sub, e, parse_mul());
      else
        return e;
    }
  }
  std::shared_ptr<finite::Expr> parse_mul() {
    auto e = parse_atom();
    for (;;) {
      if (lx.accept("*"))
        e = finite::e_bin(finite::Expr::Kind::Mul, e, parse_atom());
      else if (lx.accept("/"))
        e = finite::e_bin(finite::Expr::Kind::Div, e, parse_atom());
      else
        return e;
    }
  }
  std::shared_ptr<finite::Expr> parse_atom() {
    if (lx.accept("(")) {
      auto e = parse_expr();
      lx.expect(")");
      return e;
    }
    if (lx.at("-") || lx.at_number()) return finite::e_num(lx.expect_number());
    Token t = lx.expect_ident("variable or number");
    return finite::e_var(var_index(t));
  }

  std::shared_ptr<finite::BExpr> parse_bexpr() { return parse_or(); }
  std::shared_ptr<finite::BExpr> parse_or() {
    auto b = parse_and();
    while (lx.accept("||")) {
      auto r = parse_and();
      auto n = std::make_shared<finite::BExpr>();
      n->kind = finite::BExpr::Kind::Or;
      n->a = b;
      n->b = r;
      b = n;
    }
    return b;
  }
  std::shared_ptr<finite::BExpr> parse_and() {
    auto b = parse_batom();
    while (lx.accept("&&")) {
      auto r = parse_batom();
      auto n = std::make_shared<finite::BExpr>();
      n->kind = finite::BExpr::Kind::And;
      n->a = b;
      n->b = r;
      b = n;
    }
    return b;
  }
  std::shared_ptr<finite::BExpr> parse_batom() {
    if (lx.accept("!")) {
      auto n = std::make_shared<finite::BExpr>();
      n->kind = finite::BExpr::Kind::Not;
      n->a = parse_batom();
      return n;
    }
    if (lx.at("(")) {
      // Could be a parenthesized boolean or an arithmetic comparison; try
      // boolean first by scanning for a comparison at depth zero.
      lx.expect("(");
      auto b = parse_bexpr();
      lx.expect(")");
      return b;
    }
    auto l = parse_expr();
    auto n = std::make_shared<finite::BExpr>();
    n->kind = finite::BExpr::Kind::Cmp;
    if (lx.accept("=="))
      n->op = finite::BExpr::Op::Eq;
    else if (lx.accept("!="))
      n->op = finite::BExpr::Op::Ne;
    else if (lx.accept("<="))
      n->op = finite::BExpr::Op::Le;
    else if (lx.accept("<"))
      n->op = finite::BExpr::Op::Lt;
    else if (lx.accept(">="))
      n->op = finite::BExpr::Op::Ge;
    else if (lx.accept(">"))
      n->op = finite::BExpr::Op::Gt;
    else
      lx.fail("expected comparison operator");
    n->lhs = l;
    n->rhs = parse_expr();
    return n;
  }

  // Predicate literal: fail | * | disjunction of var=value conjunctions.
  Pred<FD> parse_pred(const FD& dom) {
    if (lx.accept("fail")) return Pred<FD>::fail();
    if (lx.accept("*")) return Pred<FD>::of(dom.all_states());
    FD::Value states;
    for (;;) {
      std::map<int, int> fixed;
      for (;;) {
        Token t = lx.expect_ident("variable");
        int idx = var_index(t);
        lx.expect("=");
        long v = lx.expect_number();
        fixed[idx] = static_cast<int>(v);
        if (!lx.accept("&")) break;
      }
      for (const auto& st : dom.all_states()) {
        bool ok = true;
        for (auto [i, v] : fixed)
          if (st[i] != v) ok = false;
        if (ok) states.push_back(st);
      }
      if (!lx.accept("|")) break;
    }
    std::sort(states.begin(), states.end());
    states.erase(std::unique(states.begin(), states.end()), states.end());
    return Pred<FD>::of(std::move(states));
  }

  Selection<FD> parse_selection(const FD& dom) {
    std::vector<Pred<FD>> preds;
    lx.expect("{");
    if (!lx.at("}")) {
      for (;;) {
        preds.push_back(parse_pred(dom));
        if (!lx.accept(",")) break;
      }
    }
    lx.expect("}");
    return Selection<FD>::of(dom, std::move(preds));
  }

  std::string expr_text(const finite::Expr& e) {
    using K = finite::Expr::Kind;
    switch (e.kind) {
      case K::Num:
        return std::to_string(e.num);
      case K::Var:
        return vars.names[e.var];
      case K::Add:
        return expr_text(*e.a) + " + " + expr_text(*e.b);
      case K::Sub:
        return expr_text(*e.a) + " - " + expr_text(*e.b);
      case K::Mul:
        return expr_text(*e.a) + " * " + expr_text(*e.b);
      case K::Div:
        return expr_text(*e.a) + " / " + expr_text(*e.b);
    }
    return "?";
  }
  std::string bexpr_text(const finite::BExpr& b) {
    using K = finite::BExpr::Kind;
    using O = finite::BExpr::Op;
    switch (b.kind) {
      case K::True:
        return "true";
      case K::Not:
        return "!(" + bexpr_text(*b.a) + ")";
      case K::And:
        return bexpr_text(*b.a) + " && " + bexpr_text(*b.b);
      case K::Or:
        return bexpr_text(*b.a) + " || " + bexpr_text(*b.b);
      case K::Cmp: {
        const char* op = b.op == O::Eq   ? "=="
                         : b.op == O::Ne ? "!="
                         : b.op == O::Lt ? "<"
                         : b.op == O::Le ? "<="
                         : b.op == O::Gt ? ">"
                                         : ">=";
        return expr_text(*b.lhs) + " " + op + " " + expr_text(*b.rhs);
      }
    }
    return "?";
  }

  Stmt<FD> parse_stmt(const FD& dom, const std::set<std::string>& nts) {
    Stmt<FD> s;
    if (lx.accept("skip")) {
      lx.expect(";");
      s.cmd = finite::cmd_skip();
      return s;
    }
    if (lx.at("assume") || lx.at("assert")) {
      bool is_assume = lx.take().text == "assume";
      lx.expect("(");
      auto b = parse_bexpr();
      lx.expect(")");
      lx.expect(";");
      std::string text = (is_assume ? "assume(" : "assert(") + bexpr_text(*b) + ")";
      s.cmd = is_assume ? finite::cmd_assume(b, text) : finite::cmd_assert(b, text);
      return s;
    }
    if (lx.at("loop")) {
      lx.take();
      lx.expect("inv");
      s.kind = Stmt<FD>::Kind::Loop;
      if (lx.accept("auto"))
        s.inv_auto = true;
      else
        s.inv = parse_selection(dom);
      lx.expect("{");
      s.blocks.push_back(parse_stmts(dom, nts));
      lx.expect("}");
      return s;
    }
    if (lx.at("(")) {
      lx.take();
      s.kind = Stmt<FD>::Kind::Choice;
      s.blocks.push_back(parse_stmts(dom, nts));
      while (lx.accept("[]")) s.blocks.push_back(parse_stmts(dom, nts));
      lx.expect(")");
      if (s.blocks.size() < 2) lx.fail("demonic choice needs at least two branches");
      return s;
    }
    Token t = lx.expect_ident("statement");
    if (nts.count(t.text)) {
      lx.expect(";");
      s.kind = Stmt<FD>::Kind::Nont;
      s.nt = t.text;
      return s;
    }
    int idx = vars.index_of(t.text);
    if (idx < 0)
      throw ParseError(t.line, t.col,
                       "unknown statement or undeclared name '" + t.text + "'");
    lx.expect("=");
    auto e = parse_expr();
    lx.expect(";");
    s.cmd = finite::cmd_assign(idx, e, t.text + " = " + expr_text(*e));
    return s;
  }

  std::vector<Stmt<FD>> parse_stmts(const FD& dom, const std::set<std::string>& nts) {
    std::vector<Stmt<FD>> out;
    while (!lx.at("}") && !lx.at("[]") && !lx.at(")") && !lx.at("|") &&
           lx.peek().kind != Token::Kind::End)
      out.push_back(parse_stmt(dom, nts));
    return out;
  }
};

// Lowers a statement list; `yield_cmd`, when present, is the interference
// command placed after every statement outside atomic blocks (and after each
// block as a whole).
template <class D>
SketchPtr<D> lower_stmts(const std::vector<Stmt<D>>& stmts,
                         const std::optional<typename D::Command>& yield_cmd,
                         bool in_atomic);

template <class D>
SketchPtr<D> lower_stmt(const Stmt<D>& s,
                        const std::optional<typename D::Command>& yield_cmd,
                        bool in_atomic) {
  using K = typename Stmt<D>::Kind;
  switch (s.kind) {
    case K::Cmd:
      return mk_com<D>(s.cmd);
    case K::Atomic:
      return lower_stmts<D>(s.blocks[0], yield_cmd, true);
    case K::Choice: {
      std::vector<SketchPtr<D>> branches;
      for (const auto& b : s.blocks)
        branches.push_back(lower_stmts<D>(b, yield_cmd, in_atomic));
      SketchPtr<D> out = branches.back();
      for (auto it = branches.rbegin() + 1; it != branches.rend(); ++it)
        out = mk_choice<D>(*it, out);
      return out;
    }
    case K::Loop:
      return mk_star<D>(lower_stmts<D>(s.blocks[0], yield_cmd, in_atomic), s.inv,
                        s.inv_auto);
    case K::Nont:
      return mk_nonterminal<D>(s.nt);
  }
  return nullptr;
}

template <class D>
SketchPtr<D> lower_stmts(const std::vector<Stmt<D>>& stmts,
                         const std::optional<typename D::Command>& yield_cmd,
                         bool in_atomic) {
  std::vector<SketchPtr<D>> parts;
  for (const auto& s : stmts) {
    parts.push_back(lower_stmt<D>(s, yield_cmd, in_atomic));
    if (!in_atomic && yield_cmd) parts.push_back(mk_com<D>(*yield_cmd));
  }
  if (parts.empty()) {
    Stmt<D> skip;  // empty block behaves as skip
    parts.push_back(lower_stmt<D>(skip, yield_cmd, in_atomic));
  }
  return mk_seq_list<D>(std::move(parts));
}

// ---------------------------------------------------------------------------
// SMR dialect

using SD = smr::Domain;

struct SmrParser {
  Lexer& lx;
  smr::PtrTable ptrs;

  int ptr_index(const Token& t) const {
    return ptrs.index_of(t.text);
  }
  int require_ptr(const Token& t) const {
    int i = ptr_index(t);
    if (i < 0)
      throw ParseError(t.line, t.col, "undeclared pointer '" + t.text + "'");
    return i;
  }

  smr::StateMask parse_guarantee_atom() {
    if (lx.accept("*")) return smr::kMaskTop;
    if (lx.at("{")) {
      lx.take();
      smr::StateMask m = 0;
      for (;;) {
        Token t = lx.expect_ident("automaton state");
        if (t.text.size() != 2 || t.text[0] != 'q' || t.text[1] < '0' || t.text[1] > '6')
          throw ParseError(t.line, t.col, "expected automaton state q0..q6");
        m |= smr::bit(t.text[1] - '0');
        if (!lx.accept(",")) break;
      }
      lx.expect("}");
      return m;
    }
    Token t = lx.expect_ident("guarantee");
    if (t.text == "L") return smr::kMaskLocal;
    if (t.text == "A") return smr::kMaskActive;
    if (t.text == "S") return smr::kMaskSafe;
    if (t.text == "Einv") return smr::kMaskEinv;
    if (t.text == "Eisu") return smr::kMaskEisu;
    throw ParseError(t.line, t.col, "unknown guarantee '" + t.text + "'");
  }

  Pred<SD> parse_pred(const SD& dom) {
    if (lx.accept("fail")) return Pred<SD>::fail();
    if (lx.accept("*")) return Pred<SD>::of(dom.top());
    lx.expect("(");
    SD::Value v = dom.top();
    for (;;) {
      Token t = lx.expect_ident("pointer");
      int idx = require_ptr(t);
      lx.expect(":");
      smr::StateMask m = parse_guarantee_atom();
      while (lx.accept("&")) m &= parse_guarantee_atom();
      v[idx] = m;
      if (!lx.accept(",")) break;
    }
    lx.expect(")");
    return Pred<SD>::of(SD::smash(std::move(v)));
  }

  Selection<SD> parse_selection(const SD& dom) {
    std::vector<Pred<SD>> preds;
    lx.expect("{");
    if (!lx.at("}")) {
      for (;;) {
        preds.push_back(parse_pred(dom));
        if (!lx.accept(",")) break;
      }
    }
    lx.expect("}");
    return Selection<SD>::of(dom, std::move(preds));
  }

  smr::Command cmd(smr::Command::Kind kind, int a, int b, std::string text) {
    smr::Command c;
    c.kind = kind;
    c.a = a;
    c.b = b;
    c.text = std::move(text);
    return c;
  }

  Stmt<SD> parse_stmt(const SD& dom, const std::set<std::string>& nts) {
    using CK = smr::Command::Kind;
    Stmt<SD> s;
    if (lx.accept("skip")) {
      lx.expect(";");
      s.cmd = cmd(CK::Skip, -1, -1, "skip");
      return s;
    }
    if (lx.at("atomic")) {
      lx.take();
      lx.expect("{");
      s.kind = Stmt<SD>::Kind::Atomic;
      s.blocks.push_back(parse_stmts(dom, nts));
      lx.expect("}");
      return s;
    }
    if (lx.at("loop")) {
      lx.take();
      lx.expect("inv");
      s.kind = Stmt<SD>::Kind::Loop;
      if (lx.accept("auto"))
        s.inv_auto = true;
      else
        s.inv = parse_selection(dom);
      lx.expect("{");
      s.blocks.push_back(parse_stmts(dom, nts));
      lx.expect("}");
      return s;
    }
    if (lx.at("(")) {
      lx.take();
      s.kind = Stmt<SD>::Kind::Choice;
      s.blocks.push_back(parse_stmts(dom, nts));
      while (lx.accept("[]")) s.blocks.push_back(parse_stmts(dom, nts));
      lx.expect(")");
      if (s.blocks.size() < 2) lx.fail("demonic choice needs at least two branches");
      return s;
    }
    if (lx.at("in:protect")) {
      lx.take();
      lx.expect("(");
      Token t = lx.expect_ident("pointer");
      int a = require_ptr(t);
      lx.expect(")");
      lx.expect(";");
      s.cmd = cmd(CK::ProtectInvoke, a, -1, "in:protect(" + t.text + ")");
      return s;
    }
    if (lx.at("re:protect")) {
      lx.take();
      lx.expect("(");
      int a = -1;
      std::string name;
      if (!lx.at(")")) {
        Token t = lx.expect_ident("pointer");
        a = require_ptr(t);
        name = t.text;
      } else {
        // bare re:protect(): unique protectable pointer
        for (std::size_t i = 0; i < ptrs.size(); ++i)
          if (ptrs.protectable[i]) {
            if (a >= 0) lx.fail("re:protect() is ambiguous, name the pointer");
            a = static_cast<int>(i);
            name = ptrs.names[i];
          }
        if (a < 0) lx.fail("re:protect() with no protectable pointer");
      }
      lx.expect(")");
      lx.expect(";");
      s.cmd = cmd(CK::ProtectReturn, a, -1, "re:protect(" + name + ")");
      return s;
    }
    if (lx.at("in:unprotect")) {
      lx.take();
      lx.expect("(");
      lx.expect(")");
      lx.expect(";");
      s.cmd = cmd(CK::Unprotect, -1, -1, "in:unprotect()");
      return s;
    }
    if (lx.at("@inv")) {
      lx.take();
      lx.expect("active");
      lx.expect("(");
      Token t = lx.expect_ident("pointer");
      int a = require_ptr(t);
      lx.expect(")");
      lx.expect(";");
      s.cmd = cmd(CK::InvActive, a, -1, "@inv active(" + t.text + ")");
      return s;
    }
    if (lx.at("access")) {
      lx.take();
      lx.expect("(");
      Token t = lx.expect_ident("pointer");
      int a = require_ptr(t);
      lx.expect(")");
      lx.expect(";");
      s.cmd = cmd(CK::Access, a, -1, "access(" + t.text + ")");
      return s;
    }
    if (lx.at("assume")) {
      lx.take();
      lx.expect("(");
      if (lx.accept("cas")) {
        lx.expect("(");
        Token p = lx.expect_ident("pointer");
        int a = require_ptr(p);
        lx.expect(",");
        Token q = lx.expect_ident("pointer");
        int b = require_ptr(q);
        lx.expect(",");
        Token n = lx.expect_ident("new value");
        lx.expect(")");
        lx.expect(")");
        lx.expect(";");
        s.cmd = cmd(CK::CasAssume, a, b,
                    "assume(cas(" + p.text + ", " + q.text + ", " + n.text + "))");
        return s;
      }
      Token l = lx.expect_ident("identifier");
      std::string op = lx.at("==") ? "==" : lx.at("!=") ? "!=" : "";
      if (op.empty()) lx.fail("expected == or != in assume");
      lx.take();
      Token r = lx.expect_ident("identifier");
      lx.expect(")");
      lx.expect(";");
      std::string text = "assume(" + l.text + " " + op + " " + r.text + ")";
      int a = ptr_index(l), b = ptr_index(r);
      if (op == "==" && a >= 0 && b >= 0) {
        s.cmd = cmd(CK::AssumeEqual, a, b, text);
      } else {
        // null checks and data conditions have no guarantee effect
        s.cmd = cmd(CK::Skip, -1, -1, text);
      }
      return s;
    }
    Token t = lx.expect_ident("statement");
    if (nts.count(t.text)) {
      lx.expect(";");
      s.kind = Stmt<SD>::Kind::Nont;
      s.nt = t.text;
      return s;
    }
    // assignments: p := q, p := q.f, p.f := q, data := ...
    if (lx.accept(".")) {
      Token field = lx.expect_ident("field");
      lx.expect(":=");
      Token src = lx.expect_ident("value");
      lx.expect(";");
      int a = require_ptr(t);
      s.cmd = cmd(CK::Access, a, -1, t.text + "." + field.text + " := " + src.text);
      return s;
    }
    lx.expect(":=");
    Token src = lx.expect_ident("value");
    if (lx.accept(".")) {
      Token field = lx.expect_ident("field");
      lx.expect(";");
      if (ptr_index(t) >= 0)
        throw ParseError(t.line, t.col,
                         "field reads into tracked pointers are not supported");
      int b = require_ptr(src);
      s.cmd = cmd(CK::Access, b, -1, t.text + " := " + src.text + "." + field.text);
      return s;
    }
    lx.expect(";");
    int a = ptr_index(t), b = ptr_index(src);
    std::string text = t.text + " := " + src.text;
    if (a >= 0 && b >= 0)
      s.cmd = cmd(CK::Copy, a, b, text);
    else if (a >= 0)
      throw ParseError(t.line, t.col, "pointer assigned from untracked value");
    else
      s.cmd = cmd(CK::Skip, -1, -1, text);
    return s;
  }

  std::vector<Stmt<SD>> parse_stmts(const SD& dom, const std::set<std::string>& nts) {
    std::vector<Stmt<SD>> out;
    while (!lx.at("}") && !lx.at("[]") && !lx.at(")") && !lx.at("|") &&
           lx.peek().kind != Token::Kind::End)
      out.push_back(parse_stmt(dom, nts));
    return out;
  }
};

smr::Command smr_yield_cmd() {
  smr::Command c;
  c.kind = smr::Command::Kind::Interfere;
  c.text = "yield";
  return c;
}

// Inserts the enrichment nonterminal after every statement and at the start
// of every atomic block.
void enrich_with_ac(std::vector<Stmt<SD>>& stmts) {
  std::vector<Stmt<SD>> out;
  for (auto& s : stmts) {
    bool insert_after =
        s.kind == Stmt<SD>::Kind::Cmd || s.kind == Stmt<SD>::Kind::Atomic;
    for (auto& block : s.blocks)
      enrich_with_ac(block);
    if (s.kind == Stmt<SD>::Kind::Atomic) {
      Stmt<SD> ac;
      ac.kind = Stmt<SD>::Kind::Nont;
      ac.nt = "AC";
      s.blocks[0].insert(s.blocks[0].begin(), ac);
    }
    out.push_back(std::move(s));
    if (insert_after) {
      Stmt<SD> ac;
      ac.kind = Stmt<SD>::Kind::Nont;
      ac.nt = "AC";
      out.push_back(std::move(ac));
    }
  }
  stmts = std::move(out);
}

// ---------------------------------------------------------------------------

template <class D>
void validate_nonterminals(const SketchPtr<D>& s, const Grammar<D>& g) {
  switch (s->kind) {
    case SketchKind::Com:
      return;
    case SketchKind::Seq:
    case SketchKind::Choice:
      validate_nonterminals<D>(s->left, g);
      validate_nonterminals<D>(s->right, g);
      return;
    case SketchKind::Star:
      validate_nonterminals<D>(s->body, g);
      return;
    case SketchKind::Nonterminal:
      if (!g.has(s->name))
        throw ParseError(0, 0, "undeclared nonterminal '" + s->name + "'");
      return;
  }
}

template <class D>
void freeze_task(Task<D>& task) {
  int next = 0;
  assign_ids<D>(task.sketch, &next);
  for (const auto& name : task.grammar.names())
    for (const auto& prod : task.grammar.productions(name))
      assign_ids<D>(prod, &next);
  task.node_count = next;
  validate_nonterminals<D>(task.sketch, task.grammar);
  for (const auto& name : task.grammar.names())
    for (const auto& prod : task.grammar.productions(name))
      validate_nonterminals<D>(prod, task.grammar);
  for (const auto& name : task.grammar.recursive_nonterminals())
    task.warnings.push_back("nonterminal '" + name + "' is recursive");
}

}  // namespace

Task<finite::Domain> parse_finite_body(Lexer& lx) {
  FiniteParser fp{lx};
  lx.expect("vars");
  for (;;) {
    Token t = lx.expect_ident("variable name");
    lx.expect(":");
    long lo = lx.expect_number();
    lx.expect("..");
    long hi = lx.expect_number();
    fp.vars.names.push_back(t.text);
    fp.vars.lo.push_back(static_cast<int>(lo));
    fp.vars.hi.push_back(static_cast<int>(hi));
    if (!lx.accept(",")) break;
  }
  lx.expect(";");

  Task<FD> task(FD(fp.vars));
  std::set<std::string> nts;
  bool have_pre = false, have_post = false;
  SketchPtr<FD> sketch;

  while (lx.peek().kind != Token::Kind::End) {
    if (lx.accept("grammar")) {
      Token name = lx.expect_ident("nonterminal name");
      lx.expect("::=");
      nts.insert(name.text);
      int prods = 0;
      while (!lx.at(";")) {
        lx.expect("{");
        auto stmts = fp.parse_stmts(task.dom, nts);
        lx.expect("}");
        task.grammar.add(name.text, lower_stmts<FD>(stmts, std::nullopt, false));
        ++prods;
        if (!lx.accept("|")) break;
      }
      lx.expect(";");
      if (prods == 0) lx.fail("empty production set for '" + name.text + "'");
    } else if (lx.accept("pre")) {
      task.pre = fp.parse_selection(task.dom);
      have_pre = true;
    } else if (lx.accept("post")) {
      task.post = fp.parse_selection(task.dom);
      have_post = true;
    } else if (lx.accept("sketch")) {
      lx.expect("{");
      auto stmts = fp.parse_stmts(task.dom, nts);
      lx.expect("}");
      sketch = lower_stmts<FD>(stmts, std::nullopt, false);
    } else {
      lx.fail("expected grammar, pre, post, or sketch section");
    }
  }
  if (!sketch) throw ParseError(0, 0, "missing sketch section");
  if (!have_pre || !have_post) throw ParseError(0, 0, "missing pre or post section");
  task.sketch = sketch;
  freeze_task(task);
  return task;
}

Task<smr::Domain> parse_smr_body(Lexer& lx) {
  SmrParser sp{lx};
  lx.expect("ptrs");
  for (;;) {
    Token t = lx.expect_ident("pointer name");
    sp.ptrs.names.push_back(t.text);
    bool shared = false, prot = false, active = false;
    while (lx.at_ident() && (lx.at("local") || lx.at("shared") ||
                             lx.at("protectable") || lx.at("active"))) {
      std::string attr = lx.take().text;
      if (attr == "shared") shared = true;
      if (attr == "protectable") prot = true;
      if (attr == "active") active = true;
    }
    sp.ptrs.shared.push_back(shared);
    sp.ptrs.protectable.push_back(prot);
    sp.ptrs.always_active.push_back(active);
    if (!lx.accept(",")) break;
  }
  lx.expect(";");

  Task<SD> task(SD(sp.ptrs));
  std::set<std::string> nts;
  bool ac_insert = false;
  SketchPtr<SD> sketch;
  std::vector<Stmt<SD>> sketch_stmts;
  bool have_sketch = false;

  while (lx.peek().kind != Token::Kind::End) {
    if (lx.accept("ac-insert")) {
      lx.expect(";");
      ac_insert = true;
      nts.insert("AC");
    } else if (lx.accept("grammar")) {
      Token name = lx.expect_ident("nonterminal name");
      lx.expect("::=");
      nts.insert(name.text);
      int prods = 0;
      while (!lx.at(";")) {
        lx.expect("{");
        auto stmts = sp.parse_stmts(task.dom, nts);
        lx.expect("}");
        // Productions carry no interference points of their own; the
        // occurrence is followed by one in the enclosing sketch.
        task.grammar.add(name.text, lower_stmts<SD>(stmts, std::nullopt, true));
        ++prods;
        if (!lx.accept("|")) break;
      }
      lx.expect(";");
      if (prods == 0) lx.fail("empty production set for '" + name.text + "'");
    } else if (lx.accept("pre")) {
      task.pre = sp.parse_selection(task.dom);
    } else if (lx.accept("post")) {
      task.post = sp.parse_selection(task.dom);
    } else if (lx.accept("sketch")) {
      lx.expect("{");
      sketch_stmts = sp.parse_stmts(task.dom, nts);
      lx.expect("}");
      have_sketch = true;
    } else {
      lx.fail("expected ac-insert, grammar, pre, post, or sketch section");
    }
  }
  if (!have_sketch) throw ParseError(0, 0, "missing sketch section");

  if (ac_insert) {
    enrich_with_ac(sketch_stmts);
    if (!task.grammar.has("AC"))
      for (auto& prod : smr::build_ac_productions(task.dom.ptrs()))
        task.grammar.add("AC", std::move(prod));
  }
  sketch = lower_stmts<SD>(sketch_stmts, smr_yield_cmd(), false);
  task.sketch = sketch;

  // Default specification: no failure before, no failure after.
  if (task.pre.empty())
    task.pre = Selection<SD>::single(Pred<SD>::of(task.dom.top()));
  if (task.post.empty())
    task.post = Selection<SD>::single(Pred<SD>::of(task.dom.top()));

  freeze_task(task);
  return task;
}

ParsedFile parse_sketch(const std::string& text) {
  Lexer lx(text);
  lx.expect("domain");
  Token d = lx.expect_ident("domain name");
  ParsedFile out;
  out.domain = d.text;
  if (d.text == "finite")
    out.finite_task = parse_finite_body(lx);
  else if (d.text == "smr")
    out.smr_task = parse_smr_body(lx);
  else
    throw ParseError(d.line, d.col, "unknown domain '" + d.text + "'");
  return out;
}

Task<finite::Domain> parse_finite(const std::string& text) {
  auto f = parse_sketch(text);
  if (!f.finite_task) throw ParseError(0, 0, "expected a finite-domain file");
  return std::move(*f.finite_task);
}

Task<smr::Domain> parse_smr(const std::string& text) {
  auto f = parse_sketch(text);
  if (!f.smr_task) throw ParseError(0, 0, "expected an smr-domain file");
  return std::move(*f.smr_task);
}

}  // namespace sgs
