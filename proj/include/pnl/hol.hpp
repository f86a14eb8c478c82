// Simply-typed lambda-calculus with tuples and the logical constants, plus
// its sequent checker.
//
// Terms are stored locally nameless: a bound occurrence is a de Bruijn
// index counting binders upward, a free variable is a name with a type,
// and a lambda records only its binder's type.  Alpha-equivalent terms
// are therefore structurally identical, equality is pointer-or-structure
// comparison, and the two binder operations are closing (mkHolLam turns
// free occurrences of the abstracted variable into indices) and opening
// (instantiation turns indices back into a term).  Substitution of one
// locally-closed term into another touches no index at all, so capture is
// impossible by construction and the "rename bound variables away" step
// of the textbook presentation disappears.
//
// Printers invent display names at each binder and annotate free
// variables with their types at first use, which is exactly what the
// parser expects back.
//
// Logical constants: bot : o, imp : o -> o -> o, and a forall constant at
// (b -> o) -> o for every type b, written forall[b].  The proposition
// forall[b] (\X:b. xi) is what the quantifier rules operate on; parser and
// printer keep the constant-applied form, there is no binder sugar.
//
// The checker mirrors the first-order one (same derivation-tree s-expr
// format with h-prefixed tags, same premises-from-conclusion walk) minus
// the axiom permutation: hAx closes only on a shared formula.  With
// moduloBeta set, every proposition entering a sequent is beta-normalized
// first, so all matching happens on beta-normal alpha-canonical forms;
// with it clear the checker is strict.
//
// Signature files:   type mu_nu          one base type per line
//                    const gP : mu_nu -> o
// Problem files are as in proof.hpp: use/assume/show/proof, h-tagged tree.

#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pnl/parse.hpp"
#include "pnl/proof.hpp"

namespace pnl {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct HolType {
  enum class Kind { Base, Tuple, Arrow };
  Kind kind = Kind::Base;
  std::string name;             // Base
  std::vector<HolType> args;    // Tuple components; Arrow {dom, cod}

  static HolType base(std::string n) {
    HolType t;
    t.name = std::move(n);
    return t;
  }
  static HolType tuple(std::vector<HolType> comps) {
    if (comps.size() == 1) fail("one-component tuple types do not exist");
    HolType t;
    t.kind = Kind::Tuple;
    t.args = std::move(comps);
    return t;
  }
  static HolType arrow(HolType dom, HolType cod) {
    HolType t;
    t.kind = Kind::Arrow;
    t.args = {std::move(dom), std::move(cod)};
    return t;
  }

  bool operator==(const HolType& o) const {
    return kind == o.kind && name == o.name && args == o.args;
  }
  bool operator<(const HolType& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (name != o.name) return name < o.name;
    return args < o.args;
  }

  std::string display() const {
    switch (kind) {
      case Kind::Base:
        return name;
      case Kind::Tuple: {
        std::string out = "(";
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (i) out += ", ";
          out += args[i].display();
        }
        return out + ")";
      }
      case Kind::Arrow: {
        std::string dom = args[0].display();
        if (args[0].kind == Kind::Arrow) dom = "(" + dom + ")";
        return dom + " -> " + args[1].display();
      }
    }
    fail("unreachable type kind");
  }
};

inline HolType typeO() { return HolType::base("o"); }

// ---------------------------------------------------------------------------
// Signature
// ---------------------------------------------------------------------------

struct HolSignature {
  std::set<std::string> baseTypes = {"o"};
  std::map<std::string, HolType> constants;   // besides bot/imp/forall

  bool knowsBase(const std::string& n) const { return baseTypes.count(n) > 0; }
};

inline void holTypeWellFormed(const HolSignature& sig, const HolType& ty) {
  switch (ty.kind) {
    case HolType::Kind::Base:
      if (!sig.knowsBase(ty.name)) fail("undeclared type " + ty.name);
      return;
    default:
      for (const auto& a : ty.args) holTypeWellFormed(sig, a);
  }
}

// ---------------------------------------------------------------------------
// Variables and terms
// ---------------------------------------------------------------------------

struct HolVar {
  std::string name;
  HolType type;
  bool isAtom = false;   // embedded atoms are variables, literally

  bool operator==(const HolVar& o) const {
    return name == o.name && isAtom == o.isAtom && type == o.type;
  }
  bool operator<(const HolVar& o) const {
    if (name != o.name) return name < o.name;
    if (isAtom != o.isAtom) return isAtom < o.isAtom;
    return type < o.type;
  }
};

// The atom a variable embeds, recovered from its printed name.
inline Atom holVarAtom(const HolVar& v) {
  if (!v.isAtom) fail(v.name + " is not an atom variable");
  std::size_t cut = v.name.find('#');
  if (cut == std::string::npos) fail("malformed atom variable " + v.name);
  return Atom{v.name.substr(0, cut),
              std::stoll(v.name.substr(cut + 1))};
}

inline HolVar atomVar(const Atom& a) {
  return HolVar{a.display(), HolType::base("mu_" + a.sort), true};
}

struct HolNode;
using HolTerm = std::shared_ptr<const HolNode>;

struct HolNode {
  enum class Kind { Var, Bound, Lam, App, Tuple, Const };
  Kind kind;

  HolVar var;                   // Var: the free variable; Lam: binder type,
                                //   name always empty
  int bound = 0;                // Bound: binders to skip upward
  std::vector<HolTerm> args;    // Lam {body}; App {fn, arg}; Tuple comps
  std::string constName;        // Const
  HolType constType;            // Const

  // Caches.
  HolType type;
  std::set<HolVar> fv;          // free named variables; indices excluded
  std::size_t hash = 0;
};

namespace detail {

inline std::size_t hashHolType(const HolType& ty) {
  std::size_t h = static_cast<std::size_t>(ty.kind) * 1000003u;
  h = hashCombine(h, hashString(ty.name));
  for (const auto& a : ty.args) h = hashCombine(h, hashHolType(a));
  return h;
}

inline HolTerm finishHol(HolNode n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 7000037u;
  switch (n.kind) {
    case HolNode::Kind::Var:
      h = hashCombine(h, hashString(n.var.name));
      h = hashCombine(h, hashHolType(n.var.type));
      break;
    case HolNode::Kind::Bound:
      h = hashCombine(h, static_cast<std::size_t>(n.bound));
      break;
    case HolNode::Kind::Lam:
      h = hashCombine(h, hashHolType(n.var.type));
      h = hashCombine(h, n.args[0]->hash);
      break;
    case HolNode::Kind::Const:
      h = hashCombine(h, hashString(n.constName));
      h = hashCombine(h, hashHolType(n.constType));
      break;
    default:
      for (const auto& a : n.args) h = hashCombine(h, a->hash);
  }
  n.hash = h;
  return std::make_shared<const HolNode>(std::move(n));
}

inline HolTerm mkBound(int idx, HolType ty) {
  HolNode n;
  n.kind = HolNode::Kind::Bound;
  n.bound = idx;
  n.type = std::move(ty);
  return finishHol(std::move(n));
}

}  // namespace detail

inline HolTerm mkHolVar(HolVar v) {
  HolNode n;
  n.kind = HolNode::Kind::Var;
  n.type = v.type;
  n.fv = {v};
  n.var = std::move(v);
  return detail::finishHol(std::move(n));
}

inline HolTerm mkHolConst(std::string name, HolType ty) {
  HolNode n;
  n.kind = HolNode::Kind::Const;
  n.constName = std::move(name);
  n.type = ty;
  n.constType = std::move(ty);
  return detail::finishHol(std::move(n));
}

inline HolTerm holBot() { return mkHolConst("bot", typeO()); }
inline HolTerm holImp() {
  return mkHolConst("imp",
                    HolType::arrow(typeO(), HolType::arrow(typeO(), typeO())));
}
inline HolTerm holForallConst(HolType beta) {
  return mkHolConst(
      "forall", HolType::arrow(HolType::arrow(std::move(beta), typeO()),
                               typeO()));
}

inline HolTerm mkHolApp(HolTerm fn, HolTerm arg) {
  if (fn->type.kind != HolType::Kind::Arrow)
    fail("application of a non-function of type " + fn->type.display());
  if (!(fn->type.args[0] == arg->type))
    fail("argument has type " + arg->type.display() + ", expected " +
         fn->type.args[0].display());
  HolNode n;
  n.kind = HolNode::Kind::App;
  n.type = fn->type.args[1];
  n.fv = fn->fv;
  n.fv.insert(arg->fv.begin(), arg->fv.end());
  n.args = {std::move(fn), std::move(arg)};
  return detail::finishHol(std::move(n));
}

inline HolTerm mkHolTuple(std::vector<HolTerm> comps) {
  if (comps.size() == 1) fail("one-component tuples do not exist");
  HolNode n;
  n.kind = HolNode::Kind::Tuple;
  std::vector<HolType> tys;
  for (const auto& c : comps) {
    tys.push_back(c->type);
    n.fv.insert(c->fv.begin(), c->fv.end());
  }
  n.type = HolType::tuple(std::move(tys));
  n.args = std::move(comps);
  return detail::finishHol(std::move(n));
}

namespace detail {

// A lambda node over an already-closed body.
inline HolTerm mkLamRaw(HolType bindType, HolTerm body) {
  HolNode n;
  n.kind = HolNode::Kind::Lam;
  n.type = HolType::arrow(bindType, body->type);
  n.fv = body->fv;
  n.var = HolVar{"", std::move(bindType), false};
  n.args = {std::move(body)};
  return finishHol(std::move(n));
}

// Closing: free occurrences of x become the index pointing at the binder
// `depth` levels above.
inline HolTerm closeVar(const HolTerm& t, const HolVar& x, int depth) {
  if (!t->fv.count(x)) return t;
  switch (t->kind) {
    case HolNode::Kind::Var:
      return mkBound(depth, t->type);
    case HolNode::Kind::Lam:
      return mkLamRaw(t->var.type, closeVar(t->args[0], x, depth + 1));
    case HolNode::Kind::App:
      return mkHolApp(closeVar(t->args[0], x, depth),
                      closeVar(t->args[1], x, depth));
    case HolNode::Kind::Tuple: {
      std::vector<HolTerm> comps;
      for (const auto& c : t->args) comps.push_back(closeVar(c, x, depth));
      return mkHolTuple(std::move(comps));
    }
    default:
      return t;
  }
}

// Lifting: indices that point past `cutoff` binders — out of the walked
// region — move up by `by`.  Needed when a term is planted under binders
// it did not originally sit beneath.
inline HolTerm shiftBound(const HolTerm& t, int by, int cutoff) {
  switch (t->kind) {
    case HolNode::Kind::Var:
    case HolNode::Kind::Const:
      return t;
    case HolNode::Kind::Bound:
      return t->bound >= cutoff ? mkBound(t->bound + by, t->type) : t;
    case HolNode::Kind::Lam: {
      HolTerm body = shiftBound(t->args[0], by, cutoff + 1);
      return body.get() == t->args[0].get() ? t : mkLamRaw(t->var.type, body);
    }
    case HolNode::Kind::App: {
      HolTerm fn = shiftBound(t->args[0], by, cutoff);
      HolTerm arg = shiftBound(t->args[1], by, cutoff);
      if (fn.get() == t->args[0].get() && arg.get() == t->args[1].get())
        return t;
      return mkHolApp(fn, arg);
    }
    case HolNode::Kind::Tuple: {
      std::vector<HolTerm> comps;
      bool changed = false;
      for (const auto& c : t->args) {
        comps.push_back(shiftBound(c, by, cutoff));
        changed |= comps.back().get() != c.get();
      }
      return changed ? mkHolTuple(std::move(comps)) : t;
    }
  }
  fail("unreachable term kind");
}

// Opening: the index aimed at the stripped binder becomes `a`, lifted by
// the number of binders between that index and the strip point so that
// whatever `a` referred to outside, it still refers to; indices above the
// stripped level step down past the vanished binder.
inline HolTerm openBody(const HolTerm& t, const HolTerm& a, int depth) {
  switch (t->kind) {
    case HolNode::Kind::Var:
    case HolNode::Kind::Const:
      return t;
    case HolNode::Kind::Bound:
      if (t->bound == depth)
        return depth == 0 ? a : shiftBound(a, depth, 0);
      if (t->bound > depth) return mkBound(t->bound - 1, t->type);
      return t;
    case HolNode::Kind::Lam: {
      HolTerm body = openBody(t->args[0], a, depth + 1);
      return body.get() == t->args[0].get() ? t : mkLamRaw(t->var.type, body);
    }
    case HolNode::Kind::App: {
      HolTerm fn = openBody(t->args[0], a, depth);
      HolTerm arg = openBody(t->args[1], a, depth);
      if (fn.get() == t->args[0].get() && arg.get() == t->args[1].get())
        return t;
      return mkHolApp(fn, arg);
    }
    case HolNode::Kind::Tuple: {
      std::vector<HolTerm> comps;
      bool changed = false;
      for (const auto& c : t->args) {
        comps.push_back(openBody(c, a, depth));
        changed |= comps.back().get() != c.get();
      }
      return changed ? mkHolTuple(std::move(comps)) : t;
    }
  }
  fail("unreachable term kind");
}

}  // namespace detail

inline HolTerm mkHolLam(const HolVar& binder, HolTerm body) {
  return detail::mkLamRaw(binder.type,
                          detail::closeVar(body, binder, 0));
}

// The body of a lambda with its binder replaced by `arg`.
inline HolTerm holInstantiate(const HolTerm& lam, const HolTerm& arg) {
  if (lam->kind != HolNode::Kind::Lam)
    fail("instantiating a non-lambda of type " + lam->type.display());
  if (!(lam->var.type == arg->type))
    fail("instantiating at a " + arg->type.display() +
         " term, the binder wants " + lam->var.type.display());
  return detail::openBody(lam->args[0], arg, 0);
}

inline bool holEq(const HolTerm& a, const HolTerm& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->kind != b->kind) return false;
  switch (a->kind) {
    case HolNode::Kind::Var:
      return a->var == b->var;
    case HolNode::Kind::Bound:
      return a->bound == b->bound;
    case HolNode::Kind::Const:
      return a->constName == b->constName && a->constType == b->constType;
    case HolNode::Kind::Lam:
      if (!(a->var.type == b->var.type)) return false;
      [[fallthrough]];
    default: {
      if (a->args.size() != b->args.size()) return false;
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!holEq(a->args[i], b->args[i])) return false;
      return true;
    }
  }
}

// Alpha-equivalence is structural equality of the nameless storage.
inline bool holAlphaEq(const HolTerm& a, const HolTerm& b) {
  return holEq(a, b);
}

// ---------------------------------------------------------------------------
// Type checking (re-derivation against a signature)
// ---------------------------------------------------------------------------

namespace detail {

inline HolType holTypeCheckIn(const HolSignature& sig, const HolTerm& t,
                              std::vector<HolType>& binders) {
  switch (t->kind) {
    case HolNode::Kind::Var:
      holTypeWellFormed(sig, t->var.type);
      return t->var.type;
    case HolNode::Kind::Bound: {
      std::size_t up = static_cast<std::size_t>(t->bound);
      if (t->bound < 0 || up >= binders.size())
        fail("dangling bound-variable index");
      return binders[binders.size() - 1 - up];
    }
    case HolNode::Kind::Const: {
      if (t->constName == "bot") {
        if (!(t->constType == typeO())) fail("bot must have type o");
      } else if (t->constName == "imp") {
        if (!(t->constType ==
              HolType::arrow(typeO(), HolType::arrow(typeO(), typeO()))))
          fail("imp must have type o -> o -> o");
      } else if (t->constName == "forall") {
        const HolType& ty = t->constType;
        bool shaped = ty.kind == HolType::Kind::Arrow &&
                      ty.args[0].kind == HolType::Kind::Arrow &&
                      ty.args[0].args[1] == typeO() && ty.args[1] == typeO();
        if (!shaped) fail("forall must have type (b -> o) -> o");
        holTypeWellFormed(sig, ty);
      } else {
        auto it = sig.constants.find(t->constName);
        if (it == sig.constants.end())
          fail("undeclared constant " + t->constName);
        if (!(it->second == t->constType))
          fail("constant " + t->constName + " has type " +
               it->second.display() + ", not " + t->constType.display());
      }
      return t->constType;
    }
    case HolNode::Kind::Lam: {
      holTypeWellFormed(sig, t->var.type);
      binders.push_back(t->var.type);
      HolType cod = holTypeCheckIn(sig, t->args[0], binders);
      binders.pop_back();
      return HolType::arrow(t->var.type, std::move(cod));
    }
    case HolNode::Kind::App: {
      HolType f = holTypeCheckIn(sig, t->args[0], binders);
      HolType a = holTypeCheckIn(sig, t->args[1], binders);
      if (f.kind != HolType::Kind::Arrow)
        fail("application of a non-function of type " + f.display());
      if (!(f.args[0] == a))
        fail("argument has type " + a.display() + ", expected " +
             f.args[0].display());
      return f.args[1];
    }
    case HolNode::Kind::Tuple: {
      std::vector<HolType> tys;
      for (const auto& c : t->args)
        tys.push_back(holTypeCheckIn(sig, c, binders));
      return HolType::tuple(std::move(tys));
    }
  }
  fail("unreachable term kind");
}

}  // namespace detail

inline HolType holTypeCheck(const HolSignature& sig, const HolTerm& t) {
  std::vector<HolType> binders;
  return detail::holTypeCheckIn(sig, t, binders);
}

// ---------------------------------------------------------------------------
// Substitution and beta-normalization
// ---------------------------------------------------------------------------

inline HolTerm holSubst(const HolTerm& t, const HolVar& x, const HolTerm& u) {
  if (!(u->type == x.type))
    fail("substituting a " + u->type.display() + " term for the " +
         x.type.display() + " variable " + x.name);
  if (!t->fv.count(x)) return t;
  switch (t->kind) {
    case HolNode::Kind::Var:
      return u;
    case HolNode::Kind::Lam:
      return detail::mkLamRaw(t->var.type, holSubst(t->args[0], x, u));
    case HolNode::Kind::App:
      return mkHolApp(holSubst(t->args[0], x, u), holSubst(t->args[1], x, u));
    case HolNode::Kind::Tuple: {
      std::vector<HolTerm> comps;
      for (const auto& c : t->args) comps.push_back(holSubst(c, x, u));
      return mkHolTuple(std::move(comps));
    }
    default:
      return t;   // Bound and Const carry no free names
  }
}

// Leftmost-outermost reduction to beta-normal form.  Simple types make any
// strategy terminate; no eta anywhere.
inline HolTerm betaNormalize(const HolTerm& t) {
  switch (t->kind) {
    case HolNode::Kind::Var:
    case HolNode::Kind::Bound:
    case HolNode::Kind::Const:
      return t;
    case HolNode::Kind::Lam: {
      HolTerm body = betaNormalize(t->args[0]);
      return body.get() == t->args[0].get()
                 ? t
                 : detail::mkLamRaw(t->var.type, body);
    }
    case HolNode::Kind::Tuple: {
      std::vector<HolTerm> comps;
      bool changed = false;
      for (const auto& c : t->args) {
        comps.push_back(betaNormalize(c));
        changed |= comps.back().get() != c.get();
      }
      return changed ? mkHolTuple(std::move(comps)) : t;
    }
    case HolNode::Kind::App: {
      HolTerm fn = betaNormalize(t->args[0]);
      if (fn->kind == HolNode::Kind::Lam)
        return betaNormalize(holInstantiate(fn, t->args[1]));
      HolTerm arg = betaNormalize(t->args[1]);
      if (fn.get() == t->args[0].get() && arg.get() == t->args[1].get())
        return t;
      return mkHolApp(fn, arg);
    }
  }
  fail("unreachable term kind");
}

inline bool holAlphaBetaEq(const HolTerm& a, const HolTerm& b) {
  return holEq(betaNormalize(a), betaNormalize(b));
}

// ---------------------------------------------------------------------------
// Display
// ---------------------------------------------------------------------------

namespace detail {

struct HolPrinter {
  std::set<std::string> taken;
  std::vector<std::string> stack;   // display names of enclosing binders
  std::set<HolVar> annotated;

  static bool isImpNode(const HolNode& t) {
    return t.kind == HolNode::Kind::App &&
           t.args[0]->kind == HolNode::Kind::App &&
           t.args[0]->args[0]->kind == HolNode::Kind::Const &&
           t.args[0]->args[0]->constName == "imp";
  }

  std::string var(const HolVar& v) {
    if (v.isAtom || annotated.count(v)) return v.name;
    annotated.insert(v);
    return v.name + ":" + v.type.display();
  }

  // prec 0: lambda and => may appear bare; 1: application chain; 2: atoms.
  std::string term(const HolTerm& t, int prec) {
    std::string out;
    switch (t->kind) {
      case HolNode::Kind::Var:
        return var(t->var);
      case HolNode::Kind::Bound:
        return stack[stack.size() - 1 - static_cast<std::size_t>(t->bound)];
      case HolNode::Kind::Const:
        if (t->constName == "forall")
          return "forall[" + t->constType.args[0].args[0].display() + "]";
        return t->constName;
      case HolNode::Kind::Tuple: {
        out = "(";
        for (std::size_t i = 0; i < t->args.size(); ++i) {
          if (i) out += ", ";
          out += term(t->args[i], 0);
        }
        return out + ")";
      }
      case HolNode::Kind::Lam: {
        std::string name = "X" + std::to_string(stack.size());
        while (taken.count(name)) name += "_";
        taken.insert(name);
        stack.push_back(name);
        std::string body = term(t->args[0], 0);
        stack.pop_back();
        taken.erase(name);
        out = "\\" + name + ":" + t->var.type.display() + ". " + body;
        return prec > 0 ? "(" + out + ")" : out;
      }
      case HolNode::Kind::App: {
        // One call per statement: annotation order must follow text order.
        if (isImpNode(*t)) {
          out = term(t->args[0]->args[1], 1);
          out += " => ";
          out += term(t->args[1], 0);
          return prec > 0 ? "(" + out + ")" : out;
        }
        out = term(t->args[0], 1);
        out += " ";
        out += term(t->args[1], 2);
        return prec > 1 ? "(" + out + ")" : out;
      }
    }
    fail("unreachable term kind");
  }
};

}  // namespace detail

inline std::string displayHolTerm(const HolTerm& t) {
  detail::HolPrinter pr;
  pr.taken = {"bot", "imp", "forall"};
  for (const auto& v : t->fv) pr.taken.insert(v.name);
  return pr.term(t, 0);
}

inline std::string displayHolType(const HolType& ty) { return ty.display(); }

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

using HolEnv = std::map<std::string, HolVar>;

inline HolType parseHolType(const HolSignature& sig, Lexer& lx) {
  HolType lhs = [&] {
    if (lx.accept(Token::Type::LParen)) {
      if (lx.accept(Token::Type::RParen)) return HolType::tuple({});
      std::vector<HolType> comps{parseHolType(sig, lx)};
      while (lx.accept(Token::Type::Comma))
        comps.push_back(parseHolType(sig, lx));
      lx.expect(Token::Type::RParen, "')'");
      return comps.size() == 1 ? comps[0] : HolType::tuple(std::move(comps));
    }
    Token name = lx.expect(Token::Type::Ident, "a type name");
    if (!sig.knowsBase(name.text))
      lx.synErr(name.text + " is not a declared type");
    return HolType::base(name.text);
  }();
  if (lx.accept(Token::Type::Arrow))
    return HolType::arrow(std::move(lhs), parseHolType(sig, lx));
  return lhs;
}

inline HolTerm parseHolTerm(const HolSignature& sig, Lexer& lx, HolEnv& env);

namespace detail {

inline HolTerm parseHolPrimary(const HolSignature& sig, Lexer& lx,
                               HolEnv& env) {
  if (lx.peek().type == Token::Type::AtomLit) {
    Atom a = lx.next().atom;
    HolVar v = atomVar(a);
    if (!sig.knowsBase(v.type.name))
      lx.synErr("atom " + a.display() + " needs declared type " + v.type.name);
    return mkHolVar(v);
  }
  if (lx.accept(Token::Type::LParen)) {
    if (lx.accept(Token::Type::RParen)) return mkHolTuple({});
    std::vector<HolTerm> comps{parseHolTerm(sig, lx, env)};
    while (lx.accept(Token::Type::Comma))
      comps.push_back(parseHolTerm(sig, lx, env));
    lx.expect(Token::Type::RParen, "')'");
    return comps.size() == 1 ? comps[0] : mkHolTuple(std::move(comps));
  }
  Token name = lx.expect(Token::Type::Ident, "a term");
  if (name.text == "bot") return holBot();
  if (name.text == "imp") return holImp();
  if (name.text == "forall") {
    lx.expect(Token::Type::LBrack, "'[' after forall");
    HolType beta = parseHolType(sig, lx);
    lx.expect(Token::Type::RBrack, "']'");
    return holForallConst(std::move(beta));
  }
  if (auto it = sig.constants.find(name.text); it != sig.constants.end())
    return mkHolConst(name.text, it->second);
  // A variable: annotated on first use, bare afterwards.
  if (lx.peek().type == Token::Type::Colon) {
    lx.next();
    HolVar v{name.text, parseHolType(sig, lx), false};
    auto [it, fresh] = env.emplace(name.text, v);
    if (!fresh && !(it->second == v))
      lx.synErr("variable " + name.text + " annotated differently earlier");
    return mkHolVar(v);
  }
  auto it = env.find(name.text);
  if (it == env.end())
    lx.synErr("variable " + name.text + " needs a ':type' annotation");
  return mkHolVar(it->second);
}

}  // namespace detail

inline HolTerm parseHolTerm(const HolSignature& sig, Lexer& lx, HolEnv& env) {
  if (lx.accept(Token::Type::Backslash)) {
    Token name = lx.expect(Token::Type::Ident, "a binder name");
    if (sig.constants.count(name.text) || name.text == "bot" ||
        name.text == "imp" || name.text == "forall")
      lx.synErr(name.text + " is a constant and cannot bind");
    lx.expect(Token::Type::Colon, "':' after the binder");
    HolVar v{name.text, parseHolType(sig, lx), false};
    lx.expect(Token::Type::Dot, "'.' after the binder type");
    std::optional<HolVar> shadowed;
    if (auto it = env.find(v.name); it != env.end()) shadowed = it->second;
    env[v.name] = v;
    HolTerm body = parseHolTerm(sig, lx, env);
    if (shadowed)
      env[v.name] = *shadowed;
    else
      env.erase(v.name);
    return mkHolLam(v, std::move(body));
  }
  HolTerm t = detail::parseHolPrimary(sig, lx, env);
  while (lx.peek().type == Token::Type::Ident ||
         lx.peek().type == Token::Type::AtomLit ||
         lx.peek().type == Token::Type::LParen)
    t = mkHolApp(t, detail::parseHolPrimary(sig, lx, env));
  if (lx.accept(Token::Type::DArrow)) {
    HolTerm rhs = parseHolTerm(sig, lx, env);
    return mkHolApp(mkHolApp(holImp(), t), rhs);
  }
  return t;
}

inline HolTerm parseHolTermString(const HolSignature& sig,
                                  const std::string& s, HolEnv& env) {
  Lexer lx(s);
  HolTerm t = parseHolTerm(sig, lx, env);
  lx.expectEnd();
  return t;
}

inline HolTerm parseHolTermString(const HolSignature& sig,
                                  const std::string& s) {
  HolEnv env;
  return parseHolTermString(sig, s, env);
}

inline HolSignature parseHolSignature(const std::string& text) {
  Lexer lx(text);
  HolSignature sig;
  while (lx.peek().type != Token::Type::End) {
    if (lx.acceptKeyword("type")) {
      Token name = lx.expect(Token::Type::Ident, "a type name");
      if (!sig.baseTypes.insert(name.text).second)
        lx.synErr("type " + name.text + " declared twice");
    } else if (lx.acceptKeyword("const")) {
      Token name = lx.expect(Token::Type::Ident, "a constant name");
      if (name.text == "bot" || name.text == "imp" || name.text == "forall")
        lx.synErr(name.text + " is built in");
      lx.expect(Token::Type::Colon, "':'");
      HolType ty = parseHolType(sig, lx);
      if (!sig.constants.emplace(name.text, std::move(ty)).second)
        lx.synErr("constant " + name.text + " declared twice");
    } else {
      lx.synErr("expected 'type' or 'const'");
    }
  }
  return sig;
}

inline std::string displayHolSignature(const HolSignature& sig) {
  std::string out;
  for (const std::string& t : sig.baseTypes)
    if (t != "o") out += "type " + t + "\n";
  for (const auto& [n, ty] : sig.constants)
    out += "const " + n + " : " + ty.display() + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Sequents and the checker
// ---------------------------------------------------------------------------

struct HolSequent {
  std::vector<HolTerm> left;
  std::vector<HolTerm> right;
};

inline bool holSideContains(const std::vector<HolTerm>& side,
                            const HolTerm& p) {
  for (const auto& q : side)
    if (holEq(q, p)) return true;
  return false;
}

inline void holSideInsert(std::vector<HolTerm>& side, HolTerm p) {
  if (!holSideContains(side, p)) side.push_back(std::move(p));
}

inline std::vector<HolTerm> holSideWithout(const std::vector<HolTerm>& side,
                                           std::size_t idx) {
  std::vector<HolTerm> out;
  for (std::size_t i = 0; i < side.size(); ++i)
    if (i != idx) out.push_back(side[i]);
  return out;
}

inline std::string displayHolSequent(const HolSequent& s) {
  std::string out;
  for (std::size_t i = 0; i < s.left.size(); ++i) {
    if (i) out += ", ";
    out += displayHolTerm(s.left[i]);
  }
  if (!s.left.empty()) out += " ";
  out += "|-";
  for (std::size_t i = 0; i < s.right.size(); ++i) {
    out += i ? ", " : " ";
    out += displayHolTerm(s.right[i]);
  }
  return out;
}

// Shape helpers on propositions.
inline bool holIsImp(const HolTerm& p) {
  return detail::HolPrinter::isImpNode(*p);
}
inline bool holIsForall(const HolTerm& p) {
  return p->kind == HolNode::Kind::App &&
         p->args[0]->kind == HolNode::Kind::Const &&
         p->args[0]->constName == "forall";
}
inline bool holIsBot(const HolTerm& p) {
  return p->kind == HolNode::Kind::Const && p->constName == "bot";
}

struct HolCheckedNode {
  HolSequent conclusion;
  std::string rule;
  HolTerm principal;
  HolTerm witness;      // hForallL
  HolVar eigen;         // hForallR
  std::vector<HolCheckedNode> premises;
};

struct HolCheckReport {
  bool ok = false;
  std::string firstError;
  std::vector<NodeStatus> nodes;   // same record as the first-order reports
  HolCheckedNode root;
};

namespace detail {

struct HolChecker {
  const HolSignature& sig;
  bool moduloBeta;
  HolCheckReport& rep;

  HolTerm prep(const HolTerm& p) const {
    return moduloBeta ? betaNormalize(p) : p;
  }

  bool nodeFail(std::size_t slot, const std::string& msg) {
    rep.nodes[slot].ok = false;
    rep.nodes[slot].message = msg;
    if (rep.firstError.empty())
      rep.firstError = rep.nodes[slot].path + ": " + msg;
    return false;
  }

  std::size_t selectPrincipal(const std::vector<HolTerm>& side, bool wantImp,
                              const std::string& text, HolEnv env,
                              const char* rule, const char* sideName) {
    auto shaped = [&](const HolTerm& p) {
      return wantImp ? holIsImp(p) : holIsForall(p);
    };
    const char* shape = wantImp ? "implication" : "universal";
    if (!text.empty()) {
      HolTerm wanted = prep(parseHolTermString(sig, text, env));
      for (std::size_t i = 0; i < side.size(); ++i)
        if (holEq(side[i], wanted)) {
          if (!shaped(side[i]))
            fail(std::string(rule) + ": principal is not an " + shape);
          return i;
        }
      fail(std::string(rule) + ": principal not found on the " + sideName);
    }
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < side.size(); ++i) {
      if (!shaped(side[i])) continue;
      if (found)
        fail(std::string(rule) + ": several " + shape +
             "s to choose from; supply :principal");
      found = i;
    }
    if (!found)
      fail(std::string(rule) + ": no " + shape + " on the " + sideName);
    return *found;
  }

  // The universal's instance at a term: opening when the argument is a
  // lambda, plain application otherwise.
  HolTerm instance(const HolTerm& forallProp, const HolTerm& at) {
    const HolTerm& f = forallProp->args[1];
    if (f->kind == HolNode::Kind::Lam) return holInstantiate(f, at);
    return mkHolApp(f, at);
  }

  bool check(const Derivation& d, HolSequent concl, HolEnv env,
             HolCheckedNode& out, const std::string& path) {
    std::size_t slot = rep.nodes.size();
    rep.nodes.push_back(
        NodeStatus{path, d.rule, displayHolSequent(concl), true, ""});
    out.rule = d.rule;
    out.conclusion = concl;

    std::vector<HolSequent> premiseSequents;
    std::vector<HolEnv> premiseEnvs;
    try {
      if (d.rule == "hAx") {
        if (!d.premises.empty()) fail("hAx takes no premises");
        if (!d.permText.empty())
          fail("hAx takes no permutation; atoms here are plain variables");
        bool closed = false;
        for (const auto& l : concl.left)
          if (holSideContains(concl.right, l)) {
            out.principal = l;
            closed = true;
            break;
          }
        if (!closed)
          fail("axiom does not close this sequent: no hypothesis reappears "
               "on the right");
      } else if (d.rule == "hBotL") {
        if (!d.premises.empty()) fail("hBotL takes no premises");
        bool found = false;
        for (const auto& l : concl.left)
          if (holIsBot(l)) found = true;
        if (!found) fail("hBotL: no falsum among the hypotheses");
      } else if (d.rule == "hImpL") {
        std::size_t i = selectPrincipal(concl.left, true, d.principalText, env,
                                        "hImpL", "left");
        out.principal = concl.left[i];
        if (d.premises.size() != 2) fail("hImpL takes two premises");
        std::vector<HolTerm> base =
            d.keep ? concl.left : holSideWithout(concl.left, i);
        HolSequent first{base, concl.right};
        holSideInsert(first.right, out.principal->args[0]->args[1]);
        HolSequent second{base, concl.right};
        holSideInsert(second.left, out.principal->args[1]);
        premiseSequents = {first, second};
        premiseEnvs = {env, env};
      } else if (d.rule == "hImpR") {
        std::size_t i = selectPrincipal(concl.right, true, d.principalText,
                                        env, "hImpR", "right");
        out.principal = concl.right[i];
        if (d.premises.size() != 1) fail("hImpR takes one premise");
        HolSequent prem{concl.left,
                        d.keep ? concl.right : holSideWithout(concl.right, i)};
        holSideInsert(prem.left, out.principal->args[0]->args[1]);
        holSideInsert(prem.right, out.principal->args[1]);
        premiseSequents = {prem};
        premiseEnvs = {env};
      } else if (d.rule == "hForallL") {
        std::size_t i = selectPrincipal(concl.left, false, d.principalText,
                                        env, "hForallL", "left");
        out.principal = concl.left[i];
        if (d.premises.size() != 1) fail("hForallL takes one premise");
        if (d.witnessText.empty()) fail("hForallL needs :witness");
        HolEnv witnessEnv = env;
        HolTerm witness = parseHolTermString(sig, d.witnessText, witnessEnv);
        holTypeCheck(sig, witness);
        HolType beta = out.principal->args[0]->constType.args[0].args[0];
        if (!(witness->type == beta))
          fail("hForallL: witness has type " + witness->type.display() +
               ", the universal quantifies over " + beta.display());
        out.witness = witness;
        HolSequent prem{d.keep ? concl.left : holSideWithout(concl.left, i),
                        concl.right};
        holSideInsert(prem.left, prep(instance(out.principal, witness)));
        premiseSequents = {prem};
        premiseEnvs = {witnessEnv};
      } else if (d.rule == "hForallR") {
        std::size_t i = selectPrincipal(concl.right, false, d.principalText,
                                        env, "hForallR", "right");
        out.principal = concl.right[i];
        if (d.premises.size() != 1) fail("hForallR takes one premise");
        std::string name = d.unknownName;
        if (name.empty()) {
          for (int k = 0;; ++k) {
            name = "E" + (k ? std::to_string(k) : std::string());
            if (!env.count(name)) break;
          }
        } else if (env.count(name)) {
          fail("hForallR: eigenvariable name '" + name +
               "' is already declared");
        }
        HolType beta = out.principal->args[0]->constType.args[0].args[0];
        HolVar eigen{name, beta, false};
        HolSequent prem{concl.left,
                        d.keep ? concl.right : holSideWithout(concl.right, i)};
        auto freeHere = [&](const std::vector<HolTerm>& side) {
          for (const auto& p : side)
            for (const auto& v : p->fv)
              if (v.name == name)
                fail("hForallR: eigenvariable '" + name +
                     "' occurs free in the sequent");
        };
        freeHere(prem.left);
        freeHere(prem.right);
        out.eigen = eigen;
        holSideInsert(prem.right,
                      prep(instance(out.principal, mkHolVar(eigen))));
        HolEnv inner = env;
        inner.emplace(name, eigen);
        premiseSequents = {prem};
        premiseEnvs = {inner};
      } else {
        fail("unknown rule '" + d.rule + "' in a HOL derivation");
      }
    } catch (const PnlError& e) {
      return nodeFail(slot, e.what());
    }

    bool ok = true;
    for (std::size_t k = 0; k < premiseSequents.size(); ++k) {
      out.premises.emplace_back();
      if (!check(d.premises[k], premiseSequents[k], premiseEnvs[k],
                 out.premises.back(), path + "." + std::to_string(k)))
        ok = false;
    }
    return ok;
  }
};

}  // namespace detail

inline HolCheckReport checkHol(const HolSignature& sig, const HolEnv& env,
                               const HolSequent& goal, const Derivation& d,
                               bool moduloBeta) {
  HolCheckReport rep;
  detail::HolChecker checker{sig, moduloBeta, rep};
  HolSequent start;
  try {
    for (const auto& p : goal.left) {
      if (!(holTypeCheck(sig, p) == typeO()))
        fail("hypothesis " + displayHolTerm(p) + " is not of type o");
      holSideInsert(start.left, checker.prep(p));
    }
    for (const auto& p : goal.right) {
      if (!(holTypeCheck(sig, p) == typeO()))
        fail("conclusion " + displayHolTerm(p) + " is not of type o");
      holSideInsert(start.right, checker.prep(p));
    }
  } catch (const PnlError& e) {
    rep.ok = false;
    rep.firstError = std::string("goal: ") + e.what();
    return rep;
  }
  rep.ok = checker.check(d, start, env, rep.root, "0");
  return rep;
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

struct HolProblem {
  HolSignature sig;
  HolEnv env;
  HolSequent goal;
  Derivation proof;
};

inline HolProblem loadHolProblem(const std::string& path) {
  DerivationFile df = parseDerivationFileText(readTextFile(path));
  std::string dir;
  if (std::size_t cut = path.find_last_of('/'); cut != std::string::npos)
    dir = path.substr(0, cut + 1);
  if (df.uses.size() != 1)
    fail(path + ": a HOL problem names exactly one signature");
  HolProblem pr;
  pr.sig = parseHolSignature(readTextFile(dir + df.uses[0]));
  for (const auto& t : df.assumes)
    holSideInsert(pr.goal.left, parseHolTermString(pr.sig, t, pr.env));
  for (const auto& t : df.shows)
    holSideInsert(pr.goal.right, parseHolTermString(pr.sig, t, pr.env));
  pr.proof = df.proof;
  return pr;
}

}  // namespace pnl
