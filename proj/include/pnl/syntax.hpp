#pragma once

// Sorts, signatures, terms and propositions.
//
// Terms here are nominal: abstraction [a]r binds an atom, and unknowns X
// carry a permission set and occur under a suspended permutation pi*X.
// Substitution for unknowns is capturing on atoms by design; alpha-renaming
// of abstracted atoms and of quantified unknowns is the only identification.
//
// Everything is kept in a canonical form chosen so that alpha-equivalence
// is plain structural equality:
//   - an abstraction's binder is the first up atom not free in the body
//     (with the binder itself discounted);
//   - a suspension's permutation is the canonical completion of its
//     restriction to the permission set of its unknown;
//   - a quantifier's bound unknown is a reserved name "$k" where k is the
//     quantifier nesting depth of its body.
// Reserved names never appear in input files (the parser refuses them), so
// substitution can never capture.  Printers emit display names, and parsing
// a printed form reproduces the same canonical tree.

#include <algorithm>
#include <cassert>
#include <functional>
#include <memory>

#include "pnl/atoms.hpp"

namespace pnl {

// ---------------------------------------------------------------------------
// Sorts
// ---------------------------------------------------------------------------

// A sort is a name sort, a base sort, a tuple of sorts, or an
// atom-abstraction sort [nu]alpha whose binder position is always a name
// sort.
struct PnlSort {
  enum class Kind { Name, Base, Tuple, Abs };
  Kind kind = Kind::Base;
  std::string name;           // Name/Base: the sort; Abs: the bound name sort
  std::vector<PnlSort> args;  // Tuple: components; Abs: the single body sort

  static PnlSort nameSort(std::string n) {
    return PnlSort{Kind::Name, std::move(n), {}};
  }
  static PnlSort baseSort(std::string n) {
    return PnlSort{Kind::Base, std::move(n), {}};
  }
  static PnlSort tuple(std::vector<PnlSort> comps) {
    if (comps.size() == 1)
      fail("1-tuples are not a sort; parentheses only group");
    return PnlSort{Kind::Tuple, "", std::move(comps)};
  }
  static PnlSort abs(std::string boundNameSort, PnlSort body) {
    return PnlSort{Kind::Abs, std::move(boundNameSort), {std::move(body)}};
  }

  bool operator==(const PnlSort& o) const {
    return kind == o.kind && name == o.name && args == o.args;
  }
  bool operator<(const PnlSort& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (name != o.name) return name < o.name;
    return args < o.args;
  }

  std::string display() const {
    switch (kind) {
      case Kind::Name:
      case Kind::Base:
        return name;
      case Kind::Abs:
        return "[" + name + "]" + args[0].display();
      case Kind::Tuple: {
        std::string out = "(";
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (i) out += ",";
          out += args[i].display();
        }
        return out + ")";
      }
    }
    return "?";
  }
};

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

// Term-formers take one argument sort (tuple sorts give the n-ary surface
// syntax) and produce a base sort; proposition-formers just consume.
struct TermFormer {
  PnlSort domain;
  std::string result;  // a declared base sort
};

struct PropFormer {
  PnlSort domain;
};

struct PnlSignature {
  std::set<std::string> nameSorts;
  std::set<std::string> baseSorts;
  std::map<std::string, TermFormer> termFormers;
  std::map<std::string, PropFormer> propFormers;

  bool isNameSort(const std::string& s) const { return nameSorts.count(s) > 0; }
  bool isBaseSort(const std::string& s) const { return baseSorts.count(s) > 0; }

  std::vector<std::string> nameSortList() const {
    return {nameSorts.begin(), nameSorts.end()};
  }

  void checkSortFormed(const PnlSort& s) const {
    switch (s.kind) {
      case PnlSort::Kind::Name:
        if (!isNameSort(s.name)) fail("undeclared name sort " + s.name);
        return;
      case PnlSort::Kind::Base:
        if (!isBaseSort(s.name)) fail("undeclared base sort " + s.name);
        return;
      case PnlSort::Kind::Tuple:
        for (const PnlSort& c : s.args) checkSortFormed(c);
        return;
      case PnlSort::Kind::Abs:
        if (!isNameSort(s.name))
          fail("abstraction sort binds " + s.name + ", which is not a name sort");
        checkSortFormed(s.args[0]);
        return;
    }
  }

  void validate() const {
    for (const std::string& s : nameSorts)
      if (baseSorts.count(s))
        fail("sort " + s + " is declared both as a name sort and a base sort");
    for (const auto& [f, tf] : termFormers) {
      checkSortFormed(tf.domain);
      if (!isBaseSort(tf.result))
        fail("term-former " + f + " produces undeclared base sort " + tf.result);
    }
    for (const auto& [p, pf] : propFormers) checkSortFormed(pf.domain);
  }
};

// ---------------------------------------------------------------------------
// Unknowns
// ---------------------------------------------------------------------------

// An unknown is identified by name, sort and permission set together.  Names
// beginning with '$' are reserved for canonical bound unknowns.
struct Unknown {
  std::string name;
  PnlSort sort;
  PermissionSet pmss;

  bool operator==(const Unknown& o) const {
    return name == o.name && sort == o.sort && pmss == o.pmss;
  }
  bool operator<(const Unknown& o) const {
    if (name != o.name) return name < o.name;
    if (!(sort == o.sort)) return sort < o.sort;
    return pmss < o.pmss;
  }

  bool isCanonicalBound() const { return !name.empty() && name[0] == '$'; }

  std::string display() const { return name; }
  std::string displayAnnotated() const {
    return name + ":" + sort.display() + "#" + pmss.display();
  }
};

using UnknownSet = std::set<Unknown>;

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

struct TermNode;
using PnlTerm = std::shared_ptr<const TermNode>;

struct TermNode {
  enum class Kind { Atom, Tuple, App, Abs, Susp };
  Kind kind;

  // Per-kind payload (unused fields stay default).
  Atom atom;                  // Atom; Abs: the binder
  std::string former;         // App
  std::vector<PnlTerm> args;  // Tuple components; App: {argument}; Abs: {body}
  Permutation perm;           // Susp
  Unknown unk;                // Susp

  // Caches, filled at construction.
  PnlSort sort;
  AtomSetExpr fa;
  std::size_t hash = 0;
};

inline std::size_t hashCombine(std::size_t h, std::size_t k) {
  return h ^ (k + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}
inline std::size_t hashString(const std::string& s) {
  return std::hash<std::string>{}(s);
}

namespace detail {

inline std::size_t hashAtom(const Atom& a) {
  return hashCombine(hashString(a.sort), std::hash<std::int64_t>{}(a.index));
}

inline PnlTerm finishTerm(TermNode n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 1000003u;
  switch (n.kind) {
    case TermNode::Kind::Atom:
      h = hashCombine(h, hashAtom(n.atom));
      break;
    case TermNode::Kind::Tuple:
    case TermNode::Kind::App:
      h = hashCombine(h, hashString(n.former));
      for (const PnlTerm& t : n.args) h = hashCombine(h, t->hash);
      break;
    case TermNode::Kind::Abs:
      h = hashCombine(h, hashAtom(n.atom));
      h = hashCombine(h, n.args[0]->hash);
      break;
    case TermNode::Kind::Susp:
      h = hashCombine(h, hashString(n.unk.name));
      h = hashCombine(h, hashString(n.unk.sort.display()));
      h = hashCombine(h, hashString(n.unk.pmss.display()));
      h = hashCombine(h, hashString(n.perm.display()));
      break;
  }
  n.hash = h;
  return std::make_shared<const TermNode>(std::move(n));
}

}  // namespace detail

bool termEq(const PnlTerm& a, const PnlTerm& b);

// -- constructors -----------------------------------------------------------

inline PnlTerm mkAtomTerm(const Atom& a) {
  TermNode n;
  n.kind = TermNode::Kind::Atom;
  n.atom = a;
  n.sort = PnlSort::nameSort(a.sort);
  n.fa = AtomSetExpr::single(a);
  return detail::finishTerm(std::move(n));
}

inline PnlTerm mkTuple(std::vector<PnlTerm> comps) {
  if (comps.size() == 1) fail("1-tuples are not terms; parentheses only group");
  TermNode n;
  n.kind = TermNode::Kind::Tuple;
  std::vector<PnlSort> sorts;
  for (const PnlTerm& t : comps) {
    sorts.push_back(t->sort);
    n.fa = unionSets(n.fa, t->fa);
  }
  n.sort = PnlSort::tuple(std::move(sorts));
  n.args = std::move(comps);
  return detail::finishTerm(std::move(n));
}

// Unchecked rebuild used by the actions; the checked front door is mkApp.
inline PnlTerm mkAppRaw(std::string former, std::string resultSort, PnlTerm arg) {
  TermNode n;
  n.kind = TermNode::Kind::App;
  n.former = std::move(former);
  n.sort = PnlSort::baseSort(std::move(resultSort));
  n.fa = arg->fa;
  n.args = {std::move(arg)};
  return detail::finishTerm(std::move(n));
}

inline PnlTerm mkApp(const PnlSignature& sig, const std::string& former,
                     PnlTerm arg) {
  auto it = sig.termFormers.find(former);
  if (it == sig.termFormers.end()) fail("unknown term-former " + former);
  if (!(arg->sort == it->second.domain))
    fail("term-former " + former + " expects " + it->second.domain.display() +
         " but got " + arg->sort.display());
  return mkAppRaw(former, it->second.result, std::move(arg));
}

PnlTerm permActTerm(const Permutation& p, const PnlTerm& t);

// [a]r, canonicalized: the stored binder is the first up atom that is not
// free in the body once the abstracted atom itself is discounted.
inline PnlTerm mkAbs(const Atom& binder, PnlTerm body) {
  AtomSetExpr avoid = minusAtom(body->fa, binder);
  Atom c = freshAtom(binder.sort, avoid, false);
  if (c != binder) body = permActTerm(makeSwap(c, binder), body);
  TermNode n;
  n.kind = TermNode::Kind::Abs;
  n.atom = c;
  n.sort = PnlSort::abs(binder.sort, body->sort);
  n.fa = minusAtom(body->fa, c);
  n.args = {std::move(body)};
  return detail::finishTerm(std::move(n));
}

// pi*X, canonicalized: pi is restricted to the moved atoms inside pmss(X)
// and that partial injection is completed deterministically (per sort, the
// orphaned images are matched onto the orphaned preimages in ascending
// order).  Two suspensions are alpha-equivalent exactly when their
// permutations agree on the permission set, and that holds exactly when the
// completions coincide.
inline PnlTerm mkSusp(const Permutation& p, Unknown x) {
  std::map<Atom, Atom> kept;
  for (const auto& [a, b] : p.entries)
    if (x.pmss.contains(a)) kept[a] = b;
  AtomSet dom, img;
  for (const auto& [a, b] : kept) {
    dom.insert(a);
    img.insert(b);
  }
  std::map<std::string, std::vector<Atom>> orphanImg, orphanDom;
  for (const Atom& b : img)
    if (!dom.count(b)) orphanImg[b.sort].push_back(b);
  for (const Atom& a : dom)
    if (!img.count(a)) orphanDom[a.sort].push_back(a);
  for (auto& [s, lhs] : orphanImg) {
    auto& rhs = orphanDom[s];
    assert(lhs.size() == rhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) kept[lhs[i]] = rhs[i];
  }
  TermNode n;
  n.kind = TermNode::Kind::Susp;
  n.perm = Permutation::fromEntries(std::move(kept));
  n.fa = permApplySet(n.perm, x.pmss);
  n.sort = x.sort;
  n.unk = std::move(x);
  return detail::finishTerm(std::move(n));
}

inline PnlTerm mkUnknownTerm(Unknown x) { return mkSusp(Permutation{}, std::move(x)); }

// -- equality (canonical forms make this alpha-equivalence) -----------------

inline bool termEq(const PnlTerm& a, const PnlTerm& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->kind != b->kind) return false;
  switch (a->kind) {
    case TermNode::Kind::Atom:
      return a->atom == b->atom;
    case TermNode::Kind::Tuple:
    case TermNode::Kind::App: {
      if (a->former != b->former || a->args.size() != b->args.size())
        return false;
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!termEq(a->args[i], b->args[i])) return false;
      return true;
    }
    case TermNode::Kind::Abs:
      return a->atom == b->atom && termEq(a->args[0], b->args[0]);
    case TermNode::Kind::Susp:
      return a->perm == b->perm && a->unk == b->unk;
  }
  return false;
}

inline bool alphaEq(const PnlTerm& a, const PnlTerm& b) { return termEq(a, b); }

// -- level-1 action ---------------------------------------------------------

inline PnlTerm permActTerm(const Permutation& p, const PnlTerm& t) {
  if (p.isIdentity()) return t;
  switch (t->kind) {
    case TermNode::Kind::Atom:
      return mkAtomTerm(p(t->atom));
    case TermNode::Kind::Tuple: {
      std::vector<PnlTerm> comps;
      for (const PnlTerm& c : t->args) comps.push_back(permActTerm(p, c));
      return mkTuple(std::move(comps));
    }
    case TermNode::Kind::App:
      return mkAppRaw(t->former, t->sort.name, permActTerm(p, t->args[0]));
    case TermNode::Kind::Abs:
      return mkAbs(p(t->atom), permActTerm(p, t->args[0]));
    case TermNode::Kind::Susp:
      return mkSusp(composePerm(p, t->perm), t->unk);
  }
  fail("unreachable term kind");
}

inline AtomSetExpr freeAtoms(const PnlTerm& t) { return t->fa; }

inline UnknownSet freeUnknowns(const PnlTerm& t) {
  UnknownSet out;
  switch (t->kind) {
    case TermNode::Kind::Susp:
      out.insert(t->unk);
      break;
    case TermNode::Kind::Atom:
      break;
    default:
      for (const PnlTerm& c : t->args) {
        UnknownSet sub = freeUnknowns(c);
        out.insert(sub.begin(), sub.end());
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Propositions
// ---------------------------------------------------------------------------

struct PropNode;
using PnlProp = std::shared_ptr<const PropNode>;

struct PropNode {
  enum class Kind { Bot, Imp, Pred, Forall };
  Kind kind;

  std::string former;         // Pred
  PnlTerm arg;                // Pred
  std::vector<PnlProp> sub;   // Imp: {lhs, rhs}; Forall: {body}
  Unknown binder;             // Forall (canonical "$k")

  // Caches.
  AtomSetExpr fa;
  UnknownSet fU;
  int qdepth = 0;  // one above the highest bound-unknown index inside
  std::size_t hash = 0;
};

namespace detail {

inline PnlProp finishProp(PropNode n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 2000029u;
  switch (n.kind) {
    case PropNode::Kind::Bot:
      break;
    case PropNode::Kind::Pred:
      h = hashCombine(h, hashString(n.former));
      h = hashCombine(h, n.arg->hash);
      break;
    case PropNode::Kind::Imp:
      h = hashCombine(h, n.sub[0]->hash);
      h = hashCombine(h, n.sub[1]->hash);
      break;
    case PropNode::Kind::Forall:
      h = hashCombine(h, hashString(n.binder.sort.display()));
      h = hashCombine(h, hashString(n.binder.pmss.display()));
      h = hashCombine(h, n.sub[0]->hash);
      break;
  }
  n.hash = h;
  return std::make_shared<const PropNode>(std::move(n));
}

}  // namespace detail

inline PnlProp mkBot() {
  PropNode n;
  n.kind = PropNode::Kind::Bot;
  return detail::finishProp(std::move(n));
}

inline PnlProp mkImp(PnlProp lhs, PnlProp rhs) {
  PropNode n;
  n.kind = PropNode::Kind::Imp;
  n.fa = unionSets(lhs->fa, rhs->fa);
  n.fU = lhs->fU;
  n.fU.insert(rhs->fU.begin(), rhs->fU.end());
  n.qdepth = std::max(lhs->qdepth, rhs->qdepth);
  n.sub = {std::move(lhs), std::move(rhs)};
  return detail::finishProp(std::move(n));
}

inline PnlProp mkPredRaw(std::string former, PnlTerm arg) {
  PropNode n;
  n.kind = PropNode::Kind::Pred;
  n.former = std::move(former);
  n.fa = arg->fa;
  n.fU = freeUnknowns(arg);
  n.arg = std::move(arg);
  return detail::finishProp(std::move(n));
}

inline PnlProp mkPred(const PnlSignature& sig, const std::string& former,
                      PnlTerm arg) {
  auto it = sig.propFormers.find(former);
  if (it == sig.propFormers.end()) fail("unknown proposition-former " + former);
  if (!(arg->sort == it->second.domain))
    fail("proposition-former " + former + " expects " +
         it->second.domain.display() + " but got " + arg->sort.display());
  return mkPredRaw(former, std::move(arg));
}

namespace detail {

// Replace every free suspension of `from` by the same suspension of `to`.
// Only used for bound-unknown renaming, where capture is impossible because
// canonical bound names are reserved.
inline PnlTerm renameUnknownTerm(const PnlTerm& t, const Unknown& from,
                                 const Unknown& to) {
  switch (t->kind) {
    case TermNode::Kind::Atom:
      return t;
    case TermNode::Kind::Susp:
      return t->unk == from ? mkSusp(t->perm, to) : t;
    case TermNode::Kind::Tuple: {
      std::vector<PnlTerm> comps;
      for (const PnlTerm& c : t->args)
        comps.push_back(renameUnknownTerm(c, from, to));
      return mkTuple(std::move(comps));
    }
    case TermNode::Kind::App:
      return mkAppRaw(t->former, t->sort.name,
                      renameUnknownTerm(t->args[0], from, to));
    case TermNode::Kind::Abs: {
      TermNode n = *t;  // binder and caches unaffected: fa is unchanged
      n.args = {renameUnknownTerm(t->args[0], from, to)};
      return finishTerm(std::move(n));
    }
  }
  fail("unreachable term kind");
}

inline PnlProp renameUnknownProp(const PnlProp& p, const Unknown& from,
                                 const Unknown& to) {
  switch (p->kind) {
    case PropNode::Kind::Bot:
      return p;
    case PropNode::Kind::Pred:
      return mkPredRaw(p->former, renameUnknownTerm(p->arg, from, to));
    case PropNode::Kind::Imp:
      return mkImp(renameUnknownProp(p->sub[0], from, to),
                   renameUnknownProp(p->sub[1], from, to));
    case PropNode::Kind::Forall: {
      if (p->binder == from) return p;  // shadowed (cannot occur for "$" names)
      PropNode n = *p;
      n.sub = {renameUnknownProp(p->sub[0], from, to)};
      n.fa = n.sub[0]->fa;
      n.fU = n.sub[0]->fU;
      n.fU.erase(n.binder);
      return finishProp(std::move(n));
    }
  }
  fail("unreachable prop kind");
}

}  // namespace detail

// forall X. body, canonicalized: the stored bound unknown is "$k" with k the
// quantifier depth of the body, so nested binders get distinct indices and
// alpha-equivalent quantifications coincide structurally.
inline PnlProp mkForall(const Unknown& x, PnlProp body) {
  int k = body->qdepth;
  Unknown bound{"$" + std::to_string(k), x.sort, x.pmss};
  if (!(x == bound)) body = detail::renameUnknownProp(body, x, bound);
  PropNode n;
  n.kind = PropNode::Kind::Forall;
  n.fa = body->fa;
  n.fU = body->fU;
  n.fU.erase(bound);
  n.qdepth = k + 1;
  n.binder = std::move(bound);
  n.sub = {std::move(body)};
  return detail::finishProp(std::move(n));
}

inline bool propEq(const PnlProp& a, const PnlProp& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->kind != b->kind) return false;
  switch (a->kind) {
    case PropNode::Kind::Bot:
      return true;
    case PropNode::Kind::Pred:
      return a->former == b->former && termEq(a->arg, b->arg);
    case PropNode::Kind::Imp:
      return propEq(a->sub[0], b->sub[0]) && propEq(a->sub[1], b->sub[1]);
    case PropNode::Kind::Forall:
      return a->binder == b->binder && propEq(a->sub[0], b->sub[0]);
  }
  return false;
}

inline bool alphaEqProp(const PnlProp& a, const PnlProp& b) {
  return propEq(a, b);
}

inline AtomSetExpr freeAtomsProp(const PnlProp& p) { return p->fa; }
inline const UnknownSet& freeUnknownsProp(const PnlProp& p) { return p->fU; }

// Level-1 action on propositions: homomorphic, and the quantifier's bound
// unknown is left alone (suspensions inside the body absorb the
// permutation).
inline PnlProp permActProp(const Permutation& p, const PnlProp& phi) {
  if (p.isIdentity()) return phi;
  switch (phi->kind) {
    case PropNode::Kind::Bot:
      return phi;
    case PropNode::Kind::Pred:
      return mkPredRaw(phi->former, permActTerm(p, phi->arg));
    case PropNode::Kind::Imp:
      return mkImp(permActProp(p, phi->sub[0]), permActProp(p, phi->sub[1]));
    case PropNode::Kind::Forall: {
      PropNode n = *phi;
      n.sub = {permActProp(p, phi->sub[0])};
      n.fa = n.sub[0]->fa;
      return detail::finishProp(std::move(n));
    }
  }
  fail("unreachable prop kind");
}

// ---------------------------------------------------------------------------
// Level-2 permutations
// ---------------------------------------------------------------------------

// A finite bijection on unknowns preserving sort and permission set.  It
// renames quantified unknowns as it passes them, which is vacuous here: the
// canonical bound names are reserved and may not appear in the mapping.
struct Level2Perm {
  std::map<Unknown, Unknown> entries;

  static Level2Perm fromEntries(std::map<Unknown, Unknown> m) {
    Level2Perm p;
    std::set<Unknown> image;
    for (auto it = m.begin(); it != m.end();) {
      if (it->first == it->second) {
        it = m.erase(it);
        continue;
      }
      if (it->first.isCanonicalBound() || it->second.isCanonicalBound())
        fail("level-2 permutation may not move reserved bound unknowns");
      if (!(it->first.sort == it->second.sort))
        fail("level-2 permutation moves " + it->first.name + " across sorts");
      if (!(it->first.pmss == it->second.pmss))
        fail("level-2 permutation moves " + it->first.name +
             " across permission sets");
      if (!image.insert(it->second).second)
        fail("level-2 permutation is not injective at " + it->second.name);
      ++it;
    }
    for (const auto& [k, v] : m)
      if (!m.count(v))
        fail("level-2 permutation domain does not cover " + v.name);
    p.entries = std::move(m);
    return p;
  }

  Unknown operator()(const Unknown& x) const {
    auto it = entries.find(x);
    return it == entries.end() ? x : it->second;
  }
};

inline Level2Perm makeSwapUnknowns(const Unknown& x, const Unknown& y) {
  if (x == y) return Level2Perm{};
  return Level2Perm::fromEntries({{x, y}, {y, x}});
}

inline PnlTerm permActLevel2Term(const Level2Perm& p, const PnlTerm& t) {
  switch (t->kind) {
    case TermNode::Kind::Atom:
      return t;
    case TermNode::Kind::Susp:
      return mkSusp(t->perm, p(t->unk));
    case TermNode::Kind::Tuple: {
      std::vector<PnlTerm> comps;
      for (const PnlTerm& c : t->args) comps.push_back(permActLevel2Term(p, c));
      return mkTuple(std::move(comps));
    }
    case TermNode::Kind::App:
      return mkAppRaw(t->former, t->sort.name, permActLevel2Term(p, t->args[0]));
    case TermNode::Kind::Abs:
      return mkAbs(t->atom, permActLevel2Term(p, t->args[0]));
  }
  fail("unreachable term kind");
}

inline PnlProp permActLevel2(const Level2Perm& p, const PnlProp& phi) {
  switch (phi->kind) {
    case PropNode::Kind::Bot:
      return phi;
    case PropNode::Kind::Pred:
      return mkPredRaw(phi->former, permActLevel2Term(p, phi->arg));
    case PropNode::Kind::Imp:
      return mkImp(permActLevel2(p, phi->sub[0]), permActLevel2(p, phi->sub[1]));
    case PropNode::Kind::Forall: {
      PropNode n = *phi;
      n.sub = {permActLevel2(p, phi->sub[0])};
      n.fU = n.sub[0]->fU;
      n.fU.erase(n.binder);
      return detail::finishProp(std::move(n));
    }
  }
  fail("unreachable prop kind");
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

// A sort- and permission-respecting map from unknowns to terms.  The action
// on suspensions applies the suspended permutation to the image — capturing
// atoms is the intended behaviour: ([a]X)[X:=a] is [a]a.
struct PnlSubst {
  std::map<Unknown, PnlTerm> map;

  void add(const Unknown& x, PnlTerm r) {
    if (x.isCanonicalBound())
      fail("substitution domain may not contain reserved bound unknowns");
    if (!(r->sort == x.sort))
      fail("substitution for " + x.name + " has sort " + r->sort.display() +
           ", expected " + x.sort.display());
    if (auto w = subsetWitness(r->fa, x.pmss))
      fail("substitution for " + x.name + " mentions atom " + w->display() +
           " outside its permission set " + x.pmss.display());
    for (const Unknown& y : freeUnknowns(r))
      if (y.isCanonicalBound())
        fail("substitution image for " + x.name +
             " contains a reserved bound unknown");
    map[x] = std::move(r);
  }
};

inline PnlSubst mkPointSubst(const Unknown& x, PnlTerm r) {
  PnlSubst s;
  s.add(x, std::move(r));
  return s;
}

inline PnlTerm applySubst(const PnlSubst& s, const PnlTerm& t) {
  switch (t->kind) {
    case TermNode::Kind::Atom:
      return t;
    case TermNode::Kind::Susp: {
      auto it = s.map.find(t->unk);
      if (it == s.map.end()) return t;
      return permActTerm(t->perm, it->second);
    }
    case TermNode::Kind::Tuple: {
      std::vector<PnlTerm> comps;
      for (const PnlTerm& c : t->args) comps.push_back(applySubst(s, c));
      return mkTuple(std::move(comps));
    }
    case TermNode::Kind::App:
      return mkAppRaw(t->former, t->sort.name, applySubst(s, t->args[0]));
    case TermNode::Kind::Abs:
      return mkAbs(t->atom, applySubst(s, t->args[0]));
  }
  fail("unreachable term kind");
}

inline PnlProp applySubstProp(const PnlSubst& s, const PnlProp& phi) {
  switch (phi->kind) {
    case PropNode::Kind::Bot:
      return phi;
    case PropNode::Kind::Pred:
      return mkPredRaw(phi->former, applySubst(s, phi->arg));
    case PropNode::Kind::Imp:
      return mkImp(applySubstProp(s, phi->sub[0]),
                   applySubstProp(s, phi->sub[1]));
    case PropNode::Kind::Forall: {
      // The canonical bound unknown cannot be in the domain nor free in any
      // image (both rejected at construction), so no side condition bites.
      PropNode n = *phi;
      n.sub = {applySubstProp(s, phi->sub[0])};
      n.fa = n.sub[0]->fa;
      n.fU = n.sub[0]->fU;
      n.fU.erase(n.binder);
      return detail::finishProp(std::move(n));
    }
  }
  fail("unreachable prop kind");
}

// Instantiate one quantifier body: body[$k := r], with the permission-set
// and sort side conditions of mkPointSubst.
inline PnlProp instantiateBody(const Unknown& binder, const PnlProp& body,
                               PnlTerm r) {
  if (!(r->sort == binder.sort))
    fail("witness has sort " + r->sort.display() + ", expected " +
         binder.sort.display());
  if (auto w = subsetWitness(r->fa, binder.pmss))
    fail("witness mentions atom " + w->display() +
         " outside the bound unknown's permission set " +
         binder.pmss.display());
  PnlSubst s;
  s.map[binder] = std::move(r);  // bypasses the reserved-name guard on purpose
  return applySubstProp(s, body);
}

// ---------------------------------------------------------------------------
// Sort checking
// ---------------------------------------------------------------------------

// Re-derives the sort of a term bottom-up against a signature, ignoring the
// constructors' caches.  Used to validate parsed or transformed trees.
inline PnlSort sortCheck(const PnlSignature& sig, const PnlTerm& t) {
  switch (t->kind) {
    case TermNode::Kind::Atom: {
      if (!sig.isNameSort(t->atom.sort))
        fail("atom " + t->atom.display() + " has undeclared sort");
      return PnlSort::nameSort(t->atom.sort);
    }
    case TermNode::Kind::Tuple: {
      std::vector<PnlSort> comps;
      for (const PnlTerm& c : t->args) comps.push_back(sortCheck(sig, c));
      return PnlSort::tuple(std::move(comps));
    }
    case TermNode::Kind::App: {
      auto it = sig.termFormers.find(t->former);
      if (it == sig.termFormers.end()) fail("unknown term-former " + t->former);
      PnlSort got = sortCheck(sig, t->args[0]);
      if (!(got == it->second.domain))
        fail("term-former " + t->former + " expects " +
             it->second.domain.display() + " but got " + got.display());
      return PnlSort::baseSort(it->second.result);
    }
    case TermNode::Kind::Abs: {
      if (!sig.isNameSort(t->atom.sort))
        fail("abstracted atom " + t->atom.display() + " has undeclared sort");
      return PnlSort::abs(t->atom.sort, sortCheck(sig, t->args[0]));
    }
    case TermNode::Kind::Susp: {
      sig.checkSortFormed(t->unk.sort);
      for (const Atom& a : t->unk.pmss.extras)
        if (!sig.isNameSort(a.sort))
          fail("permission set of " + t->unk.name + " mentions atom " +
               a.display() + " of undeclared sort");
      for (const Atom& a : t->unk.pmss.excludedDown)
        if (!sig.isNameSort(a.sort))
          fail("permission set of " + t->unk.name + " mentions atom " +
               a.display() + " of undeclared sort");
      for (const auto& [k, v] : t->perm.entries)
        if (!sig.isNameSort(k.sort))
          fail("suspension on " + t->unk.name + " moves atom " + k.display() +
               " of undeclared sort");
      return t->unk.sort;
    }
  }
  fail("unreachable term kind");
}

inline void sortCheckProp(const PnlSignature& sig, const PnlProp& phi) {
  switch (phi->kind) {
    case PropNode::Kind::Bot:
      return;
    case PropNode::Kind::Pred: {
      auto it = sig.propFormers.find(phi->former);
      if (it == sig.propFormers.end())
        fail("unknown proposition-former " + phi->former);
      PnlSort got = sortCheck(sig, phi->arg);
      if (!(got == it->second.domain))
        fail("proposition-former " + phi->former + " expects " +
             it->second.domain.display() + " but got " + got.display());
      return;
    }
    case PropNode::Kind::Imp:
      sortCheckProp(sig, phi->sub[0]);
      sortCheckProp(sig, phi->sub[1]);
      return;
    case PropNode::Kind::Forall:
      sig.checkSortFormed(phi->binder.sort);
      sortCheckProp(sig, phi->sub[0]);
      return;
  }
}

// ---------------------------------------------------------------------------
// Display
// ---------------------------------------------------------------------------

namespace detail {

struct Printer {
  // Canonical bound unknowns print as display names chosen to dodge the
  // free unknowns in scope; free unknowns are annotated with sort and
  // permission set at their first occurrence.
  std::set<std::string> taken;
  std::map<std::string, std::string> boundNames;  // "$k" -> display name
  std::set<std::string> annotated;

  std::string unknownOcc(const Unknown& u) {
    if (u.isCanonicalBound()) {
      auto it = boundNames.find(u.name);
      return it == boundNames.end() ? u.name : it->second;
    }
    if (annotated.insert(u.name).second) return u.displayAnnotated();
    return u.name;
  }

  std::string term(const PnlTerm& t) {
    switch (t->kind) {
      case TermNode::Kind::Atom:
        return t->atom.display();
      case TermNode::Kind::Tuple: {
        std::string out = "(";
        for (std::size_t i = 0; i < t->args.size(); ++i) {
          if (i) out += ", ";
          out += term(t->args[i]);
        }
        return out + ")";
      }
      case TermNode::Kind::App: {
        const PnlTerm& a = t->args[0];
        if (a->kind == TermNode::Kind::Tuple) {
          std::string out = t->former + "(";
          for (std::size_t i = 0; i < a->args.size(); ++i) {
            if (i) out += ", ";
            out += term(a->args[i]);
          }
          return out + ")";
        }
        return t->former + "(" + term(a) + ")";
      }
      case TermNode::Kind::Abs:
        return "[" + t->atom.display() + "] " + term(t->args[0]);
      case TermNode::Kind::Susp: {
        std::string occ = unknownOcc(t->unk);
        if (t->perm.isIdentity()) return occ;
        return t->perm.display() + "*" + occ;
      }
    }
    return "?";
  }

  // prec 0: whole proposition (forall reaches right); 1: implication
  // operands; 2: atoms.
  std::string prop(const PnlProp& p, int prec) {
    switch (p->kind) {
      case PropNode::Kind::Bot:
        return "bot";
      case PropNode::Kind::Pred: {
        const PnlTerm& a = p->arg;
        if (a->kind == TermNode::Kind::Tuple) {
          std::string out = p->former + "(";
          for (std::size_t i = 0; i < a->args.size(); ++i) {
            if (i) out += ", ";
            out += term(a->args[i]);
          }
          return out + ")";
        }
        return p->former + "(" + term(a) + ")";
      }
      case PropNode::Kind::Imp: {
        std::string s = prop(p->sub[0], 2) + " => " + prop(p->sub[1], 1);
        return prec >= 2 ? "(" + s + ")" : s;
      }
      case PropNode::Kind::Forall: {
        std::string base = "X" + p->binder.name.substr(1);
        std::string name = base;
        while (taken.count(name)) name += "_";
        taken.insert(name);
        auto saved = boundNames;
        boundNames[p->binder.name] = name;
        Unknown display{name, p->binder.sort, p->binder.pmss};
        std::string s =
            "forall " + display.displayAnnotated() + ". " + prop(p->sub[0], 0);
        boundNames = saved;
        taken.erase(name);
        return prec >= 1 ? "(" + s + ")" : s;
      }
    }
    return "?";
  }
};

}  // namespace detail

inline std::string displayTerm(const PnlTerm& t) {
  detail::Printer pr;
  return pr.term(t);
}

inline std::string displayProp(const PnlProp& p) {
  detail::Printer pr;
  for (const Unknown& u : p->fU) pr.taken.insert(u.name);
  return pr.prop(p, 0);
}

}  // namespace pnl
