#pragma once

// Renaming-set semantics over Herbrand carriers.  Ground values carry the
// permutation action and a computed support; renaming-value pairs, quotiented
// by "only the support matters" and "permutations may move between the
// renaming and the value", form the free extension from permutation sets to
// renaming sets, stored here in a canonical form that makes class equality
// structural.  On top of that live atoms-abstraction as graph and as total
// function, the natural maps between the two worlds, interpretations and
// valuations for both term languages, and the two denotation paths whose
// agreement the translation is designed to preserve.

#include "translate.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <utility>

namespace pnl {

// Renamings themselves (sort-preserving, finitely supported, not necessarily
// injective) live in atoms.hpp alongside permutations; this module adds the
// carriers they act on.

// Restriction of a renaming to maplets whose source lies in `keep`.
inline Renaming restrictRen(const Renaming& r, const AtomSet& keep) {
  std::map<Atom, Atom> m;
  for (const auto& [k, v] : r.entries)
    if (keep.count(k)) m[k] = v;
  return Renaming::fromEntries(std::move(m));
}

// First up atom of the sort outside `avoid` — the deterministic fresh supply
// shared by canonical binders, relabelings and evaluation.
inline Atom freshUpAtom(const std::string& sort, const AtomSet& avoid) {
  for (std::int64_t k = 0;; ++k) {
    Atom a{sort, k};
    if (!avoid.count(a)) return a;
  }
}

// ---------------------------------------------------------------------------
// Ground values
// ---------------------------------------------------------------------------

// Elements of the Herbrand carriers: atoms, tuples, abstractions, free
// constructor applications, and truth values.  Abstractions are stored with a
// canonical binder (the first up atom not free in the body once the binder is
// discounted), so structural equality decides the abstraction equality law —
// the same convention the term language uses.
struct ValueNode;
using GroundValue = std::shared_ptr<const ValueNode>;

struct ValueNode {
  enum class Kind { Atom, Tuple, Abs, Con, Bool };
  Kind kind;

  Atom atom;                      // Atom; Abs: the binder
  std::vector<GroundValue> args;  // Tuple components; Abs {body}; Con {argument}
  std::string con;                // Con: the term-former
  int truth = 0;                  // Bool

  AtomSet supp;                   // computed at construction
};

inline const AtomSet& valueSupp(const GroundValue& v) { return v->supp; }

inline GroundValue mkVAtom(const Atom& a) {
  ValueNode n;
  n.kind = ValueNode::Kind::Atom;
  n.atom = a;
  n.supp = {a};
  return std::make_shared<ValueNode>(std::move(n));
}

inline GroundValue mkVBool(int b) {
  ValueNode n;
  n.kind = ValueNode::Kind::Bool;
  n.truth = b ? 1 : 0;
  return std::make_shared<ValueNode>(std::move(n));
}

inline GroundValue mkVTuple(std::vector<GroundValue> comps) {
  if (comps.size() < 2) fail("a tuple value needs at least two components");
  ValueNode n;
  n.kind = ValueNode::Kind::Tuple;
  for (const auto& c : comps) n.supp.insert(c->supp.begin(), c->supp.end());
  n.args = std::move(comps);
  return std::make_shared<ValueNode>(std::move(n));
}

inline GroundValue mkVCon(std::string former, GroundValue arg) {
  if (former.empty()) fail("constructor values need a former name");
  ValueNode n;
  n.kind = ValueNode::Kind::Con;
  n.con = std::move(former);
  n.supp = arg->supp;
  n.args = {std::move(arg)};
  return std::make_shared<ValueNode>(std::move(n));
}

inline GroundValue permActValue(const Permutation& p, const GroundValue& v);

inline GroundValue mkVAbs(const Atom& binder, GroundValue body) {
  AtomSet rest = body->supp;
  rest.erase(binder);
  Atom canon = freshUpAtom(binder.sort, rest);
  if (!(canon == binder))
    body = permActValue(makeSwap(canon, binder), body);
  ValueNode n;
  n.kind = ValueNode::Kind::Abs;
  n.atom = canon;
  n.supp = std::move(rest);
  n.args = {std::move(body)};
  return std::make_shared<ValueNode>(std::move(n));
}

inline GroundValue permActValue(const Permutation& p, const GroundValue& v) {
  if (p.isIdentity()) return v;
  switch (v->kind) {
    case ValueNode::Kind::Atom:
      return mkVAtom(p(v->atom));
    case ValueNode::Kind::Bool:
      return v;
    case ValueNode::Kind::Tuple: {
      std::vector<GroundValue> comps;
      comps.reserve(v->args.size());
      for (const auto& c : v->args) comps.push_back(permActValue(p, c));
      return mkVTuple(std::move(comps));
    }
    case ValueNode::Kind::Con:
      return mkVCon(v->con, permActValue(p, v->args[0]));
    case ValueNode::Kind::Abs:
      return mkVAbs(p(v->atom), permActValue(p, v->args[0]));
  }
  fail("unreachable value kind");
}

inline bool valueEq(const GroundValue& a, const GroundValue& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ValueNode::Kind::Atom:
      return a->atom == b->atom;
    case ValueNode::Kind::Bool:
      return a->truth == b->truth;
    case ValueNode::Kind::Con:
      if (a->con != b->con) return false;
      break;
    case ValueNode::Kind::Abs:
      if (!(a->atom == b->atom)) return false;
      break;
    case ValueNode::Kind::Tuple:
      break;
  }
  if (a->args.size() != b->args.size()) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!valueEq(a->args[i], b->args[i])) return false;
  return true;
}

// The abstraction equality law, spelled out: [a]u and [a']u' are equal when
// a' is not free in u and swapping a' for a in u gives u'.  On canonically
// stored abstractions this coincides with structural equality; the law form
// is what the graph-comparison oracle checks against.
inline bool absEq(const GroundValue& x, const GroundValue& y) {
  if (x->kind != ValueNode::Kind::Abs || y->kind != ValueNode::Kind::Abs)
    fail("abstraction equality applies to abstraction values only");
  const Atom& a = x->atom;
  const Atom& ap = y->atom;
  if (a == ap) return valueEq(x->args[0], y->args[0]);
  if (a.sort != ap.sort) return false;
  if (x->args[0]->supp.count(ap)) return false;
  return valueEq(permActValue(makeSwap(ap, a), x->args[0]), y->args[0]);
}

inline std::string displayValue(const GroundValue& v) {
  switch (v->kind) {
    case ValueNode::Kind::Atom:
      return v->atom.display();
    case ValueNode::Kind::Bool:
      return v->truth ? "1" : "0";
    case ValueNode::Kind::Tuple: {
      std::string out = "(";
      for (std::size_t i = 0; i < v->args.size(); ++i) {
        if (i) out += ", ";
        out += displayValue(v->args[i]);
      }
      return out + ")";
    }
    case ValueNode::Kind::Abs:
      return "[" + v->atom.display() + "]" + displayValue(v->args[0]);
    case ValueNode::Kind::Con: {
      const GroundValue& arg = v->args[0];
      if (arg->kind == ValueNode::Kind::Tuple) {
        std::string out = v->con + "(";
        for (std::size_t i = 0; i < arg->args.size(); ++i) {
          if (i) out += ", ";
          out += displayValue(arg->args[i]);
        }
        return out + ")";
      }
      return v->con + "(" + displayValue(arg) + ")";
    }
  }
  fail("unreachable value kind");
}

// ---------------------------------------------------------------------------
// Value and renaming text syntax
// ---------------------------------------------------------------------------

namespace detail {

// A minimal cursor over the value/renaming surface syntax; ground values
// reuse the term syntax shapes (atoms, tuples, abstractions, former
// applications) plus the two truth literals.
struct ValueCursor {
  const std::string& text;
  std::size_t pos = 0;

  explicit ValueCursor(const std::string& t) : text(t) {}

  void ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool eat(const std::string& tok) {
    ws();
    if (text.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }

  void expect(const std::string& tok) {
    if (!eat(tok))
      fail("expected '" + tok + "' at position " + std::to_string(pos) +
           " in \"" + text + "\"");
  }

  bool atEnd() {
    ws();
    return pos >= text.size();
  }

  std::string ident() {
    ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_'))
      ++pos;
    if (start == pos)
      fail("expected a name at position " + std::to_string(pos) + " in \"" +
           text + "\"");
    return text.substr(start, pos - start);
  }

  Atom atom() {
    std::string sort = ident();
    expect("#");
    ws();
    std::size_t start = pos;
    if (pos < text.size() && text[pos] == '-') ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (start == pos || (text[start] == '-' && pos == start + 1))
      fail("expected an atom index after '" + sort + "#' in \"" + text + "\"");
    return Atom{std::move(sort), std::stoll(text.substr(start, pos - start))};
  }

  GroundValue value() {
    ws();
    if (pos >= text.size()) fail("expected a value in \"" + text + "\"");
    char c = text[pos];
    if (c == '[') {
      ++pos;
      Atom binder = atom();
      expect("]");
      return mkVAbs(binder, value());
    }
    if (c == '(') {
      ++pos;
      std::vector<GroundValue> comps{value()};
      while (eat(",")) comps.push_back(value());
      expect(")");
      if (comps.size() < 2)
        fail("parenthesised values are tuples and need two components");
      return mkVTuple(std::move(comps));
    }
    std::string name = ident();
    if ((name == "0" || name == "1") && !eat("#")) return mkVBool(name == "1");
    if (eat("#")) {
      // Re-read the index; eat consumed only the marker.
      ws();
      std::size_t start = pos;
      if (pos < text.size() && text[pos] == '-') ++pos;
      while (pos < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[pos])))
        ++pos;
      if (start == pos)
        fail("expected an atom index after '" + name + "#' in \"" + text + "\"");
      return mkVAtom(Atom{name, std::stoll(text.substr(start, pos - start))});
    }
    expect("(");
    std::vector<GroundValue> args{value()};
    while (eat(",")) args.push_back(value());
    expect(")");
    GroundValue arg =
        args.size() == 1 ? args[0] : mkVTuple(std::move(args));
    return mkVCon(name, std::move(arg));
  }

  Renaming renaming() {
    expect("[");
    if (eat("]")) return Renaming{};
    std::map<Atom, Atom> m;
    do {
      Atom from = atom();
      expect("->");
      Atom to = atom();
      m[from] = to;
    } while (eat(","));
    expect("]");
    return Renaming::fromEntries(std::move(m));
  }
};

}  // namespace detail

inline GroundValue parseValueString(const std::string& text) {
  detail::ValueCursor c(text);
  GroundValue v = c.value();
  if (!c.atEnd())
    fail("trailing input after value at position " + std::to_string(c.pos) +
         " in \"" + text + "\"");
  return v;
}

// ---------------------------------------------------------------------------
// The free extension: canonical renaming-value classes
// ---------------------------------------------------------------------------

// A class of renaming-value pairs under the two generating rules: pairs with
// renamings agreeing on the value's support are identified, and a permutation
// may move from the renaming into the value.  Storage keeps an ordinary
// representative, with the renaming restricted to the value's support and
// identity maplets dropped, so the operations below can pick fresh atoms
// against the real supports involved.  Equality and display go through a
// canonical form: the value's support is relabeled per sort to the up atoms
// 0, 1, 2, … in first-occurrence order of a fixed traversal and the
// relabeling is composed into the renaming, after which two representatives
// of a class agree structurally.  The rule-closure oracle in the test suite
// checks this is exactly the generated equivalence.
struct RenElement {
  Renaming rho;
  GroundValue value;
};

namespace detail {

inline void collectFreeOrder(const GroundValue& v, std::map<Atom, int>& bound,
                             AtomSet& seen, std::vector<Atom>& order) {
  switch (v->kind) {
    case ValueNode::Kind::Atom: {
      auto it = bound.find(v->atom);
      if (it != bound.end() && it->second > 0) return;
      if (seen.insert(v->atom).second) order.push_back(v->atom);
      return;
    }
    case ValueNode::Kind::Bool:
      return;
    case ValueNode::Kind::Tuple:
    case ValueNode::Kind::Con:
      for (const auto& c : v->args) collectFreeOrder(c, bound, seen, order);
      return;
    case ValueNode::Kind::Abs:
      ++bound[v->atom];
      collectFreeOrder(v->args[0], bound, seen, order);
      --bound[v->atom];
      return;
  }
}

}  // namespace detail

inline RenElement mkRenElement(const Renaming& rho, const GroundValue& v) {
  std::map<Atom, Atom> m;
  for (const Atom& s : v->supp) {
    Atom image = rho(s);
    if (!(image == s)) m[s] = image;
  }
  return RenElement{Renaming::fromEntries(std::move(m)), v};
}

inline RenElement idRen(const GroundValue& v) { return mkRenElement(Renaming{}, v); }

namespace detail {

// The canonical form behind equality and display: support atoms become the
// up atoms 0, 1, 2, … of their sort in first-occurrence order, and the
// renaming maps each of those placeholders to its original image.
inline RenElement canonicalRen(const RenElement& e) {
  std::map<Atom, int> bound;
  AtomSet seen;
  std::vector<Atom> order;
  collectFreeOrder(e.value, bound, seen, order);

  std::map<std::string, std::int64_t> next;
  std::vector<Atom> target;
  target.reserve(order.size());
  Permutation relabel;
  for (const Atom& s : order) {
    Atom t{s.sort, next[s.sort]++};
    target.push_back(t);
    Atom cur = relabel(s);
    if (!(cur == t)) relabel = composePerm(makeSwap(cur, t), relabel);
  }

  GroundValue y =
      relabel.isIdentity() ? e.value : permActValue(relabel, e.value);
  std::map<Atom, Atom> m;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Atom image = e.rho(order[i]);
    if (!(target[i] == image)) m[target[i]] = image;
  }
  return RenElement{Renaming::fromEntries(std::move(m)), std::move(y)};
}

}  // namespace detail

inline bool renEq(const RenElement& a, const RenElement& b) {
  RenElement ca = detail::canonicalRen(a);
  RenElement cb = detail::canonicalRen(b);
  return ca.rho == cb.rho && valueEq(ca.value, cb.value);
}

// The renaming action on classes: compose on the outside, recanonicalise.
inline RenElement renAct(const Renaming& r, const RenElement& e) {
  return mkRenElement(composeRen(r, e.rho), e.value);
}

// Support of a class: the image of the value's support under the renaming.
inline AtomSet suppRen(const RenElement& e) {
  return renImageFinite(e.rho, e.value->supp);
}

inline std::string displayRenElement(const RenElement& e) {
  RenElement c = detail::canonicalRen(e);
  return c.rho.display() + " |> " + displayValue(c.value);
}

inline RenElement parseRenElementString(const std::string& text) {
  detail::ValueCursor c(text);
  Renaming r = c.renaming();
  c.expect("|>");
  GroundValue v = c.value();
  if (!c.atEnd())
    fail("trailing input after renaming class in \"" + text + "\"");
  return mkRenElement(r, v);
}

// A representative with as small a renaming as possible.  The renaming's
// injective part is folded back into the value as a permutation: a maplet
// may fold when no other support atom shares its image and its image does
// not stay occupied by an atom that keeps its place.  The folded maplets
// form disjoint chains and cycles (a source may map onto another folded
// source, as a stored swap does), which close into a permutation acting on
// the value.  What remains are the genuine collapses: maplets sharing an
// image, or landing on an atom still present.  The evaluation clauses that
// must choose representatives (tuples, abstraction binders) start from this
// form; otherwise renamings that merely permute the support would masquerade
// as collapses.
inline std::pair<Renaming, GroundValue> minimalRep(const RenElement& e) {
  const AtomSet& supp = e.value->supp;
  std::map<Atom, int> hits;
  for (const Atom& s : supp) ++hits[e.rho(s)];

  std::map<Atom, Atom> fold;
  for (const auto& [src, img] : e.rho.entries)
    if (supp.count(src) && hits[img] == 1) fold.emplace(src, img);
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = fold.begin(); it != fold.end();) {
      if (supp.count(it->second) && !fold.count(it->second)) {
        it = fold.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }

  Permutation relabel;
  if (!fold.empty()) {
    std::map<Atom, Atom> incoming;
    for (const auto& [src, img] : fold) incoming[img] = src;
    AtomSet done;
    auto foldChain = [&](const Atom& start) {
      std::vector<Atom> cycle{start};
      done.insert(start);
      Atom cur = start;
      while (true) {
        Atom img = fold.at(cur);
        if (img == start) break;  // a closed cycle of folded maplets
        cycle.push_back(img);
        if (!fold.count(img)) break;  // a chain end outside the fold
        done.insert(img);
        cur = img;
      }
      Permutation p;
      for (std::size_t j = 1; j < cycle.size(); ++j)
        p = composePerm(makeSwap(cycle[0], cycle[j]), p);
      relabel = composePerm(p, relabel);
    };
    for (const auto& [src, img] : fold)
      if (!incoming.count(src) && !done.count(src)) foldChain(src);
    for (const auto& [src, img] : fold)
      if (!done.count(src)) foldChain(src);
  }

  GroundValue y =
      relabel.isIdentity() ? e.value : permActValue(relabel, e.value);
  std::map<Atom, Atom> m;
  for (const Atom& s : supp) {
    if (fold.count(s)) continue;
    Atom img = e.rho(s);
    if (!(img == s)) m[s] = img;
  }
  return {Renaming::fromEntries(std::move(m)), std::move(y)};
}

// The abstraction of a class at an atom.  The representative is minimised
// first so that a binder denoting itself comes out as the identity-shaped
// abstraction rather than a spurious collapse; the binder must not be caught
// in the residual renaming, which freshness of the binder guarantees at every
// call site.
inline RenElement renAbsOf(const Atom& a, const RenElement& e) {
  auto [r, y] = minimalRep(e);
  bool hitsBinder = r.nontriv().count(a) > 0;
  for (const auto& [src, img] : r.entries) hitsBinder = hitsBinder || img == a;
  if (hitsBinder)
    fail("abstraction binder " + a.display() +
         " is entangled in the renaming part of " + displayRenElement(e));
  return mkRenElement(r, mkVAbs(a, std::move(y)));
}

// Concretion: a class whose value is an abstraction, applied to an atom.  The
// stored abstraction is first moved to a fresh binder outside the renaming
// and the argument, then the binder-to-argument maplet is composed on.
inline RenElement concretionRen(const RenElement& e, const Atom& b) {
  if (e.value->kind != ValueNode::Kind::Abs)
    fail("concretion applies to abstraction classes, not " +
         displayRenElement(e));
  const Atom& binder = e.value->atom;
  if (binder.sort != b.sort)
    fail("concretion of a " + binder.sort + "-abstraction at " + b.display());
  const GroundValue& body = e.value->args[0];
  AtomSet avoid = e.rho.nontriv();
  for (const Atom& a : suppRen(e)) avoid.insert(a);
  avoid.insert(body->supp.begin(), body->supp.end());
  avoid.insert(b);
  Atom ap = freshUpAtom(binder.sort, avoid);
  GroundValue moved = permActValue(makeSwap(binder, ap), body);
  return mkRenElement(composeRen(makeAtomicRen(ap, b), e.rho),
                      std::move(moved));
}

// Iterated concretion along a list of atoms, outermost abstraction first.
inline RenElement applyAbsList(RenElement e, const std::vector<Atom>& atoms) {
  for (const Atom& a : atoms) e = concretionRen(e, a);
  return e;
}

// ---------------------------------------------------------------------------
// Natural maps between the two abstraction worlds
// ---------------------------------------------------------------------------

// Classes of atom values collapse to the atom their renaming sends the
// support to; this map is a bijection.
inline Atom renAtomCollapse(const RenElement& e) {
  if (e.value->kind != ValueNode::Kind::Atom)
    fail("atom collapse applies to atom classes, not " + displayRenElement(e));
  return e.rho(e.value->atom);
}

// A class of tuples splits componentwise.  Not injective (a collapse across
// components and the already-collapsed tuple split identically) and therefore
// no inverse exists, although every component pair is reachable.
inline std::vector<RenElement> renPairSplit(const RenElement& e) {
  if (e.value->kind != ValueNode::Kind::Tuple)
    fail("componentwise split applies to tuple classes, not " +
         displayRenElement(e));
  std::vector<RenElement> out;
  out.reserve(e.value->args.size());
  for (const auto& c : e.value->args) out.push_back(mkRenElement(e.rho, c));
  return out;
}

// An abstraction over a class: binder together with the class of the body.
struct AbsRen {
  Atom binder;
  RenElement body;
};

// The abstraction equality law one level up, with the swap acting as a
// renaming on classes.
inline bool absRenEq(const AbsRen& x, const AbsRen& y) {
  if (x.binder == y.binder) return renEq(x.body, y.body);
  if (x.binder.sort != y.binder.sort) return false;
  if (suppRen(x.body).count(y.binder)) return false;
  return renEq(renAct(renOfPerm(makeSwap(y.binder, x.binder)), x.body),
               y.body);
}

// A class of abstractions pushes to an abstraction of a class once its binder
// is moved out of the renaming's way.  Not surjective: abstracting a collapse
// class at the collapse target is unreachable, which the witness report
// below exhibits by bounded search.
inline AbsRen renAbsPush(const RenElement& e) {
  if (e.value->kind != ValueNode::Kind::Abs)
    fail("abstraction push applies to abstraction classes, not " +
         displayRenElement(e));
  const Atom& binder = e.value->atom;
  const GroundValue& body = e.value->args[0];
  AtomSet avoid = e.rho.nontriv();
  avoid.insert(body->supp.begin(), body->supp.end());
  for (const Atom& a : suppRen(e)) avoid.insert(a);
  Atom ap = freshUpAtom(binder.sort, avoid);
  GroundValue moved = permActValue(makeSwap(binder, ap), body);
  return AbsRen{ap, mkRenElement(e.rho, std::move(moved))};
}

// ---------------------------------------------------------------------------
// Atom functions
// ---------------------------------------------------------------------------

// Total functions out of a name sort, in the two shapes the library needs:
// the function view of an abstraction (binder and body, applied by renaming
// the binder to the argument), and a finite-exceptions rule such as a swap.
// The function view of abstractions is not surjective onto such functions,
// which is the fourth witness below.
struct AtomFn {
  bool isAbsImage = true;
  Atom binder;                      // AbsImage
  GroundValue body;                 // AbsImage
  Permutation excDefault;           // FiniteExc: the default rule
  std::map<Atom, Atom> exceptions;  // FiniteExc: overriding points
};

inline AtomFn absFun(const GroundValue& absValue) {
  if (absValue->kind != ValueNode::Kind::Abs)
    fail("the function view applies to abstraction values");
  AtomFn f;
  f.isAbsImage = true;
  f.binder = absValue->atom;
  f.body = absValue->args[0];
  return f;
}

inline AtomFn finiteExcFn(Permutation defaultRule,
                          std::map<Atom, Atom> exceptions = {}) {
  AtomFn f;
  f.isAbsImage = false;
  f.excDefault = std::move(defaultRule);
  f.exceptions = std::move(exceptions);
  return f;
}

// Application lands in classes: the abstraction image sends n to the body
// with binder renamed to n; a finite-exceptions rule sends n to an atom.
inline RenElement absFunApply(const AtomFn& f, const Atom& n) {
  if (f.isAbsImage)
    return mkRenElement(makeAtomicRen(f.binder, n), f.body);
  auto it = f.exceptions.find(n);
  return idRen(mkVAtom(it != f.exceptions.end() ? it->second
                                                : f.excDefault(n)));
}

inline Atom atomFnApplyAtom(const AtomFn& f, const Atom& n) {
  return renAtomCollapse(absFunApply(f, n));
}

inline AtomSet atomFnSupport(const AtomFn& f) {
  if (f.isAbsImage) {
    AtomSet s = f.body->supp;
    s.erase(f.binder);
    return s;
  }
  AtomSet s = f.excDefault.nontriv();
  for (const auto& [k, v] : f.exceptions) {
    s.insert(k);
    s.insert(v);
  }
  return s;
}

// ---------------------------------------------------------------------------
// The exploding carrier
// ---------------------------------------------------------------------------

// Pairs of distinct atoms plus a point, where a renaming that identifies the
// two components explodes the pair to the point.  Exists solely to witness
// that the support of a renamed element can be strictly below the renamed
// support; the Herbrand carriers never behave like this.
struct ExplodingPair {
  bool star = false;
  Atom first, second;

  static ExplodingPair point() { return ExplodingPair{true, {}, {}}; }
  static ExplodingPair of(const Atom& a, const Atom& b) {
    if (a == b) fail("exploding pairs hold distinct atoms");
    return ExplodingPair{false, a, b};
  }
};

inline ExplodingPair explodingAct(const Renaming& r, const ExplodingPair& p) {
  if (p.star) return p;
  Atom a = r(p.first), b = r(p.second);
  if (a == b) return ExplodingPair::point();
  return ExplodingPair::of(a, b);
}

inline AtomSet explodingSupp(const ExplodingPair& p) {
  if (p.star) return {};
  return {p.first, p.second};
}

// ---------------------------------------------------------------------------
// Witness report for the natural maps
// ---------------------------------------------------------------------------

struct NaturalMapReport {
  bool collapseBijective = false;     // atom classes <-> atoms
  bool splitNonInjective = false;     // split merges a collapse with its image
  bool splitPairReachable = false;    // the merged pair still has a preimage
  bool pushMissesTarget = false;      // no class pushes to [target]collapse
  bool pushReachesVacuous = false;    // a vacuous binder over it is reachable
  bool absImageMissesSwap = false;    // no abstraction view equals a swap
  bool supportStrict = false;         // exploding pair drops support

  bool allExpected() const {
    return collapseBijective && splitNonInjective && splitPairReachable &&
           pushMissesTarget && pushReachesVacuous && absImageMissesSwap &&
           supportStrict;
  }
};

// Bounded, deterministic searches over a five-atom pool; every verdict is
// decidable because supports stay at three atoms or fewer and classes are
// invariant under moving their support into the pool.
inline NaturalMapReport naturalMapWitnesses() {
  NaturalMapReport rep;
  const std::string nu = "nu";
  Atom a{nu, -2}, b{nu, -1}, c{nu, 0}, d{nu, 1}, e5{nu, 2};
  std::vector<Atom> pool{a, b, c, d, e5};

  // Every map from the pool into itself, as a renaming.
  std::vector<Renaming> rens;
  {
    std::size_t n = pool.size();
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      std::map<Atom, Atom> m;
      for (std::size_t i = 0; i < n; ++i) m[pool[i]] = pool[idx[i]];
      rens.push_back(Renaming::fromEntries(std::move(m)));
      std::size_t i = 0;
      for (; i < n; ++i) {
        if (++idx[i] < n) break;
        idx[i] = 0;
      }
      if (i == n) break;
    }
  }

  // Collapse: classes of atoms versus plain atoms.
  rep.collapseBijective = true;
  for (const Renaming& r : rens)
    for (const Atom& x : pool) {
      RenElement el = mkRenElement(r, mkVAtom(x));
      if (!(renAtomCollapse(el) == r(x))) rep.collapseBijective = false;
      if (!renEq(el, idRen(mkVAtom(r(x))))) rep.collapseBijective = false;
    }

  // Split: the collapse of (a, b) onto b and the already-equal pair (b, b)
  // are distinct classes with identical componentwise splits.
  RenElement collapseAB = mkRenElement(makeAtomicRen(a, b),
                                       mkVTuple({mkVAtom(a), mkVAtom(b)}));
  RenElement doubledB = idRen(mkVTuple({mkVAtom(b), mkVAtom(b)}));
  {
    auto s1 = renPairSplit(collapseAB);
    auto s2 = renPairSplit(doubledB);
    rep.splitNonInjective = !renEq(collapseAB, doubledB) &&
                            renEq(s1[0], s2[0]) && renEq(s1[1], s2[1]);
  }

  // The componentwise pair (collapse onto b, collapse onto a) is reachable:
  // a single class over four support atoms splits onto it.
  {
    RenElement targetL = collapseAB;
    RenElement targetR = mkRenElement(makeAtomicRen(b, a),
                                      mkVTuple({mkVAtom(a), mkVAtom(b)}));
    std::map<Atom, Atom> m{{b, a}, {c, b}, {d, a}, {e5, b}};
    RenElement joint = mkRenElement(
        Renaming::fromEntries(std::move(m)),
        mkVTuple({mkVTuple({mkVAtom(c), mkVAtom(e5)}),
                  mkVTuple({mkVAtom(b), mkVAtom(d)})}));
    auto s = renPairSplit(joint);
    rep.splitPairReachable = renEq(s[0], targetL) && renEq(s[1], targetR);
  }

  // Push: the abstraction, at the collapse target, of a collapse class has
  // no preimage; a vacuous binder over the same class has one.  Candidates
  // range over all abstraction-of-pair classes on a four-atom pool, which is
  // exhaustive for this target: a preimage's pushed binder is fresh, so
  // matching the one-atom support of the target forces the candidate's class
  // support to be empty, and renamings cannot empty a nonempty support — so
  // any preimage is, up to class equality, an identity class over atoms the
  // pool covers.
  {
    RenElement collapseToA = mkRenElement(makeAtomicRen(b, a),
                                          mkVTuple({mkVAtom(a), mkVAtom(b)}));
    AbsRen atTarget{a, collapseToA};
    AbsRen vacuous{b, collapseToA};
    bool foundTarget = false, foundVacuous = false;
    std::vector<Atom> pool4{a, b, c, d};
    std::vector<Renaming> rens4;
    for (std::size_t code = 0; code < 256; ++code) {
      std::map<Atom, Atom> m;
      for (std::size_t i = 0; i < 4; ++i)
        m[pool4[i]] = pool4[(code >> (2 * i)) & 3u];
      rens4.push_back(Renaming::fromEntries(std::move(m)));
    }
    std::set<std::string> seenCandidates;
    for (const Renaming& r : rens4)
      for (const Atom& x : pool4)
        for (const Atom& y : pool4)
          for (const Atom& z : pool4) {
            RenElement cand =
                mkRenElement(r, mkVAbs(x, mkVTuple({mkVAtom(y), mkVAtom(z)})));
            if (!seenCandidates.insert(displayRenElement(cand)).second)
              continue;
            AbsRen pushed = renAbsPush(cand);
            if (absRenEq(pushed, atTarget)) foundTarget = true;
            if (absRenEq(pushed, vacuous)) foundVacuous = true;
          }
    rep.pushMissesTarget = !foundTarget;
    rep.pushReachesVacuous = foundVacuous;
  }

  // Function view: the swap of a and b differs from every abstraction image
  // on the probe set {a, b, c}.
  {
    AtomFn swapFn = finiteExcFn(makeSwap(a, b));
    bool matched = false;
    for (const Atom& x : pool)
      for (const Atom& y : pool) {
        AtomFn img = absFun(mkVAbs(x, mkVAtom(y)));
        bool same = true;
        for (const Atom& probe : {a, b, c})
          if (!(atomFnApplyAtom(img, probe) == atomFnApplyAtom(swapFn, probe)))
            same = false;
        if (same) matched = true;
      }
    rep.absImageMissesSwap = !matched;
  }

  // Exploding support: renaming a onto b explodes the pair (a, b), whose
  // support is then empty, strictly below the renamed support {b}.
  {
    ExplodingPair p = ExplodingPair::of(a, b);
    ExplodingPair q = explodingAct(makeAtomicRen(a, b), p);
    AtomSet renamed = renImageFinite(makeAtomicRen(a, b), explodingSupp(p));
    rep.supportStrict = q.star && explodingSupp(q).empty() && renamed.size() == 1;
  }

  return rep;
}

// ---------------------------------------------------------------------------
// Interpretations
// ---------------------------------------------------------------------------

// Herbrand semantics: base-sort carriers are the ground values of that sort,
// term-formers are free constructors (equivariant by construction), and each
// proposition-former carries a decision rule tagged by whether it is
// equivariant or merely supported.
struct PropRule {
  enum class Kind { Never, Always, EqualComponents, Closed, IsAtom, Table };
  Kind kind = Kind::Never;
  Atom pin;                                            // IsAtom
  std::vector<std::pair<GroundValue, int>> table;      // Table, in file order
  int tableDefault = 0;

  bool equivariant() const {
    switch (kind) {
      case Kind::Never:
      case Kind::Always:
      case Kind::EqualComponents:
      case Kind::Closed:
        return true;
      case Kind::IsAtom:
      case Kind::Table:
        return false;
    }
    return false;
  }

  AtomSet support() const {
    AtomSet s;
    if (kind == Kind::IsAtom) s.insert(pin);
    if (kind == Kind::Table)
      for (const auto& [v, bit] : table)
        s.insert(v->supp.begin(), v->supp.end());
    return s;
  }

  int apply(const GroundValue& v) const {
    switch (kind) {
      case Kind::Never:
        return 0;
      case Kind::Always:
        return 1;
      case Kind::EqualComponents: {
        if (v->kind != ValueNode::Kind::Tuple)
          fail("an equal-components rule expects a tuple value, not " +
               displayValue(v));
        for (std::size_t i = 1; i < v->args.size(); ++i)
          if (!valueEq(v->args[0], v->args[i])) return 0;
        return 1;
      }
      case Kind::Closed:
        return v->supp.empty() ? 1 : 0;
      case Kind::IsAtom:
        return valueEq(v, mkVAtom(pin)) ? 1 : 0;
      case Kind::Table: {
        for (const auto& [key, bit] : table)
          if (valueEq(v, key)) return bit;
        return tableDefault;
      }
    }
    return 0;
  }
};

struct PnlInterp {
  const PnlSignature* sig = nullptr;
  std::map<std::string, PropRule> rules;  // missing former: never true

  const PropRule& ruleFor(const std::string& former) const {
    static const PropRule never{};
    auto it = rules.find(former);
    return it == rules.end() ? never : it->second;
  }
};

// Sort of a ground value against a signature; validates constructor domains.
inline PnlSort inferValueSort(const PnlSignature& sig, const GroundValue& v) {
  switch (v->kind) {
    case ValueNode::Kind::Atom:
      if (!sig.isNameSort(v->atom.sort))
        fail("atom " + v->atom.display() + " has undeclared name sort");
      return PnlSort::nameSort(v->atom.sort);
    case ValueNode::Kind::Bool:
      fail("a truth value does not inhabit a term sort");
    case ValueNode::Kind::Tuple: {
      std::vector<PnlSort> comps;
      comps.reserve(v->args.size());
      for (const auto& cv : v->args) comps.push_back(inferValueSort(sig, cv));
      return PnlSort::tuple(std::move(comps));
    }
    case ValueNode::Kind::Abs:
      return PnlSort::abs(v->atom.sort, inferValueSort(sig, v->args[0]));
    case ValueNode::Kind::Con: {
      auto it = sig.termFormers.find(v->con);
      if (it == sig.termFormers.end())
        fail("value constructor " + v->con + " is not a term-former");
      PnlSort got = inferValueSort(sig, v->args[0]);
      if (!(got == it->second.domain))
        fail("argument of " + v->con + " has sort " + got.display() +
             ", expected " + it->second.domain.display());
      return PnlSort::baseSort(it->second.result);
    }
  }
  fail("unreachable value kind");
}

inline std::string displayValueTagged(const PnlSignature& sig,
                                      const GroundValue& v) {
  return inferValueSort(sig, v).display() + " : " + displayValue(v);
}

inline std::string displayRenElementTagged(const PnlSignature& sig,
                                           const RenElement& e) {
  return inferValueSort(sig, e.value).display() + " : " +
         displayRenElement(e);
}

// The deterministic default element of a sort, with support inside the given
// permission set: the first permitted down atom at name sorts, componentwise
// at tuples, a vacuous-support binder at abstractions, and at base sorts the
// alphabetically first term-former among those available at the earliest
// stage of the usual constructibility iteration.
inline GroundValue defaultValue(const PnlSignature& sig, const PnlSort& sort,
                                const PermissionSet& pmss) {
  switch (sort.kind) {
    case PnlSort::Kind::Name: {
      for (std::int64_t k = -1;; --k) {
        Atom cand{sort.name, k};
        if (pmss.contains(cand)) return mkVAtom(cand);
      }
    }
    case PnlSort::Kind::Tuple: {
      std::vector<GroundValue> comps;
      comps.reserve(sort.args.size());
      for (const PnlSort& cs : sort.args)
        comps.push_back(defaultValue(sig, cs, pmss));
      return mkVTuple(std::move(comps));
    }
    case PnlSort::Kind::Abs:
      return mkVAbs(Atom{sort.name, 0}, defaultValue(sig, sort.args[0], pmss));
    case PnlSort::Kind::Base: {
      // Rank base sorts by the pass at which they become constructible and
      // remember the first former (by name) that constructs each.
      std::map<std::string, std::string> chosen;
      auto constructible = [&](const PnlSort& s, auto&& self) -> bool {
        switch (s.kind) {
          case PnlSort::Kind::Name:
            return true;
          case PnlSort::Kind::Base:
            return chosen.count(s.name) > 0;
          case PnlSort::Kind::Abs:
            return self(s.args[0], self);
          case PnlSort::Kind::Tuple:
            for (const PnlSort& cs : s.args)
              if (!self(cs, self)) return false;
            return true;
        }
        return false;
      };
      bool grew = true;
      while (grew) {
        grew = false;
        std::map<std::string, std::string> found;
        for (const auto& [f, tf] : sig.termFormers) {
          if (chosen.count(tf.result) || found.count(tf.result)) continue;
          if (constructible(tf.domain, constructible)) found[tf.result] = f;
        }
        for (auto& [s, f] : found) {
          chosen.emplace(s, f);
          grew = true;
        }
      }
      auto it = chosen.find(sort.name);
      if (it == chosen.end())
        fail("base sort " + sort.name +
             " has no default element: no term-former chain grounds it");
      const TermFormer& tf = sig.termFormers.at(it->second);
      return mkVCon(it->second, defaultValue(sig, tf.domain, pmss));
    }
  }
  fail("unreachable sort kind");
}

// ---------------------------------------------------------------------------
// Interpretation files
// ---------------------------------------------------------------------------

using WitnessMap = std::map<std::string, std::vector<GroundValue>>;

struct InterpFile {
  PnlInterp interp;
  WitnessMap witnesses;
};

// Line-based format: blank lines and lines starting with '#' are skipped.
//   pred <former> never | always | equal-components | closed
//   pred <former> atom-is <atom>
//   pred <former> table { <value> -> 0|1 ; ... ; default -> 0|1 }
//   witness <quantifier-name> <value>
inline InterpFile parseInterpString(const PnlSignature& sig,
                                    const std::string& text) {
  InterpFile out;
  out.interp.sig = &sig;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  auto lineFail = [&](const std::string& msg) {
    fail("interpretation line " + std::to_string(lineNo) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineNo;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "pred") {
      std::string former, kind;
      ls >> former >> kind;
      if (former.empty() || kind.empty())
        lineFail("expected 'pred <former> <rule>'");
      if (!sig.propFormers.count(former))
        lineFail(former + " is not a proposition-former of the signature");
      PropRule rule;
      if (kind == "never") {
        rule.kind = PropRule::Kind::Never;
      } else if (kind == "always") {
        rule.kind = PropRule::Kind::Always;
      } else if (kind == "equal-components") {
        rule.kind = PropRule::Kind::EqualComponents;
      } else if (kind == "closed") {
        rule.kind = PropRule::Kind::Closed;
      } else if (kind == "atom-is") {
        rule.kind = PropRule::Kind::IsAtom;
        std::string rest;
        std::getline(ls, rest);
        detail::ValueCursor c(rest);
        rule.pin = c.atom();
        if (!c.atEnd()) lineFail("trailing input after the pinned atom");
        if (!sig.isNameSort(rule.pin.sort))
          lineFail("pinned atom " + rule.pin.display() +
                   " has undeclared name sort");
      } else if (kind == "table") {
        rule.kind = PropRule::Kind::Table;
        std::string rest;
        std::getline(ls, rest);
        detail::ValueCursor c(rest);
        c.expect("{");
        bool sawDefault = false;
        do {
          if (c.eat("default")) {
            c.expect("->");
            rule.tableDefault = c.eat("1") ? 1 : (c.expect("0"), 0);
            sawDefault = true;
          } else {
            GroundValue key = c.value();
            c.expect("->");
            int bit = c.eat("1") ? 1 : (c.expect("0"), 0);
            try {
              inferValueSort(sig, key);
            } catch (const std::exception& e) {
              lineFail(e.what());
            }
            rule.table.emplace_back(std::move(key), bit);
          }
        } while (c.eat(";"));
        c.expect("}");
        if (!c.atEnd()) lineFail("trailing input after the table");
        if (!sawDefault) lineFail("a table rule needs a default entry");
      } else {
        lineFail("unknown rule '" + kind + "'");
      }
      auto [it, fresh] = out.interp.rules.emplace(former, std::move(rule));
      if (!fresh) lineFail("former " + former + " already has a rule");
    } else if (head == "witness") {
      std::string name;
      ls >> name;
      std::string rest;
      std::getline(ls, rest);
      if (name.empty()) lineFail("expected 'witness <quantifier> <value>'");
      detail::ValueCursor c(rest);
      GroundValue v = c.value();
      if (!c.atEnd()) lineFail("trailing input after the witness value");
      try {
        inferValueSort(sig, v);
      } catch (const std::exception& e) {
        lineFail(e.what());
      }
      out.witnesses[name].push_back(std::move(v));
    } else {
      lineFail("unknown directive '" + head + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Valuations and the ground denotation
// ---------------------------------------------------------------------------

struct PnlValuation {
  std::map<Unknown, GroundValue> map;
};

inline void valuationSet(PnlValuation& vs, const PnlInterp& I,
                         const Unknown& x, GroundValue v) {
  PnlSort got = inferValueSort(*I.sig, v);
  if (!(got == x.sort))
    fail("valuation gives " + x.name + " a value of sort " + got.display() +
         ", expected " + x.sort.display());
  for (const Atom& a : v->supp)
    if (!x.pmss.contains(a))
      fail("valuation value for " + x.name + " has support atom " +
           a.display() + " outside its permission set");
  vs.map[x] = std::move(v);
}

inline GroundValue valuationGet(const PnlInterp& I, const PnlValuation& vs,
                                const Unknown& x) {
  auto it = vs.map.find(x);
  if (it != vs.map.end()) return it->second;
  return defaultValue(*I.sig, x.sort, x.pmss);
}

inline GroundValue denoteTerm(const PnlInterp& I, const PnlValuation& vs,
                              const PnlTerm& r) {
  switch (r->kind) {
    case TermNode::Kind::Atom:
      return mkVAtom(r->atom);
    case TermNode::Kind::Susp:
      return permActValue(r->perm, valuationGet(I, vs, r->unk));
    case TermNode::Kind::Abs:
      return mkVAbs(r->atom, denoteTerm(I, vs, r->args[0]));
    case TermNode::Kind::Tuple: {
      std::vector<GroundValue> comps;
      comps.reserve(r->args.size());
      for (const auto& c : r->args) comps.push_back(denoteTerm(I, vs, c));
      return mkVTuple(std::move(comps));
    }
    case TermNode::Kind::App:
      return mkVCon(r->former, denoteTerm(I, vs, r->args[0]));
  }
  fail("unreachable term kind");
}

// Truth values 0 and 1.  Universal quantifiers take their minimum over an
// explicit witness list keyed by the bound unknown's display name; the result
// is exact on quantifier-free propositions and an upper approximation of
// universal truth otherwise (a reported 0 is always genuine, a reported 1
// certifies only the listed witnesses).
inline int denoteProp(const PnlInterp& I, const PnlValuation& vs,
                      const PnlProp& p, const WitnessMap& witnesses = {}) {
  switch (p->kind) {
    case PropNode::Kind::Bot:
      return 0;
    case PropNode::Kind::Imp: {
      int l = denoteProp(I, vs, p->sub[0], witnesses);
      int r = denoteProp(I, vs, p->sub[1], witnesses);
      return std::max(1 - l, r);
    }
    case PropNode::Kind::Pred:
      return I.ruleFor(p->former).apply(denoteTerm(I, vs, p->arg));
    case PropNode::Kind::Forall: {
      auto it = witnesses.find(p->binder.name);
      if (it == witnesses.end() || it->second.empty())
        fail("no witness list for quantifier " + p->binder.name);
      int best = 1;
      for (const GroundValue& w : it->second) {
        PnlSort got = inferValueSort(*I.sig, w);
        if (!(got == p->binder.sort))
          fail("witness for " + p->binder.name + " has sort " + got.display() +
               ", expected " + p->binder.sort.display());
        for (const Atom& a : w->supp)
          if (!p->binder.pmss.contains(a))
            fail("witness for " + p->binder.name + " has support atom " +
                 a.display() + " outside the permission set");
        PnlValuation ext = vs;
        ext.map[p->binder] = w;
        best = std::min(best, denoteProp(I, ext, p->sub[0], witnesses));
        if (best == 0) break;
      }
      return best;
    }
  }
  fail("unreachable proposition kind");
}

// ---------------------------------------------------------------------------
// The higher-order denotation on the translated fragment
// ---------------------------------------------------------------------------

// Values of the higher-order evaluation: a class, a truth value, or a tuple
// mixing the two (which well-typed translations never produce but the tuple
// clause admits).
struct HolValue {
  enum class Kind { Ren, Truth, Mixed };
  Kind kind = Kind::Truth;
  RenElement ren;
  int truth = 0;
  std::vector<HolValue> comps;

  static HolValue ofRen(RenElement e) {
    HolValue v;
    v.kind = Kind::Ren;
    v.ren = std::move(e);
    return v;
  }
  static HolValue ofTruth(int t) {
    HolValue v;
    v.kind = Kind::Truth;
    v.truth = t;
    return v;
  }
};

struct HolValuation {
  std::map<std::string, HolValue> vars;     // by variable name
  std::map<Atom, RenElement> atomOverrides; // atoms default to their own class

  RenElement atomValue(const Atom& a) const {
    auto it = atomOverrides.find(a);
    return it != atomOverrides.end() ? it->second : idRen(mkVAtom(a));
  }
};

using HolWitnessMap = std::map<std::string, std::vector<RenElement>>;

// The class of a value abstracted over the context entries an unknown keeps,
// innermost abstraction last — how a ground valuation reaches the
// higher-order side.
inline RenElement witnessLift(const Dlist& d, const Unknown& x,
                              const GroundValue& v) {
  Dlist gamma = gammaFor(x, d);
  GroundValue wrapped = v;
  for (auto it = gamma.rbegin(); it != gamma.rend(); ++it)
    wrapped = mkVAbs(*it, wrapped);
  return idRen(std::move(wrapped));
}

inline HolValuation valuationLift(const PnlInterp& I, const Dlist& d,
                                  const std::vector<Unknown>& xs,
                                  const PnlValuation& vs) {
  HolValuation out;
  for (const Unknown& x : xs)
    out.vars[mangleUnknown(x.name, d)] =
        HolValue::ofRen(witnessLift(d, x, valuationGet(I, vs, x)));
  return out;
}

// The tuple clause: components are taken at minimal representatives, residual
// renaming domains are relabeled into disjoint fresh blocks, and the union
// acts on the tuple of values.  Minimising first matters — canonical
// components all relabel their support to the same atoms, and treating that
// presentation artefact as a genuine collapse would merge distinct classes.
inline RenElement tupleRen(const std::vector<RenElement>& comps) {
  if (comps.size() < 2) fail("a tuple class needs at least two components");
  std::vector<std::pair<Renaming, GroundValue>> reps;
  reps.reserve(comps.size());
  AtomSet avoid;
  for (const RenElement& c : comps) {
    reps.push_back(minimalRep(c));
    const auto& [r, y] = reps.back();
    avoid.insert(y->supp.begin(), y->supp.end());
    for (const auto& [src, img] : r.entries) {
      avoid.insert(src);
      avoid.insert(img);
    }
  }
  std::map<Atom, Atom> joint;
  std::vector<GroundValue> values;
  for (auto& [r, y] : reps) {
    for (const Atom& dAtom : r.dom()) {
      Atom fresh = freshUpAtom(dAtom.sort, avoid);
      avoid.insert(fresh);
      y = permActValue(makeSwap(dAtom, fresh), y);
      joint[fresh] = r(dAtom);
    }
    values.push_back(y);
  }
  return mkRenElement(Renaming::fromEntries(std::move(joint)),
                      mkVTuple(std::move(values)));
}

namespace detail {

// Mirrors the quantifier indexing of the ground propositions: the name of a
// binder is one above the highest binder index inside its body.
inline int holQdepth(const HolTerm& t) {
  if (holIsForall(t)) {
    const HolTerm& lam = t->args[1];
    if (lam->kind == HolNode::Kind::Lam) return 1 + holQdepth(lam->args[0]);
    return 1;
  }
  if (holIsImp(t))
    return std::max(holQdepth(t->args[0]->args[1]), holQdepth(t->args[1]));
  return 0;
}

inline AtomSet holAvoidSet(const HolValuation& rho, const HolTerm& t) {
  AtomSet avoid;
  auto addValue = [&](const HolValue& v, auto&& self) -> void {
    if (v.kind == HolValue::Kind::Ren) {
      for (const Atom& a : suppRen(v.ren)) avoid.insert(a);
      for (const Atom& a : v.ren.value->supp) avoid.insert(a);
      for (const Atom& a : v.ren.rho.nontriv()) avoid.insert(a);
    }
    for (const HolValue& c : v.comps) self(c, self);
  };
  for (const auto& [name, v] : rho.vars) addValue(v, addValue);
  for (const auto& [a, e] : rho.atomOverrides) {
    avoid.insert(a);
    for (const Atom& x : suppRen(e)) avoid.insert(x);
  }
  for (const HolVar& v : t->fv)
    if (v.isAtom) avoid.insert(holVarAtom(v));
  return avoid;
}

inline HolValue evalHol(const PnlInterp& I, const HolValuation& rho,
                        const HolTerm& t, const HolWitnessMap& witnesses);

inline RenElement evalHolRen(const PnlInterp& I, const HolValuation& rho,
                             const HolTerm& t, const HolWitnessMap& w,
                             const char* what) {
  HolValue v = evalHol(I, rho, t, w);
  if (v.kind != HolValue::Kind::Ren)
    fail(std::string(what) + " did not evaluate to a carrier class: " +
         displayHolTerm(t));
  return std::move(v.ren);
}

inline int evalHolTruth(const PnlInterp& I, const HolValuation& rho,
                        const HolTerm& t, const HolWitnessMap& w,
                        const char* what) {
  HolValue v = evalHol(I, rho, t, w);
  if (v.kind != HolValue::Kind::Truth)
    fail(std::string(what) + " did not evaluate to a truth value: " +
         displayHolTerm(t));
  return v.truth;
}

inline HolValue evalHol(const PnlInterp& I, const HolValuation& rho,
                        const HolTerm& t, const HolWitnessMap& witnesses) {
  switch (t->kind) {
    case HolNode::Kind::Var: {
      if (t->var.isAtom)
        return HolValue::ofRen(rho.atomValue(holVarAtom(t->var)));
      auto it = rho.vars.find(t->var.name);
      if (it == rho.vars.end())
        fail("no value for variable " + t->var.name + " in the valuation");
      return it->second;
    }
    case HolNode::Kind::Bound:
      fail("loose bound index in evaluation; the term is not closed");
    case HolNode::Kind::Const: {
      if (t->constName == "bot") return HolValue::ofTruth(0);
      fail("constant " + t->constName +
           " needs its arguments to lie in the evaluated fragment");
    }
    case HolNode::Kind::Tuple: {
      std::vector<HolValue> vals;
      vals.reserve(t->args.size());
      bool allRen = true;
      for (const auto& c : t->args) {
        vals.push_back(evalHol(I, rho, c, witnesses));
        allRen = allRen && vals.back().kind == HolValue::Kind::Ren;
      }
      if (allRen) {
        std::vector<RenElement> comps;
        comps.reserve(vals.size());
        for (auto& v : vals) comps.push_back(std::move(v.ren));
        return HolValue::ofRen(tupleRen(comps));
      }
      HolValue out;
      out.kind = HolValue::Kind::Mixed;
      out.comps = std::move(vals);
      return out;
    }
    case HolNode::Kind::Lam: {
      const HolType& bt = t->var.type;
      if (bt.kind == HolType::Kind::Base && bt.name.rfind("mu_", 0) == 0 &&
          I.sig->isNameSort(bt.name.substr(3))) {
        Atom a = freshUpAtom(bt.name.substr(3), holAvoidSet(rho, t));
        HolTerm body = holInstantiate(t, mkHolVar(atomVar(a)));
        RenElement b =
            evalHolRen(I, rho, body, witnesses, "an abstraction body");
        return HolValue::ofRen(renAbsOf(a, b));
      }
      fail("a lambda at type " + bt.display() +
           " evaluates only as a quantifier argument");
    }
    case HolNode::Kind::App: {
      if (holIsForall(t)) {
        const HolTerm& lam = t->args[1];
        if (lam->kind != HolNode::Kind::Lam)
          fail("a quantifier needs a literal lambda argument");
        int k = holQdepth(lam->args[0]);
        std::string key = "$" + std::to_string(k);
        auto it = witnesses.find(key);
        if (it == witnesses.end() || it->second.empty())
          fail("no witness list for quantifier " + key);
        std::string name = "%q" + std::to_string(k);
        int best = 1;
        for (const RenElement& w : it->second) {
          HolTerm opened =
              holInstantiate(lam, mkHolVar(HolVar{name, lam->var.type}));
          HolValuation ext = rho;
          ext.vars[name] = HolValue::ofRen(w);
          best = std::min(best, evalHolTruth(I, ext, opened, witnesses,
                                             "a quantifier body"));
          if (best == 0) break;
        }
        return HolValue::ofTruth(best);
      }
      if (holIsImp(t)) {
        int l = evalHolTruth(I, rho, t->args[0]->args[1], witnesses,
                             "an implication operand");
        int r = evalHolTruth(I, rho, t->args[1], witnesses,
                             "an implication operand");
        return HolValue::ofTruth(std::max(1 - l, r));
      }
      const HolTerm& fn = t->args[0];
      const HolTerm& arg = t->args[1];
      if (fn->kind == HolNode::Kind::Const &&
          fn->constName.rfind("g_", 0) == 0) {
        std::string former = fn->constName.substr(2);
        if (I.sig->termFormers.count(former)) {
          RenElement a =
              evalHolRen(I, rho, arg, witnesses, "a constructor argument");
          return HolValue::ofRen(
              mkRenElement(a.rho, mkVCon(former, a.value)));
        }
        if (I.sig->propFormers.count(former)) {
          const PropRule& rule = I.ruleFor(former);
          if (!rule.equivariant())
            fail("proposition-former " + former +
                 " is interpreted without equivariance; it has no "
                 "well-defined action on renaming classes");
          RenElement a =
              evalHolRen(I, rho, arg, witnesses, "a predicate argument");
          return HolValue::ofTruth(rule.apply(a.value));
        }
        fail("constant " + fn->constName + " matches no former");
      }
      RenElement f = evalHolRen(I, rho, fn, witnesses, "an applied term");
      if (f.value->kind != ValueNode::Kind::Abs)
        fail("application head " + displayHolTerm(fn) +
             " does not evaluate to an abstraction class");
      RenElement a = evalHolRen(I, rho, arg, witnesses, "an argument");
      if (a.value->kind != ValueNode::Kind::Atom)
        fail("argument " + displayHolTerm(arg) +
             " does not evaluate to an atom class");
      return HolValue::ofRen(concretionRen(f, renAtomCollapse(a)));
    }
  }
  fail("unreachable term kind");
}

}  // namespace detail

// Evaluates a term of the translated fragment: atoms, variables, former
// constants applied to their argument, implication, quantifiers over witness
// lists (keyed like the ground side), lambdas over atoms, applications of
// abstraction classes to atom classes, and tuples.  Anything else raises an
// error naming the offending construct.
inline HolValue holDenoteFragment(const PnlInterp& I, const HolValuation& rho,
                                  const HolTerm& t,
                                  const HolWitnessMap& witnesses = {}) {
  return detail::evalHol(I, rho, t, witnesses);
}

}  // namespace pnl
