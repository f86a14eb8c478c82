#pragma once

// Atoms, atom-set expressions (finite and co-down-finite), permutations,
// renamings, and deterministic freshness.  Everything downstream (terms,
// proofs, translation, semantics) builds on this file.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnl {

// Library-wide error type.  Messages are complete sentences with enough
// context to act on; the CLI maps uncaught PnlError to exit code 2.
struct PnlError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw PnlError(msg); }

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

// An atom is a (name-sort, integer index) pair, displayed "nu#-3".
// Index < 0 is the "down" stream (the default-permitted half); index >= 0 is
// the "up" stream.  Within one sort every integer names a distinct atom.
struct Atom {
  std::string sort;
  std::int64_t index = 0;

  bool isDown() const { return index < 0; }
  bool isUp() const { return index >= 0; }

  bool operator==(const Atom&) const = default;
  auto operator<=>(const Atom&) const = default;

  std::string display() const {
    return sort + "#" + std::to_string(index);
  }
};

using AtomSet = std::set<Atom>;

inline std::string displayAtomSet(const AtomSet& s) {
  std::string out = "{";
  bool first = true;
  for (const Atom& a : s) {
    if (!first) out += ", ";
    out += a.display();
    first = false;
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// Atom-set expressions
// ---------------------------------------------------------------------------

// A decidable representation for the two shapes of atom set the library
// manipulates:
//   - finite sets                          (includeDown = false, extras)
//   - (down-atoms-of-every-sort U A) \ B   (includeDown = true,  extras = A,
//                                           excludedDown = B)
// The second shape is the permission-set form: always infinite and
// co-infinite within each sort.  Free-atom sets of terms also take this form
// as soon as an unknown occurs.  Normal form: when includeDown is set,
// extras holds only up atoms and excludedDown only down atoms (a down atom
// inserted into the set simply leaves excludedDown); when includeDown is
// clear, excludedDown is empty.
struct AtomSetExpr {
  bool includeDown = false;
  AtomSet excludedDown;  // down atoms carved out of the down streams
  AtomSet extras;        // atoms added on top (up-only when includeDown)

  static AtomSetExpr finite(AtomSet atoms) {
    AtomSetExpr e;
    e.extras = std::move(atoms);
    return e;
  }

  static AtomSetExpr empty() { return AtomSetExpr{}; }

  static AtomSetExpr single(const Atom& a) { return finite({a}); }

  // The permission-set constructor: (downs U adds) \ removes.
  static AtomSetExpr permissive(AtomSet adds = {}, AtomSet removes = {}) {
    for (const Atom& a : adds)
      if (a.isDown())
        fail("permission set: added atom " + a.display() + " is not an up atom");
    for (const Atom& a : removes)
      if (!a.isDown())
        fail("permission set: removed atom " + a.display() + " is not a down atom");
    AtomSetExpr e;
    e.includeDown = true;
    e.extras = std::move(adds);
    e.excludedDown = std::move(removes);
    return e;
  }

  bool contains(const Atom& a) const {
    if (extras.count(a)) return true;
    return includeDown && a.isDown() && !excludedDown.count(a);
  }

  bool isFinite() const { return !includeDown; }

  void insert(const Atom& a) {
    if (includeDown && a.isDown())
      excludedDown.erase(a);
    else
      extras.insert(a);
  }

  void erase(const Atom& a) {
    extras.erase(a);
    if (includeDown && a.isDown()) excludedDown.insert(a);
  }

  bool operator==(const AtomSetExpr&) const = default;
  auto operator<=>(const AtomSetExpr&) const = default;

  std::string display() const {
    if (!includeDown) return displayAtomSet(extras);
    return "perm(+" + displayAtomSet(extras) + ",-" + displayAtomSet(excludedDown) + ")";
  }
};

using PermissionSet = AtomSetExpr;

inline AtomSetExpr unionSets(const AtomSetExpr& a, const AtomSetExpr& b) {
  AtomSetExpr out = a.includeDown ? a : b;
  const AtomSetExpr& other = a.includeDown ? b : a;
  if (a.includeDown && b.includeDown) {
    // Down atoms survive exclusion if either side keeps them.
    AtomSet ex;
    for (const Atom& x : a.excludedDown)
      if (b.excludedDown.count(x)) ex.insert(x);
    out.excludedDown = std::move(ex);
    for (const Atom& x : b.extras) out.insert(x);
    return out;
  }
  for (const Atom& x : other.extras) out.insert(x);
  return out;
}

// a \ b, for any mix of finite and co-down-finite operands.
inline AtomSetExpr minusSets(const AtomSetExpr& a, const AtomSetExpr& b) {
  if (!a.includeDown) {
    AtomSetExpr out;
    for (const Atom& x : a.extras)
      if (!b.contains(x)) out.extras.insert(x);
    return out;
  }
  if (!b.includeDown) {
    AtomSetExpr out = a;
    for (const Atom& x : b.extras) out.erase(x);
    return out;
  }
  // Both co-down-finite: the difference is finite — down atoms b excludes
  // but a keeps, plus up extras of a that b lacks.
  AtomSetExpr out;
  for (const Atom& x : b.excludedDown)
    if (a.contains(x)) out.extras.insert(x);
  for (const Atom& x : a.extras)
    if (!b.contains(x)) out.extras.insert(x);
  return out;
}

inline AtomSetExpr minusAtom(AtomSetExpr a, const Atom& x) {
  a.erase(x);
  return a;
}

// Returns an atom in a \ b, or nullopt when a is a subset of b.  The only
// case that cannot name a witness from the operands alone is infinite a
// versus finite b; sortHints supplies name sorts to draw a fresh down
// witness from there.
std::optional<Atom> subsetWitness(const AtomSetExpr& a, const AtomSetExpr& b,
                                  const std::vector<std::string>& sortHints = {});

inline bool isSubset(const AtomSetExpr& a, const AtomSetExpr& b) {
  if (a.includeDown && !b.includeDown) return false;
  return !subsetWitness(a, b).has_value();
}

// ---------------------------------------------------------------------------
// Permutations
// ---------------------------------------------------------------------------

// A sort-preserving bijection on atoms moving finitely many.  Canonical
// representation: only non-identity entries are stored, so equality of the
// entry maps is equality of the functions.
struct Permutation {
  std::map<Atom, Atom> entries;

  // Validates bijectivity and sort preservation; drops identity entries.
  static Permutation fromEntries(std::map<Atom, Atom> m) {
    Permutation p;
    AtomSet image;
    for (auto it = m.begin(); it != m.end();) {
      if (it->first == it->second) {
        it = m.erase(it);
        continue;
      }
      if (it->first.sort != it->second.sort)
        fail("permutation maps " + it->first.display() + " across sorts to " +
             it->second.display());
      if (!image.insert(it->second).second)
        fail("permutation is not injective at image " + it->second.display());
      ++it;
    }
    for (const auto& [k, v] : m)
      if (!m.count(v))
        fail("permutation domain does not cover image atom " + v.display());
    p.entries = std::move(m);
    return p;
  }

  Atom operator()(const Atom& a) const {
    auto it = entries.find(a);
    return it == entries.end() ? a : it->second;
  }

  bool isIdentity() const { return entries.empty(); }

  AtomSet nontriv() const {
    AtomSet s;
    for (const auto& [k, v] : entries) s.insert(k);
    return s;
  }

  bool operator==(const Permutation&) const = default;
  auto operator<=>(const Permutation&) const = default;

  // Cycle form, e.g. "((nu#-1 nu#0)(nu#1 nu#2))"; identity is "()".
  std::string display() const {
    if (entries.empty()) return "()";
    std::string out = "(";
    AtomSet seen;
    for (const auto& [start, unused] : entries) {
      if (seen.count(start)) continue;
      out += "(";
      Atom cur = start;
      bool first = true;
      do {
        if (!first) out += " ";
        out += cur.display();
        seen.insert(cur);
        cur = (*this)(cur);
        first = false;
      } while (cur != start);
      out += ")";
    }
    return out + ")";
  }
};

inline Permutation makeSwap(const Atom& a, const Atom& b) {
  if (a.sort != b.sort)
    fail("swap of " + a.display() + " and " + b.display() + " crosses sorts");
  if (a == b) return Permutation{};
  return Permutation::fromEntries({{a, b}, {b, a}});
}

// outer then after inner: (composePerm(s, p))(a) = s(p(a)).
inline Permutation composePerm(const Permutation& outer, const Permutation& inner) {
  std::map<Atom, Atom> m;
  for (const auto& [k, v] : inner.entries) m[k] = outer(v);
  for (const auto& [k, v] : outer.entries)
    if (!inner.entries.count(k)) m[k] = v;
  return Permutation::fromEntries(std::move(m));
}

inline Permutation inversePerm(const Permutation& p) {
  std::map<Atom, Atom> m;
  for (const auto& [k, v] : p.entries) m[v] = k;
  return Permutation::fromEntries(std::move(m));
}

inline AtomSet permImageFinite(const Permutation& p, const AtomSet& s) {
  AtomSet out;
  for (const Atom& a : s) out.insert(p(a));
  return out;
}

// Pointwise image of an atom-set expression.  Only the finitely many moved
// atoms can change membership: a is in p(S) iff p^-1(a) is in S.
inline AtomSetExpr permApplySet(const Permutation& p, const AtomSetExpr& s) {
  if (p.isIdentity()) return s;
  Permutation inv = inversePerm(p);
  AtomSetExpr out = s;
  for (const auto& [k, v] : p.entries) out.erase(k);
  for (const auto& [k, v] : p.entries)
    if (s.contains(inv(k))) out.insert(k);
  return out;
}

// ---------------------------------------------------------------------------
// Renamings
// ---------------------------------------------------------------------------

// A sort-preserving, finitely supported function on atoms; unlike a
// permutation it need not be injective.  Only non-identity entries are
// stored.  nontriv is domain plus image, so for the atomic renaming
// [a -> b] it is {a, b}.
struct Renaming {
  std::map<Atom, Atom> entries;

  static Renaming fromEntries(std::map<Atom, Atom> m) {
    Renaming r;
    for (auto it = m.begin(); it != m.end();) {
      if (it->first == it->second) {
        it = m.erase(it);
        continue;
      }
      if (it->first.sort != it->second.sort)
        fail("renaming maps " + it->first.display() + " across sorts to " +
             it->second.display());
      ++it;
    }
    r.entries = std::move(m);
    return r;
  }

  Atom operator()(const Atom& a) const {
    auto it = entries.find(a);
    return it == entries.end() ? a : it->second;
  }

  bool isIdentity() const { return entries.empty(); }

  AtomSet dom() const {
    AtomSet s;
    for (const auto& [k, v] : entries) s.insert(k);
    return s;
  }

  AtomSet nontriv() const {
    AtomSet s;
    for (const auto& [k, v] : entries) {
      s.insert(k);
      s.insert(v);
    }
    return s;
  }

  bool operator==(const Renaming&) const = default;
  auto operator<=>(const Renaming&) const = default;

  // Display "[a->b, c->b]"; identity is "[]".
  std::string display() const {
    std::string out = "[";
    bool first = true;
    for (const auto& [k, v] : entries) {
      if (!first) out += ", ";
      out += k.display() + "->" + v.display();
      first = false;
    }
    return out + "]";
  }
};

inline Atom applyRen(const Renaming& r, const Atom& a) { return r(a); }

inline Renaming makeAtomicRen(const Atom& a, const Atom& b) {
  if (a.sort != b.sort)
    fail("renaming " + a.display() + " -> " + b.display() + " crosses sorts");
  if (a == b) return Renaming{};
  return Renaming::fromEntries({{a, b}});
}

inline Renaming composeRen(const Renaming& outer, const Renaming& inner) {
  std::map<Atom, Atom> m;
  for (const auto& [k, v] : inner.entries) m[k] = outer(v);
  for (const auto& [k, v] : outer.entries)
    if (!inner.entries.count(k)) m[k] = v;
  return Renaming::fromEntries(std::move(m));
}

inline AtomSet renImageFinite(const Renaming& r, const AtomSet& s) {
  AtomSet out;
  for (const Atom& a : s) out.insert(r(a));
  return out;
}

// Lift a permutation to a renaming (every permutation is one).
inline Renaming renOfPerm(const Permutation& p) {
  return Renaming::fromEntries(p.entries);
}

// ---------------------------------------------------------------------------
// Freshness
// ---------------------------------------------------------------------------

// Deterministic fresh atom of the given sort outside `avoid`: the unused
// index of smallest magnitude on the requested stream (0, 1, 2, ... up;
// -1, -2, ... down).  Asking for a down atom outside a set that includes
// the down streams can only succeed through its exclusions, and fails
// once those are exhausted.
inline Atom freshAtom(const std::string& sort, const AtomSetExpr& avoid,
                      bool wantDown = false) {
  if (wantDown && avoid.includeDown) {
    // Candidates are exactly the exclusions of this sort, nearest zero first.
    std::optional<Atom> best;
    for (const Atom& a : avoid.excludedDown)
      if (a.sort == sort && (!best || a.index > best->index)) best = a;
    if (!best)
      fail("no fresh down atom of sort " + sort +
           " exists outside " + avoid.display());
    return *best;
  }
  for (std::int64_t i = 0;; ++i) {
    Atom cand{sort, wantDown ? -(i + 1) : i};
    if (!avoid.contains(cand)) return cand;
  }
}

inline Atom freshAtom(const std::string& sort, const AtomSet& avoid,
                      bool wantDown = false) {
  return freshAtom(sort, AtomSetExpr::finite(avoid), wantDown);
}

// ---------------------------------------------------------------------------
// Freshening pairs
// ---------------------------------------------------------------------------

// For a finite set A and a set S to stay clear of: rho1 moves each atom of A
// to a fresh up atom, rho2 moves it back, and the intermediate atoms avoid
// S and A entirely.  So rho2 . rho1 is the identity on A while the images
// under rho1 are untouched by anything supported inside S.
struct FresheningPair {
  Renaming rho1;
  Renaming rho2;
  AtomSetExpr avoid;
};

inline FresheningPair makeFresheningPair(const AtomSet& atoms,
                                         const AtomSetExpr& avoid) {
  FresheningPair fp;
  fp.avoid = avoid;
  AtomSetExpr used = unionSets(avoid, AtomSetExpr::finite(atoms));
  std::map<Atom, Atom> fwd, bwd;
  for (const Atom& a : atoms) {
    Atom c = freshAtom(a.sort, used, false);
    used.insert(c);
    fwd[a] = c;
    bwd[c] = a;
  }
  fp.rho1 = Renaming::fromEntries(std::move(fwd));
  fp.rho2 = Renaming::fromEntries(std::move(bwd));
  return fp;
}

// ---------------------------------------------------------------------------

inline std::optional<Atom> subsetWitness(const AtomSetExpr& a, const AtomSetExpr& b,
                                         const std::vector<std::string>& sortHints) {
  if (!a.includeDown) {
    for (const Atom& x : a.extras)
      if (!b.contains(x)) return x;
    return std::nullopt;
  }
  if (b.includeDown) {
    // a's down streams minus its exclusions must land inside b's, so b may
    // not exclude anything a keeps; and a's up extras must appear in b.
    for (const Atom& x : b.excludedDown)
      if (a.contains(x)) return x;
    for (const Atom& x : a.extras)
      if (!b.contains(x)) return x;
    return std::nullopt;
  }
  // Infinite a versus finite b: almost every down atom witnesses.  Draw the
  // sort from a's own data if possible, else from the hints.
  std::vector<std::string> sorts = sortHints;
  for (const Atom& x : a.excludedDown) sorts.push_back(x.sort);
  for (const Atom& x : a.extras) sorts.push_back(x.sort);
  for (const Atom& x : b.extras) sorts.push_back(x.sort);
  if (sorts.empty())
    fail("cannot name a witness atom: no name sort in scope");
  // A fresh down atom avoiding both b's members and a's exclusions lies in a
  // and outside b.
  AtomSet avoid = b.extras;
  for (const Atom& x : a.excludedDown) avoid.insert(x);
  return freshAtom(sorts.front(), avoid, true);
}

}  // namespace pnl
