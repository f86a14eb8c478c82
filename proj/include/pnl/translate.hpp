#pragma once

// From nominal terms to simply-typed lambda terms.
//
// The reading is relative to an atom context: an ordered list D of distinct
// atoms.  Relative to D,
//   - an atom a becomes the variable a, of base type mu_s for s its sort;
//   - an unknown X becomes a function variable applied to atoms: writing
//     a1..ak for the part of D inside X's permission set, pi*X becomes
//       X@D pi(a1) ... pi(ak)
//     where X@D has the arrow type mu_s1 -> ... -> mu_sk -> T;
//   - abstraction [a]r becomes \a. r, deliberately capturing the atom
//     variable a in the body;
//   - quantification over X becomes quantification over X@D.
// Dependence on atoms is thereby made explicit in the applied arguments:
// where a nominal unknown sits under an abstraction and substitution may
// later push the abstracted atom into it, its translation is applied to
// that atom variable and the lambda captures it.
//
// The reading is faithful only for capture-typable subjects: every
// suspension pi*X must keep (moved(pi) u abstracted-above) n pmss(X)
// inside D.  On that fragment the translation is injective up to alpha;
// outside it distinct terms can collide (the tests exhibit collisions).
// captureInferMinimal computes the least context making a batch of
// subjects capture-typable, and translateDerivation maps whole checked
// sequent derivations rule by rule into a tree the higher-order checker
// accepts with beta-equality enabled.
//
// Everything here consumes the canonical (alpha-normal) storage forms, so
// the capture judgement and the translation are functions of alpha-classes
// by construction: they are defined on the representatives.

#include <algorithm>
#include <optional>
#include <vector>

#include "pnl/hol.hpp"
#include "pnl/proof.hpp"

namespace pnl {

// ---------------------------------------------------------------------------
// Atom contexts
// ---------------------------------------------------------------------------

// Always sorted by (sort name, index) and duplicate-free.  The order fixes
// the argument order of every function variable once and for all; atoms of
// several sorts may interleave, each contributing its own mu_ type.
using Dlist = std::vector<Atom>;

inline Dlist mkDlist(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  return atoms;
}

inline bool dlistContains(const Dlist& d, const Atom& a) {
  return std::binary_search(d.begin(), d.end(), a);
}

inline Dlist dlistInsert(Dlist d, const Atom& a) {
  auto it = std::lower_bound(d.begin(), d.end(), a);
  if (it == d.end() || !(*it == a)) d.insert(it, a);
  return d;
}

// D n S, order kept.
inline Dlist dlistRestrict(const Dlist& d, const AtomSetExpr& s) {
  Dlist out;
  for (const Atom& a : d)
    if (s.contains(a)) out.push_back(a);
  return out;
}

// Pointwise image, re-sorted into context order (a permutation preserves
// distinctness but rarely the ordering).
inline Dlist permDlist(const Permutation& p, const Dlist& d) {
  Dlist out;
  out.reserve(d.size());
  for (const Atom& a : d) out.push_back(p(a));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string displayDlist(const Dlist& d) {
  std::string out = "[";
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) out += ", ";
    out += d[i].display();
  }
  return out + "]";
}

// ---------------------------------------------------------------------------
// Sorts and signatures
// ---------------------------------------------------------------------------

// Name and base sorts both land on their own base type mu_<sort>;
// abstraction sorts become function types over the bound atom's type.
inline HolType translateSort(const PnlSort& s) {
  switch (s.kind) {
    case PnlSort::Kind::Name:
    case PnlSort::Kind::Base:
      return HolType::base("mu_" + s.name);
    case PnlSort::Kind::Tuple: {
      std::vector<HolType> comps;
      for (const PnlSort& c : s.args) comps.push_back(translateSort(c));
      return HolType::tuple(std::move(comps));
    }
    case PnlSort::Kind::Abs:
      return HolType::arrow(HolType::base("mu_" + s.name),
                            translateSort(s.args[0]));
  }
  fail("unreachable sort kind");
}

// The translated signature keeps a pointer back to its source so term
// translation can report in first-order vocabulary.
struct SigTranslation {
  HolSignature hol;
  const PnlSignature* src = nullptr;
};

inline SigTranslation translateSignature(const PnlSignature& sig) {
  sig.validate();
  SigTranslation out;
  out.src = &sig;
  for (const std::string& nu : sig.nameSorts)
    out.hol.baseTypes.insert("mu_" + nu);
  for (const std::string& tau : sig.baseSorts)
    out.hol.baseTypes.insert("mu_" + tau);
  for (const auto& [f, tf] : sig.termFormers) {
    HolType ty = HolType::arrow(translateSort(tf.domain),
                                HolType::base("mu_" + tf.result));
    if (!out.hol.constants.emplace("g_" + f, std::move(ty)).second)
      fail("term-former " + f + " clashes with another constant g_" + f);
  }
  for (const auto& [p, pf] : sig.propFormers) {
    HolType ty = HolType::arrow(translateSort(pf.domain), typeO());
    if (!out.hol.constants.emplace("g_" + p, std::move(ty)).second)
      fail("proposition-former " + p +
           " clashes with a term-former of the same name");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Function variables for unknowns
// ---------------------------------------------------------------------------

// The atoms of the context an unknown may actually depend on: D restricted
// to its permission set, in context order.
inline Dlist gammaFor(const Unknown& x, const Dlist& d) {
  return dlistRestrict(d, x.pmss);
}

// The context is baked into the variable name, so the same unknown read
// relative to two different contexts gives two different variables and the
// two readings can never be confused.  The lexer treats an attached
// "@[...]" as part of the identifier, so mangled names survive printing
// and reparsing.
inline std::string mangleUnknown(const std::string& name, const Dlist& d) {
  return name + "@" + displayDlist(d);
}

inline HolType unknownArrowType(const Unknown& x, const Dlist& d) {
  HolType ty = translateSort(x.sort);
  Dlist g = gammaFor(x, d);
  for (auto it = g.rbegin(); it != g.rend(); ++it)
    ty = HolType::arrow(HolType::base("mu_" + it->sort), std::move(ty));
  return ty;
}

inline HolVar holUnknownVar(const Unknown& x, const Dlist& d) {
  return HolVar{mangleUnknown(x.name, d), unknownArrowType(x, d), false};
}

// ---------------------------------------------------------------------------
// Capture typing
// ---------------------------------------------------------------------------

// A subject is capture-typable relative to D when every suspension pi*X in
// it satisfies (moved(pi) u A) n pmss(X) subseteq D, where A collects the
// atoms abstracted on the path down to the occurrence.  Intuition: the
// occurrence's translation is applied to exactly the context atoms in
// pmss(X), so an atom that a permutation moves or an abstraction may
// capture must be among the applied arguments or the reading forgets it.

namespace detail {

inline void captureNeedTerm(const PnlTerm& t, AtomSet& above, AtomSet& need) {
  switch (t->kind) {
    case TermNode::Kind::Atom:
      return;
    case TermNode::Kind::Susp:
      for (const auto& [a, b] : t->perm.entries)
        if (t->unk.pmss.contains(a)) need.insert(a);
      for (const Atom& a : above)
        if (t->unk.pmss.contains(a)) need.insert(a);
      return;
    case TermNode::Kind::Tuple:
    case TermNode::Kind::App:
      for (const PnlTerm& c : t->args) captureNeedTerm(c, above, need);
      return;
    case TermNode::Kind::Abs: {
      bool added = above.insert(t->atom).second;
      captureNeedTerm(t->args[0], above, need);
      if (added) above.erase(t->atom);
      return;
    }
  }
  fail("unreachable term kind");
}

inline void captureNeedProp(const PnlProp& p, AtomSet& above, AtomSet& need) {
  switch (p->kind) {
    case PropNode::Kind::Bot:
      return;
    case PropNode::Kind::Pred:
      captureNeedTerm(p->arg, above, need);
      return;
    case PropNode::Kind::Imp:
      captureNeedProp(p->sub[0], above, need);
      captureNeedProp(p->sub[1], above, need);
      return;
    case PropNode::Kind::Forall:
      // The bound unknown's suspensions are walked like any other; its
      // permission set decides what they need from the context.
      captureNeedProp(p->sub[0], above, need);
      return;
  }
  fail("unreachable prop kind");
}

}  // namespace detail

// The atoms a context must contain for the subject to be capture-typable;
// `abstracted` seeds the atoms already holding scope over the subject.
inline AtomSet captureNeeded(const PnlTerm& t, AtomSet abstracted = {}) {
  AtomSet need;
  detail::captureNeedTerm(t, abstracted, need);
  return need;
}

inline AtomSet captureNeededProp(const PnlProp& p) {
  AtomSet above, need;
  detail::captureNeedProp(p, above, need);
  return need;
}

inline bool captureCheck(const Dlist& d, const PnlTerm& t,
                         AtomSet abstracted = {}) {
  for (const Atom& a : captureNeeded(t, std::move(abstracted)))
    if (!dlistContains(d, a)) return false;
  return true;
}

inline bool captureCheckProp(const Dlist& d, const PnlProp& p) {
  for (const Atom& a : captureNeededProp(p))
    if (!dlistContains(d, a)) return false;
  return true;
}

// The least context making every listed subject capture-typable.  Least is
// meaningful because the needed atoms are a plain union over suspension
// occurrences; the result comes out in context order.
inline Dlist captureInferMinimal(const std::vector<PnlTerm>& terms,
                                 const std::vector<PnlProp>& props = {}) {
  AtomSet above, need;
  for (const PnlTerm& t : terms) detail::captureNeedTerm(t, above, need);
  for (const PnlProp& p : props) detail::captureNeedProp(p, above, need);
  return Dlist(need.begin(), need.end());
}

// ---------------------------------------------------------------------------
// Terms and propositions
// ---------------------------------------------------------------------------

inline HolTerm translateTerm(const SigTranslation& st, const PnlTerm& t,
                             const Dlist& d) {
  switch (t->kind) {
    case TermNode::Kind::Atom:
      return mkHolVar(atomVar(t->atom));
    case TermNode::Kind::Susp: {
      HolTerm acc = mkHolVar(holUnknownVar(t->unk, d));
      for (const Atom& a : gammaFor(t->unk, d))
        acc = mkHolApp(std::move(acc), mkHolVar(atomVar(t->perm(a))));
      return acc;
    }
    case TermNode::Kind::Tuple: {
      std::vector<HolTerm> comps;
      for (const PnlTerm& c : t->args)
        comps.push_back(translateTerm(st, c, d));
      return mkHolTuple(std::move(comps));
    }
    case TermNode::Kind::App: {
      auto it = st.hol.constants.find("g_" + t->former);
      if (it == st.hol.constants.end())
        fail("term-former " + t->former +
             " has no constant in the translated signature");
      return mkHolApp(mkHolConst(it->first, it->second),
                      translateTerm(st, t->args[0], d));
    }
    case TermNode::Kind::Abs:
      // The binder closes over the atom variable in the body: capturing it
      // is the whole point of reading abstraction as lambda.
      return mkHolLam(atomVar(t->atom), translateTerm(st, t->args[0], d));
  }
  fail("unreachable term kind");
}

inline HolTerm translateProp(const SigTranslation& st, const PnlProp& p,
                             const Dlist& d) {
  switch (p->kind) {
    case PropNode::Kind::Bot:
      return holBot();
    case PropNode::Kind::Pred: {
      auto it = st.hol.constants.find("g_" + p->former);
      if (it == st.hol.constants.end())
        fail("proposition-former " + p->former +
             " has no constant in the translated signature");
      return mkHolApp(mkHolConst(it->first, it->second),
                      translateTerm(st, p->arg, d));
    }
    case PropNode::Kind::Imp:
      return mkHolApp(mkHolApp(holImp(), translateProp(st, p->sub[0], d)),
                      translateProp(st, p->sub[1], d));
    case PropNode::Kind::Forall: {
      HolVar xv = holUnknownVar(p->binder, d);
      HolTerm body = translateProp(st, p->sub[0], d);
      return mkHolApp(holForallConst(xv.type),
                      mkHolLam(xv, std::move(body)));
    }
  }
  fail("unreachable prop kind");
}

inline HolSequent translateSequent(const SigTranslation& st, const Sequent& s,
                                   const Dlist& d) {
  HolSequent out;
  for (const PnlProp& p : s.left)
    holSideInsert(out.left, translateProp(st, p, d));
  for (const PnlProp& p : s.right)
    holSideInsert(out.right, translateProp(st, p, d));
  return out;
}

// ---------------------------------------------------------------------------
// Derivations
// ---------------------------------------------------------------------------

// A checked first-order derivation carried over: the context it was read
// at, the end-sequent's unknowns as function variables, the translated
// end-sequent, and a rule tree for the higher-order checker.  The tree is
// accepted with beta-equality enabled: a quantifier witness translates to
// a lambda, so instances arise beta-expanded.
struct TranslatedDerivation {
  Dlist context;
  HolEnv env;
  HolSequent goal;
  Derivation proof;
};

namespace detail {

inline void collectCaptureSubjects(const CheckedNode& n,
                                   std::vector<PnlTerm>& terms,
                                   std::vector<PnlProp>& props) {
  for (const PnlProp& p : n.conclusion.left) props.push_back(p);
  for (const PnlProp& p : n.conclusion.right) props.push_back(p);
  if (n.witness) terms.push_back(n.witness);
  for (const CheckedNode& pr : n.premises)
    collectCaptureSubjects(pr, terms, props);
}

inline void requireCaptureTyped(const CheckedNode& n, const Dlist& d) {
  AtomSet above, need;
  for (const PnlProp& p : n.conclusion.left) captureNeedProp(p, above, need);
  for (const PnlProp& p : n.conclusion.right) captureNeedProp(p, above, need);
  if (n.witness) captureNeedTerm(n.witness, above, need);
  AtomSet missing;
  for (const Atom& a : need)
    if (!dlistContains(d, a)) missing.insert(a);
  if (!missing.empty())
    fail("sequent " + displaySequent(n.conclusion) +
         " is not capture-typable relative to " + displayDlist(d) +
         "; the context additionally needs " + displayAtomSet(missing));
  for (const CheckedNode& pr : n.premises) requireCaptureTyped(pr, d);
}

inline Derivation emitNode(const SigTranslation& st, const CheckedNode& n,
                           const Dlist& d) {
  Derivation out;
  out.keep = n.keep;
  if (n.rule == "ax" || n.rule == "axR") {
    if (!n.axPerm.isIdentity())
      fail("axiom closes its sequent only up to the permutation " +
           n.axPerm.display() +
           "; the two sides read as different applications of the same "
           "function variable, so carrying the step over would be unsound "
           "— only identity axiom links translate");
    out.rule = "hAx";
  } else if (n.rule == "botL") {
    out.rule = "hBotL";
  } else if (n.rule == "impL" || n.rule == "impR") {
    out.rule = n.rule == "impL" ? "hImpL" : "hImpR";
    out.principalText = displayHolTerm(translateProp(st, n.principal, d));
  } else if (n.rule == "forallL") {
    out.rule = "hForallL";
    out.principalText = displayHolTerm(translateProp(st, n.principal, d));
    // The witness for the function variable: the first-order witness
    // abstracted over the atoms the bound unknown may depend on.
    HolTerm w = translateTerm(st, n.witness, d);
    Dlist g = gammaFor(n.principal->binder, d);
    for (auto it = g.rbegin(); it != g.rend(); ++it)
      w = mkHolLam(atomVar(*it), std::move(w));
    out.witnessText = displayHolTerm(w);
  } else if (n.rule == "forallR") {
    out.rule = "hForallR";
    out.principalText = displayHolTerm(translateProp(st, n.principal, d));
    out.unknownName = mangleUnknown(n.eigen.name, d);
  } else {
    fail("rule '" + n.rule + "' has no higher-order counterpart");
  }
  for (const CheckedNode& pr : n.premises)
    out.premises.push_back(emitNode(st, pr, d));
  return out;
}

}  // namespace detail

// Reads a whole checked derivation at one context.  When none is supplied
// the least one covering every sequent and witness in the tree is
// inferred; a supplied context must cover them, and the first sequent it
// fails is reported together with the atoms it lacks.  Axiom nodes closed
// under a non-identity permutation are rejected: they have no sound
// higher-order counterpart.
inline TranslatedDerivation translateDerivation(
    const SigTranslation& st, const CheckedNode& root,
    std::optional<Dlist> context = std::nullopt) {
  TranslatedDerivation out;
  if (context) {
    out.context = mkDlist(std::move(*context));
  } else {
    std::vector<PnlTerm> terms;
    std::vector<PnlProp> props;
    detail::collectCaptureSubjects(root, terms, props);
    out.context = captureInferMinimal(terms, props);
  }
  detail::requireCaptureTyped(root, out.context);
  for (const auto* side : {&root.conclusion.left, &root.conclusion.right})
    for (const PnlProp& p : *side)
      for (const Unknown& u : p->fU) {
        HolVar v = holUnknownVar(u, out.context);
        out.env.emplace(v.name, v);
      }
  out.goal = translateSequent(st, root.conclusion, out.context);
  out.proof = detail::emitNode(st, root, out.context);
  return out;
}

// ---------------------------------------------------------------------------
// Guarding predicates with a spare unknown
// ---------------------------------------------------------------------------

// A proposition whose predicates each carry one extra unknown argument of a
// fresh base sort is never closed under level-1 permutations for trivial
// reasons: the guard's suspension records the permutation.  The guarded
// signature gives every proposition-former the pair domain (tau_pi, old);
// pairing rather than splicing keeps the old argument intact even when it
// is an opaque tuple-sorted unknown.

inline const char* const kGuardSortName = "tau_pi";

inline PnlSignature piGuardSignature(const PnlSignature& sig) {
  if (sig.isNameSort(kGuardSortName) || sig.isBaseSort(kGuardSortName))
    fail(std::string("signature already declares ") + kGuardSortName);
  PnlSignature out = sig;
  out.baseSorts.insert(kGuardSortName);
  for (auto& [p, pf] : out.propFormers)
    pf.domain =
        PnlSort::tuple({PnlSort::baseSort(kGuardSortName), pf.domain});
  return out;
}

namespace detail {

inline PnlProp piGuardWalk(const PnlSignature& guarded, const PnlProp& p,
                           const PnlTerm& zt) {
  switch (p->kind) {
    case PropNode::Kind::Bot:
      return p;
    case PropNode::Kind::Pred:
      return mkPred(guarded, p->former, mkTuple({zt, p->arg}));
    case PropNode::Kind::Imp:
      return mkImp(piGuardWalk(guarded, p->sub[0], zt),
                   piGuardWalk(guarded, p->sub[1], zt));
    case PropNode::Kind::Forall:
      return mkForall(p->binder, piGuardWalk(guarded, p->sub[0], zt));
  }
  fail("unreachable prop kind");
}

}  // namespace detail

// Threads the guard unknown through every predicate of the proposition.
// The guard must have the guard sort and a permission set wide enough to
// mention every free atom of the subject, or its own permission set would
// censor the proposition.
inline PnlProp piGuardProp(const PnlSignature& guarded, const PnlProp& phi,
                           const Unknown& z) {
  if (!(z.sort == PnlSort::baseSort(kGuardSortName)))
    fail("guard unknown " + z.name + " has sort " + z.sort.display() +
         ", expected " + kGuardSortName);
  if (auto w = subsetWitness(freeAtomsProp(phi), z.pmss))
    fail("free atom " + w->display() +
         " of the proposition is outside the guard unknown's permission "
         "set " + z.pmss.display());
  return detail::piGuardWalk(guarded, phi, mkUnknownTerm(z));
}

}  // namespace pnl
