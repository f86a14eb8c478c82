// Sequents and explicit derivation trees, with checkers for the full and
// restricted rule sets.
//
// A sequent is a pair of finite proposition sets.  Canonical forms make
// alpha-equivalence structural, so the sets deduplicate by plain equality
// and "does phi appear here" is a linear scan with hash-backed comparisons.
//
// Derivations are trees the caller supplies; there is no search.  A tree
// node names its rule and carries rule data as raw text (witness terms,
// axiom permutations, principal formulas); text is parsed against the
// signature at check time, because a quantifier rule can bring a fresh
// eigenvariable into scope for the witnesses above it.  The checker walks
// the tree from the end-sequent upward, computing each premise from the
// conclusion and the rule data, and records a verdict per node.
//
// Rules (contexts are sets; "minus" drops the principal, which :keep
// retains -- with set contexts that is an instance of the same rule under a
// different context split, so no strength is gained or lost):
//
//   ax       L, phi |- pi*phi, R          closes; pi from :perm, default id
//   axR      as ax with pi = id           the only axiom of restricted mode
//   botL     L, bot |- R                  closes
//   impL     L, phi=>psi |- R    from  L |- phi, R   and   L, psi |- R
//   impR     L |- phi=>psi, R    from  L, phi |- psi, R
//   forallL  L, forall X.phi |- R  from  L, phi[X:=witness] |- R
//            (witness sort and permission conditions re-checked here)
//   forallR  L |- forall X.phi, R  from  L |- phi[X:=E], R
//            where the eigenvariable E (named by :X, or invented) has the
//            binder's sort and permission set and is free nowhere else
//
// The restricted checker runs the same engine and differs exactly in
// rejecting a non-identity axiom permutation.
//
// File format for derivation problems (parsed by loadProblem):
//
//   use <signature path>          // relative to the derivation file
//   use <theory path>             // optional
//   assume <axiom name | proposition>     // repeatable; builds the left side
//   show <axiom name | proposition>       // repeatable; builds the right side
//   proof
//   (impR (ax))                   // one s-expression, to end of file
//
// S-expression nodes: (rule :key value ... premise premise ...), with
// :perm "((a b))", :witness "var(nu#0)", :principal "P(nu#0)", :X Name,
// and the bare flag :keep.

#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pnl/parse.hpp"
#include "pnl/syntax.hpp"

namespace pnl {

// ---------------------------------------------------------------------------
// Sequents
// ---------------------------------------------------------------------------

struct Sequent {
  std::vector<PnlProp> left;
  std::vector<PnlProp> right;
};

inline bool sideContains(const std::vector<PnlProp>& side, const PnlProp& p) {
  for (const auto& q : side)
    if (propEq(q, p)) return true;
  return false;
}

// Insert respecting set semantics: alpha-variants collapse.
inline void sideInsert(std::vector<PnlProp>& side, PnlProp p) {
  if (!sideContains(side, p)) side.push_back(std::move(p));
}

inline std::vector<PnlProp> sideWithout(const std::vector<PnlProp>& side,
                                        std::size_t idx) {
  std::vector<PnlProp> out;
  out.reserve(side.size());
  for (std::size_t i = 0; i < side.size(); ++i)
    if (i != idx) out.push_back(side[i]);
  return out;
}

inline Sequent mkSequent(const std::vector<PnlProp>& left,
                         const std::vector<PnlProp>& right) {
  Sequent s;
  for (const auto& p : left) sideInsert(s.left, p);
  for (const auto& p : right) sideInsert(s.right, p);
  return s;
}

inline std::string displaySequent(const Sequent& s) {
  std::string out;
  for (std::size_t i = 0; i < s.left.size(); ++i) {
    if (i) out += ", ";
    out += displayProp(s.left[i]);
  }
  if (!s.left.empty()) out += " ";
  out += "|-";
  for (std::size_t i = 0; i < s.right.size(); ++i) {
    out += i ? ", " : " ";
    out += displayProp(s.right[i]);
  }
  return out;
}

inline AtomSetExpr sequentFreeAtoms(const Sequent& s) {
  AtomSetExpr acc = AtomSetExpr::empty();
  for (const auto& p : s.left) acc = unionSets(acc, p->fa);
  for (const auto& p : s.right) acc = unionSets(acc, p->fa);
  return acc;
}

inline UnknownSet sequentFreeUnknowns(const Sequent& s) {
  UnknownSet acc;
  for (const auto& p : s.left) acc.insert(p->fU.begin(), p->fU.end());
  for (const auto& p : s.right) acc.insert(p->fU.begin(), p->fU.end());
  return acc;
}

// ---------------------------------------------------------------------------
// Derivation trees, as parsed
// ---------------------------------------------------------------------------

struct Derivation {
  std::string rule;
  std::string permText;        // ax: ":perm" value
  std::string principalText;   // impL/impR/forallL/forallR: ":principal" value
  std::string unknownName;     // forallR: eigenvariable; forallL: annotation
  std::string witnessText;     // forallL: ":witness" value
  bool keep = false;
  std::vector<Derivation> premises;
};

inline Derivation parseDerivation(Lexer& lx) {
  lx.expect(Token::Type::LParen, "'('");
  Token name = lx.expect(Token::Type::Ident, "a rule name");
  static const std::set<std::string> known = {
      "ax", "axR", "botL", "impL", "impR", "forallL", "forallR",
      "hAx", "hBotL", "hImpL", "hImpR", "hForallL", "hForallR"};
  if (!known.count(name.text))
    lx.synErr("unknown rule '" + name.text + "'");
  Derivation d;
  d.rule = name.text;
  while (lx.peek().type == Token::Type::Colon) {
    lx.next();
    Token key = lx.expect(Token::Type::Ident, "a keyword after ':'");
    if (key.text == "keep") {
      d.keep = true;
    } else if (key.text == "perm") {
      d.permText = lx.expect(Token::Type::String, "a quoted permutation").text;
    } else if (key.text == "principal") {
      d.principalText =
          lx.expect(Token::Type::String, "a quoted proposition").text;
    } else if (key.text == "witness") {
      d.witnessText = lx.expect(Token::Type::String, "a quoted term").text;
    } else if (key.text == "X") {
      d.unknownName = lx.expect(Token::Type::Ident, "an unknown name").text;
    } else {
      lx.synErr("unknown keyword ':" + key.text + "'");
    }
  }
  while (lx.peek().type == Token::Type::LParen)
    d.premises.push_back(parseDerivation(lx));
  lx.expect(Token::Type::RParen, "')'");
  return d;
}

inline Derivation parseDerivationString(const std::string& s) {
  Lexer lx(s);
  Derivation d = parseDerivation(lx);
  lx.expectEnd();
  return d;
}

inline std::string quoteForDerivation(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Inverse of parseDerivation: emits a tree that reparses to the same
// structure (quoted fields get their quotes and backslashes escaped).
inline std::string displayDerivation(const Derivation& d) {
  std::string out = "(" + d.rule;
  if (d.keep) out += " :keep";
  if (!d.permText.empty()) out += " :perm " + quoteForDerivation(d.permText);
  if (!d.principalText.empty())
    out += " :principal " + quoteForDerivation(d.principalText);
  if (!d.unknownName.empty()) out += " :X " + d.unknownName;
  if (!d.witnessText.empty())
    out += " :witness " + quoteForDerivation(d.witnessText);
  for (const Derivation& p : d.premises) out += " " + displayDerivation(p);
  return out + ")";
}

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

// One line per derivation node, in prefix walk order.
struct NodeStatus {
  std::string path;         // "0.1" = second premise of the first premise
  std::string rule;
  std::string conclusion;   // display of the sequent this node must prove
  bool ok = false;
  std::string message;      // failure reason, empty when ok
};

// The checked tree: conclusions attached, rule data parsed.  Consumed by the
// translation pipeline, which needs the per-node sequents and witnesses.
struct CheckedNode {
  Sequent conclusion;
  std::string rule;
  Permutation axPerm;               // ax
  PnlProp principal;                // impL/impR/forallL/forallR
  PnlTerm witness;                  // forallL
  Unknown eigen;                    // forallR
  bool keep = false;
  std::vector<CheckedNode> premises;
};

struct CheckReport {
  bool ok = false;
  std::string firstError;           // "<path>: <message>" of the first failure
  std::vector<NodeStatus> nodes;
  CheckedNode root;                 // meaningful only when ok
};

namespace detail {

struct ProofChecker {
  const PnlSignature& sig;
  bool restricted;
  CheckReport& rep;

  bool nodeFail(std::size_t slot, const std::string& msg) {
    rep.nodes[slot].ok = false;
    rep.nodes[slot].message = msg;
    if (rep.firstError.empty())
      rep.firstError = rep.nodes[slot].path + ": " + msg;
    return false;
  }

  // Principal selection: an explicit :principal formula wins; otherwise the
  // formula of the required shape must be unique on its side.
  std::size_t selectPrincipal(const std::vector<PnlProp>& side,
                              PropNode::Kind kind, const std::string& text,
                              UnknownEnv env, const char* rule,
                              const char* sideName) {
    const char* shape =
        kind == PropNode::Kind::Imp ? "implication" : "universal";
    if (!text.empty()) {
      PnlProp wanted = parsePropString(sig, text, env);
      for (std::size_t i = 0; i < side.size(); ++i)
        if (propEq(side[i], wanted)) {
          if (side[i]->kind != kind)
            fail(std::string(rule) + ": principal is not an " + shape);
          return i;
        }
      fail(std::string(rule) + ": principal not found on the " + sideName +
           " of the sequent");
    }
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < side.size(); ++i) {
      if (side[i]->kind != kind) continue;
      if (found)
        fail(std::string(rule) + ": several " + shape +
             "s to choose from; supply :principal");
      found = i;
    }
    if (!found)
      fail(std::string(rule) + ": no " + shape + " on the " + sideName);
    return *found;
  }

  bool check(const Derivation& d, Sequent concl, UnknownEnv env,
             CheckedNode& out, const std::string& path) {
    std::size_t slot = rep.nodes.size();
    rep.nodes.push_back(
        NodeStatus{path, d.rule, displaySequent(concl), true, ""});
    out.rule = d.rule;
    out.keep = d.keep;
    out.conclusion = concl;

    std::vector<Sequent> premiseSequents;
    std::vector<UnknownEnv> premiseEnvs;
    try {
      if (d.rule == "ax" || d.rule == "axR") {
        if (!d.premises.empty()) fail("axiom takes no premises");
        if (d.rule == "axR" && !d.permText.empty())
          fail("axR carries no permutation; use ax :perm");
        Permutation perm;
        if (!d.permText.empty()) perm = parsePermutationString(d.permText);
        if (restricted && !perm.isIdentity())
          fail("non-identity axiom permutation in a restricted derivation");
        out.axPerm = perm;
        bool closed = false;
        for (const auto& l : concl.left) {
          if (sideContains(concl.right, permActProp(perm, l))) {
            out.principal = l;
            closed = true;
            break;
          }
        }
        if (!closed)
          fail(perm.isIdentity()
                   ? "axiom does not close this sequent: no hypothesis "
                     "reappears on the right"
                   : "axiom does not close this sequent under " +
                         perm.display());
      } else if (d.rule == "botL") {
        if (!d.premises.empty()) fail("botL takes no premises");
        bool found = false;
        for (const auto& l : concl.left)
          if (l->kind == PropNode::Kind::Bot) found = true;
        if (!found) fail("botL: no falsum among the hypotheses");
      } else if (d.rule == "impL") {
        std::size_t i = selectPrincipal(concl.left, PropNode::Kind::Imp,
                                        d.principalText, env, "impL", "left");
        out.principal = concl.left[i];
        if (d.premises.size() != 2)
          fail("impL takes two premises, got " +
               std::to_string(d.premises.size()));
        std::vector<PnlProp> base =
            d.keep ? concl.left : sideWithout(concl.left, i);
        Sequent first{base, concl.right};
        sideInsert(first.right, out.principal->sub[0]);
        Sequent second{base, concl.right};
        sideInsert(second.left, out.principal->sub[1]);
        premiseSequents = {first, second};
        premiseEnvs = {env, env};
      } else if (d.rule == "impR") {
        std::size_t i = selectPrincipal(concl.right, PropNode::Kind::Imp,
                                        d.principalText, env, "impR", "right");
        out.principal = concl.right[i];
        if (d.premises.size() != 1) fail("impR takes one premise");
        Sequent prem{concl.left,
                     d.keep ? concl.right : sideWithout(concl.right, i)};
        sideInsert(prem.left, out.principal->sub[0]);
        sideInsert(prem.right, out.principal->sub[1]);
        premiseSequents = {prem};
        premiseEnvs = {env};
      } else if (d.rule == "forallL") {
        std::size_t i =
            selectPrincipal(concl.left, PropNode::Kind::Forall,
                            d.principalText, env, "forallL", "left");
        out.principal = concl.left[i];
        if (d.premises.size() != 1) fail("forallL takes one premise");
        if (d.witnessText.empty()) fail("forallL needs :witness");
        UnknownEnv witnessEnv = env;
        PnlTerm witness = parseTermString(sig, d.witnessText, witnessEnv);
        out.witness = witness;
        PnlProp inst = instantiateBody(out.principal->binder,
                                       out.principal->sub[0], witness);
        Sequent prem{d.keep ? concl.left : sideWithout(concl.left, i),
                     concl.right};
        sideInsert(prem.left, inst);
        premiseSequents = {prem};
        premiseEnvs = {witnessEnv};
      } else if (d.rule == "forallR") {
        std::size_t i =
            selectPrincipal(concl.right, PropNode::Kind::Forall,
                            d.principalText, env, "forallR", "right");
        out.principal = concl.right[i];
        if (d.premises.size() != 1) fail("forallR takes one premise");
        std::string name = d.unknownName;
        if (name.empty()) {
          // Invent an eigenvariable name clear of everything in scope.
          for (int k = 0;; ++k) {
            name = "E" + (k ? std::to_string(k) : std::string());
            if (!env.count(name)) break;
          }
        } else if (env.count(name)) {
          fail("forallR: eigenvariable name '" + name +
               "' is already declared");
        }
        const Unknown& binder = out.principal->binder;
        Unknown eigen{name, binder.sort, binder.pmss};
        Sequent prem{concl.left,
                     d.keep ? concl.right : sideWithout(concl.right, i)};
        auto freeHere = [&](const std::vector<PnlProp>& side) {
          for (const auto& p : side)
            for (const auto& u : p->fU)
              if (u.name == name)
                fail("forallR: eigenvariable '" + name +
                     "' occurs free in the sequent");
        };
        freeHere(prem.left);
        freeHere(prem.right);
        out.eigen = eigen;
        sideInsert(prem.right, instantiateBody(binder, out.principal->sub[0],
                                               mkUnknownTerm(eigen)));
        UnknownEnv inner = env;
        inner.emplace(name, eigen);
        premiseSequents = {prem};
        premiseEnvs = {inner};
      } else {
        fail("unknown rule '" + d.rule + "'");
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

inline CheckReport checkDerivation(const PnlSignature& sig,
                                   const UnknownEnv& env, const Sequent& goal,
                                   const Derivation& d, bool restricted) {
  CheckReport rep;
  detail::ProofChecker checker{sig, restricted, rep};
  try {
    for (const auto& p : goal.left) sortCheckProp(sig, p);
    for (const auto& p : goal.right) sortCheckProp(sig, p);
  } catch (const PnlError& e) {
    rep.ok = false;
    rep.firstError = std::string("goal: ") + e.what();
    return rep;
  }
  rep.ok = checker.check(d, mkSequent(goal.left, goal.right), env, rep.root,
                         "0");
  return rep;
}

inline CheckReport checkFull(const PnlSignature& sig, const UnknownEnv& env,
                             const Sequent& goal, const Derivation& d) {
  return checkDerivation(sig, env, goal, d, false);
}

inline CheckReport checkRestricted(const PnlSignature& sig,
                                   const UnknownEnv& env, const Sequent& goal,
                                   const Derivation& d) {
  return checkDerivation(sig, env, goal, d, true);
}

// ---------------------------------------------------------------------------
// Free-atom containment lint
// ---------------------------------------------------------------------------

// True when every sequent in the tree keeps its free atoms inside the free
// atoms of the end-sequent.  This is a diagnostic, not a validity condition:
// the rules as checked cannot actually grow the free-atom set on the way up
// (a quantifier witness must already live inside the bound unknown's
// permission set, which the conclusion's free atoms contain), so on checked
// derivations the lint holds; the sequent-list overload exists so the
// reporting path can be exercised at all.
inline bool faContainmentHolds(const PnlSignature& sig, const Sequent& end,
                               const std::vector<Sequent>& all,
                               std::string* offender = nullptr) {
  AtomSetExpr bound = sequentFreeAtoms(end);
  for (const auto& s : all) {
    if (auto w = subsetWitness(sequentFreeAtoms(s), bound,
                               sig.nameSortList())) {
      if (offender)
        *offender = displaySequent(s) + " mentions " + w->display();
      return false;
    }
  }
  return true;
}

inline bool faRestrictionLint(const PnlSignature& sig, const CheckedNode& root,
                              std::string* offender = nullptr) {
  std::vector<Sequent> all;
  std::vector<const CheckedNode*> stack{&root};
  while (!stack.empty()) {
    const CheckedNode* n = stack.back();
    stack.pop_back();
    all.push_back(n->conclusion);
    for (const auto& p : n->premises) stack.push_back(&p);
  }
  return faContainmentHolds(sig, root.conclusion, all, offender);
}

// ---------------------------------------------------------------------------
// Derivation problem files
// ---------------------------------------------------------------------------

struct DerivationFile {
  std::vector<std::string> uses;      // signature path, then optional theory
  std::vector<std::string> assumes;   // left side, axiom names or prop text
  std::vector<std::string> shows;     // right side, same convention
  Derivation proof;
};

inline DerivationFile parseDerivationFileText(const std::string& text) {
  DerivationFile df;
  std::istringstream in(text);
  std::string line;
  std::string proofText;
  bool inProof = false;
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    if (inProof) {
      proofText += line;
      proofText += '\n';
      continue;
    }
    if (std::size_t c = line.find("//"); c != std::string::npos)
      line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("use ", 0) == 0)
      df.uses.push_back(trim(line.substr(4)));
    else if (line.rfind("assume ", 0) == 0)
      df.assumes.push_back(trim(line.substr(7)));
    else if (line.rfind("show ", 0) == 0)
      df.shows.push_back(trim(line.substr(5)));
    else if (line == "proof")
      inProof = true;
    else
      fail("derivation file: unrecognized line '" + line + "'");
  }
  if (!inProof) fail("derivation file: missing proof section");
  df.proof = parseDerivationString(proofText);
  return df;
}

inline std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A loaded problem: everything needed to run a checker.
struct Problem {
  PnlSignature sig;
  Theory thy;
  UnknownEnv env;        // theory unknowns plus goal-level annotations
  Sequent goal;
  Derivation proof;
};

inline PnlProp resolveGoalProp(const PnlSignature& sig, const Theory& thy,
                               UnknownEnv& env, const std::string& text) {
  auto it = thy.axioms.find(text);
  if (text.find_first_of(" \t(") == std::string::npos &&
      it != thy.axioms.end())
    return it->second;
  return parsePropString(sig, text, env);
}

inline Problem loadProblem(const std::string& path) {
  DerivationFile df = parseDerivationFileText(readTextFile(path));
  std::string dir;
  if (std::size_t cut = path.find_last_of('/'); cut != std::string::npos)
    dir = path.substr(0, cut + 1);
  if (df.uses.empty()) fail(path + ": no signature named in a use line");
  if (df.uses.size() > 2) fail(path + ": at most a signature and a theory");
  Problem pr;
  pr.sig = parseSignature(readTextFile(dir + df.uses[0]));
  if (df.uses.size() == 2)
    pr.thy = parseTheory(pr.sig, readTextFile(dir + df.uses[1]));
  pr.env = pr.thy.unknowns;
  for (const auto& t : df.assumes)
    sideInsert(pr.goal.left, resolveGoalProp(pr.sig, pr.thy, pr.env, t));
  for (const auto& t : df.shows)
    sideInsert(pr.goal.right, resolveGoalProp(pr.sig, pr.thy, pr.env, t));
  pr.proof = df.proof;
  return pr;
}

}  // namespace pnl
