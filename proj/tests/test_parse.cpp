#include <catch2/catch_amalgamated.hpp>

#include "common.hpp"
#include "pnl/parse.hpp"

using namespace pnl;

static const PnlSignature sig = makeLambdaSig();

static const char* kSigText = R"(
// untyped lambda calculus over one name sort
namesort nu
basesort iota
term var : (nu) iota
term app : (iota, iota) iota
term lam : ([nu]iota) iota
prop eq : (iota, iota)
prop P : (nu)
prop Pabs : ([nu]iota)
prop Q : (nu, nu)
)";

TEST_CASE("signature files parse") {
  PnlSignature s = parseSignature(kSigText);
  CHECK(s.nameSorts == std::set<std::string>{"nu"});
  CHECK(s.baseSorts == std::set<std::string>{"iota"});
  CHECK(s.termFormers.at("lam").domain == PnlSort::abs("nu", iotaSort()));
  CHECK(s.termFormers.at("app").domain ==
        PnlSort::tuple({iotaSort(), iotaSort()}));
  CHECK(s.termFormers.at("var").domain == nuSort());
  CHECK(s.propFormers.at("Q").domain == PnlSort::tuple({nuSort(), nuSort()}));

  CHECK_THROWS_AS(parseSignature("term f : (nope) iota"), PnlError);
  CHECK_THROWS_AS(parseSignature("basesort t\nterm f : (t) t\nterm f : (t) t"),
                  PnlError);
  CHECK_THROWS_AS(parseSignature("namesort n\nbasesort n"), PnlError);
}

TEST_CASE("atoms, sets, permutations and renamings round-trip") {
  CHECK(parseAtomSetExprString("{nu#0, nu#-1}") ==
        AtomSetExpr::finite({nuA(0), nuA(-1)}));
  AtomSetExpr p = AtomSetExpr::permissive({nuA(0)}, {nuA(-1)});
  CHECK(parseAtomSetExprString(p.display()) == p);
  CHECK(parseAtomSetExprString("perm(+{},-{})") == AtomSetExpr::permissive());

  Permutation pi = composePerm(makeSwap(nuA(-1), nuA(0)), makeSwap(nuA(1), nuA(2)));
  CHECK(parsePermutationString(pi.display()) == pi);
  CHECK(parsePermutationString("()").isIdentity());
  CHECK(parsePermutationString("((nu#0 nu#1 nu#2))")(nuA(2)) == nuA(0));
  CHECK_THROWS_AS(parsePermutationString("((nu#0))"), PnlError);
  CHECK_THROWS_AS(parsePermutationString("((nu#0 mu#0))"), PnlError);

  Renaming r = Renaming::fromEntries({{nuA(0), nuA(2)}, {nuA(1), nuA(2)}});
  CHECK(parseRenamingString(r.display()) == r);
  CHECK(parseRenamingString("[]").isIdentity());
  CHECK_THROWS_AS(parseRenamingString("[nu#0->nu#1, nu#0->nu#2]"), PnlError);
}

TEST_CASE("terms parse and round-trip through display") {
  UnknownEnv env;
  PnlTerm t = parseTermString(
      sig, "lam([nu#-1] app(var(nu#-1), ((nu#-1 nu#-2))*X:iota#perm(+{},-{})))",
      env);
  CHECK(sortCheck(sig, t) == iotaSort());
  // Canonical form: binder moved to the first free up atom, the swap
  // absorbed into the suspension as a three-cycle.
  CHECK(displayTerm(t) ==
        "lam([nu#0] app(var(nu#0), ((nu#-2 nu#0 nu#-1))*X:iota#perm(+{},-{})))");

  // print-then-parse is the identity on canonical forms.
  UnknownEnv env2;
  CHECK(termEq(parseTermString(sig, displayTerm(t), env2), t));

  // Tuples, groupings, empty tuples.
  CHECK(termEq(parseTermString(sig, "(var(nu#0))"),
               parseTermString(sig, "var(nu#0)")));
  PnlTerm pair = parseTermString(sig, "(var(nu#0), var(nu#1))");
  CHECK(pair->sort == PnlSort::tuple({iotaSort(), iotaSort()}));
  CHECK(parseTermString(sig, "()")->sort == PnlSort::tuple({}));

  // Suspensions: identity needs no permutation, annotation only once.
  UnknownEnv env3;
  PnlTerm s1 = parseTermString(sig, "app(X:iota#perm(+{},-{}), X)", env3);
  CHECK(freeUnknowns(s1).size() == 1);
  CHECK(env3.count("X") == 1);

  // Trailing content after a complete term is an error.
  CHECK_THROWS_WITH(parseTermString(sig, "var(nu#0) var(nu#1)"),
                    Catch::Matchers::ContainsSubstring("end of input"));
  CHECK_THROWS_WITH(parseTermString(sig, "Y"),
                    Catch::Matchers::ContainsSubstring("annotation"));
  // Inconsistent re-annotation is an error.
  CHECK_THROWS_WITH(
      parseTermString(sig, "(X:iota#perm(+{},-{}), X:nu#perm(+{},-{}))"),
      Catch::Matchers::ContainsSubstring("differently"));
  // Reserved names are rejected outright.
  CHECK_THROWS_WITH(parseTermString(sig, "$0"),
                    Catch::Matchers::ContainsSubstring("reserved"));
}

TEST_CASE("propositions parse and round-trip through display") {
  PnlProp p = parsePropString(
      sig,
      "forall X:iota#perm(+{},-{nu#-1}). eq(X, X) => (bot => Pabs([nu#-1] X))");
  CHECK(p->kind == PropNode::Kind::Forall);
  UnknownEnv env;
  CHECK(propEq(parsePropString(sig, displayProp(p), env), p));

  // Implication is right-associative; parentheses override.
  PnlProp a = parsePropString(sig, "bot => bot => bot");
  CHECK(propEq(a, mkImp(mkBot(), mkImp(mkBot(), mkBot()))));
  PnlProp b = parsePropString(sig, "(bot => bot) => bot");
  CHECK(propEq(b, mkImp(mkImp(mkBot(), mkBot()), mkBot())));

  // Multi-binder sugar nests left-to-right.
  PnlProp m = parsePropString(
      sig, "forall A:iota#perm(+{},-{}), B:iota#perm(+{},-{}). eq(A, B)");
  PnlProp n = parsePropString(
      sig,
      "forall A:iota#perm(+{},-{}). forall B:iota#perm(+{},-{}). eq(A, B)");
  CHECK(propEq(m, n));

  // Quantifier body extends maximally to the right.
  PnlProp q = parsePropString(
      sig, "bot => forall A:iota#perm(+{},-{}). eq(A, A) => bot");
  CHECK(q->kind == PropNode::Kind::Imp);
  CHECK(q->sub[1]->kind == PropNode::Kind::Forall);
  CHECK(q->sub[1]->sub[0]->kind == PropNode::Kind::Imp);

  // Shadowing: the inner binder wins in its scope.
  PnlProp sh = parsePropString(
      sig,
      "forall A:iota#perm(+{},-{}). forall A:nu#perm(+{},-{}). P(A)");
  CHECK(sh->binder.sort == iotaSort());
  CHECK(sh->sub[0]->binder.sort == nuSort());
  CHECK(freeUnknownsProp(sh).empty());

  CHECK_THROWS_AS(parsePropString(sig, "forall X:iota#{nu#0}. bot"), PnlError);
  CHECK_THROWS_WITH(parsePropString(sig, "eq(var(nu#0))"),
                    Catch::Matchers::ContainsSubstring("expects"));
}

TEST_CASE("theory files parse") {
  Theory thy = parseTheory(sig, R"(
    unknown Z : iota # perm(+{},-{nu#-1})
    axiom triv : forall X:iota#perm(+{},-{}). eq(X, X)
    axiom useZ : eq(Z, Z)
  )");
  CHECK(thy.unknowns.count("Z"));
  CHECK(thy.unknowns.at("Z").pmss == AtomSetExpr::permissive({}, {nuA(-1)}));
  CHECK(thy.axiomOrder == std::vector<std::string>{"triv", "useZ"});
  CHECK(freeUnknownsProp(thy.axioms.at("useZ")) ==
        UnknownSet{thy.unknowns.at("Z")});

  CHECK_THROWS_AS(parseTheory(sig, "axiom a : bot\naxiom a : bot"), PnlError);
  CHECK_THROWS_AS(parseTheory(sig, "unknown Z : iota # perm(+{},-{})\n"
                                   "unknown Z : iota # perm(+{},-{})"),
                  PnlError);
}

TEST_CASE("display names dodge free unknowns") {
  // A free unknown named X0 must not collide with the display name of a
  // bound one.
  UnknownEnv env;
  PnlProp p = parsePropString(
      sig, "forall B:iota#perm(+{},-{}). eq(B, X0:iota#perm(+{},-{}))", env);
  std::string shown = displayProp(p);
  CHECK(shown.find("forall X0_") != std::string::npos);
  UnknownEnv env2;
  CHECK(propEq(parsePropString(sig, shown, env2), p));
}
