// The higher-order side: types, canonical lambda storage, substitution,
// beta-normalization, the h-rule checker in strict and modulo-beta modes,
// and the text formats.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "pnl/hol.hpp"

using namespace pnl;

namespace {

HolSignature tinySig() {
    return parseHolSignature(
        "type i\n"
        "type mu_nu\n"
        "const c : i\n"
        "const f : i -> i\n"
        "const g : i -> i -> i\n"
        "const k : (i -> i) -> i\n"
        "const P : i -> o\n"
        "const gP : mu_nu -> o\n");
}

struct Ctx {
    HolSignature sig = tinySig();
    HolEnv env;

    HolTerm term(const std::string& s) {
        return parseHolTermString(sig, s, env);
    }
    HolCheckReport strict(const HolSequent& goal, const std::string& proof) {
        return checkHol(sig, env, goal, parseDerivationString(proof), false);
    }
    HolCheckReport upToBeta(const HolSequent& goal, const std::string& proof) {
        return checkHol(sig, env, goal, parseDerivationString(proof), true);
    }
};

}  // namespace

TEST_CASE("types print and parse") {
    HolSignature sig = tinySig();
    auto roundTrip = [&](const std::string& s) {
        Lexer lx(s);
        HolType ty = parseHolType(sig, lx);
        lx.expectEnd();
        return ty.display();
    };
    CHECK(roundTrip("i") == "i");
    CHECK(roundTrip("i -> i -> o") == "i -> i -> o");
    CHECK(roundTrip("(i -> i) -> o") == "(i -> i) -> o");
    CHECK(roundTrip("(i, i -> o)") == "(i, i -> o)");
    CHECK(roundTrip("(i)") == "i");
    CHECK(roundTrip("()") == "()");
    CHECK_THROWS_WITH(roundTrip("j"), Catch::Matchers::ContainsSubstring(
                                          "not a declared type"));
    CHECK_THROWS(HolType::tuple({HolType::base("i")}));
}

TEST_CASE("signature files reject duplicates and builtin names") {
    CHECK_THROWS_WITH(parseHolSignature("type i\ntype i\n"),
                      Catch::Matchers::ContainsSubstring("declared twice"));
    CHECK_THROWS_WITH(parseHolSignature("const imp : o\n"),
                      Catch::Matchers::ContainsSubstring("built in"));
    CHECK_THROWS_WITH(parseHolSignature("const h : j\n"),
                      Catch::Matchers::ContainsSubstring("not a declared"));
}

TEST_CASE("construction and type checking") {
    Ctx c;
    HolTerm id = c.term("\\X:i. X");
    CHECK(id->type == HolType::arrow(HolType::base("i"), HolType::base("i")));
    CHECK(holTypeCheck(c.sig, id) == id->type);

    HolTerm fc = c.term("f c");
    CHECK(fc->type == HolType::base("i"));
    CHECK_THROWS_WITH(c.term("f P"), Catch::Matchers::ContainsSubstring(
                                         "argument has type"));
    CHECK_THROWS_WITH(c.term("c c"), Catch::Matchers::ContainsSubstring(
                                         "non-function"));

    HolTerm pair = c.term("(c, f c)");
    CHECK(pair->type ==
          HolType::tuple({HolType::base("i"), HolType::base("i")}));

    HolTerm all = c.term("forall[i] P");
    CHECK(all->type == typeO());
    CHECK(holTypeCheck(c.sig, all) == typeO());

    // Constants unknown to a smaller signature fail re-derivation.
    HolSignature bare;
    CHECK_THROWS_WITH(holTypeCheck(bare, fc),
                      Catch::Matchers::ContainsSubstring("undeclared"));
}

TEST_CASE("alpha-equivalence is structural on the stored form") {
    Ctx c;
    CHECK(holAlphaEq(c.term("\\X:i. X"), c.term("\\Y:i. Y")));
    CHECK(holAlphaEq(c.term("\\X:i. \\Y:i. g X Y"),
                     c.term("\\U:i. \\V:i. g U V")));
    CHECK_FALSE(holAlphaEq(c.term("\\X:i. \\Y:i. X"),
                           c.term("\\Y:i. \\X:i. X")));
    // Same class through different binder names: both project the first.
    CHECK(holAlphaEq(c.term("\\X:i. \\Y:i. X"), c.term("\\Y:i. \\X:i. Y")));
    CHECK_FALSE(holAlphaEq(c.term("\\X:i. \\Y:i. X"),
                           c.term("\\X:i. \\Y:i. Y")));
    // Same binder name, different meaning: free vs bound.
    HolEnv env;
    HolTerm freeX = parseHolTermString(c.sig, "\\Y:i. X:i", env);
    CHECK_FALSE(holAlphaEq(freeX, c.term("\\Y:i. Y")));
    // Types matter.
    CHECK_FALSE(holAlphaEq(c.term("\\X:i. X"), c.term("\\X:o. X")));
}

TEST_CASE("substitution avoids capture by renaming the binder") {
    Ctx c;
    HolVar x{"X", HolType::base("i"), false};
    HolVar y{"Y", HolType::base("i"), false};

    // (\Y. X)[X := Y] must become a constant function returning the free Y.
    HolTerm constX = mkHolLam(y, mkHolVar(x));
    HolTerm after = holSubst(constX, x, mkHolVar(y));
    CHECK(after->fv.count(y) == 1);
    CHECK(holAlphaEq(mkHolApp(after, c.term("c")),
                     mkHolApp(c.term("\\Z:i. Y:i"), c.term("c"))));
    CHECK_FALSE(holAlphaEq(after, c.term("\\Y:i. Y")));

    // Free variables after substitution: (fv t minus X) union fv u.
    HolTerm t = c.term("g X:i (k (\\W:i. g W X))");
    HolTerm u = c.term("f Y:i");
    HolTerm r = holSubst(t, x, u);
    CHECK(r->fv.count(x) == 0);
    CHECK(r->fv.count(y) == 1);
    CHECK(holAlphaEq(r, c.term("g (f Y:i) (k (\\W:i. g W (f Y)))")));

    // No-op when the variable is absent, and type discipline on the way in.
    CHECK(holSubst(u, x, c.term("c")).get() == u.get());
    CHECK_THROWS_WITH(holSubst(t, x, c.term("P")),
                      Catch::Matchers::ContainsSubstring("substituting"));
}

TEST_CASE("beta-normalization computes normal forms") {
    Ctx c;
    CHECK(holAlphaEq(betaNormalize(c.term("(\\X:i. X) c")), c.term("c")));
    CHECK(holAlphaEq(betaNormalize(c.term("(\\X:i. \\Y:i. X) c (f c)")),
                     c.term("c")));
    CHECK(holAlphaEq(
        betaNormalize(c.term("(\\F:i -> i. \\X:i. F (F X)) f c")),
        c.term("f (f c)")));
    // Normal forms are fixed points.
    HolTerm n = betaNormalize(c.term("(\\F:i -> i. F (F c)) (\\X:i. f X)"));
    CHECK(holAlphaEq(n, c.term("f (f c)")));
    CHECK(betaNormalize(n).get() == n.get());
    // Reduction under binders and inside tuples.
    CHECK(holAlphaEq(betaNormalize(c.term("\\Y:i. (\\X:i. f X) Y")),
                     c.term("\\Y:i. f Y")));
    CHECK(holAlphaEq(betaNormalize(c.term("((\\X:i. X) c, f c)")),
                     c.term("(c, f c)")));
    // Typing is preserved.
    HolTerm big = c.term("(\\F:i -> i. \\X:i. F (F X)) (\\Y:i. g Y c)");
    CHECK(holTypeCheck(c.sig, betaNormalize(big)) ==
          holTypeCheck(c.sig, big));
}

TEST_CASE("deep arguments graft into shallow bodies without capture") {
    // A redex whose argument is lambda-deep and mentions the enclosing
    // binder.  Name-based storage schemes tend to re-aim that mention when
    // inner lambdas are rebuilt; here it must stay aimed at the outside.
    Ctx c;
    HolTerm t = c.term(
        "\\H:(i -> i -> i -> i -> i) -> i -> i. "
        "(\\U:i. \\V:i. g V U) "
        "(H (\\A:i. \\B:i. \\D:i. \\E:i. A) (H (\\A:i. \\B:i. \\D:i. \\E:i. "
        "B) c))");
    HolTerm n = betaNormalize(t);
    CHECK(holTypeCheck(c.sig, n) == t->type);
    CHECK(holAlphaEq(
        n, c.term("\\H2:(i -> i -> i -> i -> i) -> i -> i. \\V:i. g V "
                  "(H2 (\\A:i. \\B:i. \\D:i. \\E:i. A) "
                  "(H2 (\\A:i. \\B:i. \\D:i. \\E:i. B) c))")));
    // The printed form contains no reserved names and parses back equal.
    std::string shown = displayHolTerm(n);
    CHECK(shown.find('%') == std::string::npos);
    CHECK(holAlphaEq(parseHolTermString(c.sig, shown), n));
}

namespace {

// Applicative-order normalizer: reduce arguments first, then the redex.
// Used only to cross-check strategy independence.
HolTerm innermost(const HolTerm& t) {
    switch (t->kind) {
        case HolNode::Kind::Var:
        case HolNode::Kind::Bound:
        case HolNode::Kind::Const:
            return t;
        case HolNode::Kind::Lam:
            return mkHolLam(t->var, innermost(t->args[0]));
        case HolNode::Kind::Tuple: {
            std::vector<HolTerm> comps;
            for (const auto& x : t->args) comps.push_back(innermost(x));
            return mkHolTuple(std::move(comps));
        }
        case HolNode::Kind::App: {
            HolTerm fn = innermost(t->args[0]);
            HolTerm arg = innermost(t->args[1]);
            if (fn->kind == HolNode::Kind::Lam)
                return innermost(holInstantiate(fn, arg));
            return mkHolApp(fn, arg);
        }
    }
    fail("unreachable");
}

int holSize(const HolTerm& t) {
    int n = 1;
    for (const auto& x : t->args) n += holSize(x);
    return n;
}

// Random well-typed terms of type `want`, with `budget` constructors.
struct TermGen {
    std::mt19937 rng;
    HolType i = HolType::base("i");
    int fresh = 0;

    HolTerm go(const HolType& want, const std::vector<HolVar>& scope,
               int budget) {
        std::vector<int> moves;                       // 0 var/const, 1 lam,
        for (const HolVar& v : scope)                 // 2 redex, 3 apply
            if (v.type == want) { moves.push_back(0); break; }
        bool isArrow = want.kind == HolType::Kind::Arrow;
        if (want == i) moves.push_back(0);
        if (isArrow) moves.push_back(1);
        if (budget >= 4) { moves.push_back(2); moves.push_back(3); }
        switch (moves[rng() % moves.size()]) {
            case 0: {
                std::vector<HolTerm> pool;
                for (const HolVar& v : scope)
                    if (v.type == want) pool.push_back(mkHolVar(v));
                if (want == i && (pool.empty() || rng() % 2))
                    pool.push_back(mkHolConst("c", i));
                return pool[rng() % pool.size()];
            }
            case 1: {
                HolVar v{"v" + std::to_string(fresh++), want.args[0], false};
                auto inner = scope;
                inner.push_back(v);
                return mkHolLam(v, go(want.args[1], inner, budget - 1));
            }
            case 2: {
                HolType dom = rng() % 2 ? i : HolType::arrow(i, i);
                HolVar v{"v" + std::to_string(fresh++), dom, false};
                auto inner = scope;
                inner.push_back(v);
                HolTerm body = go(want, inner, budget / 2);
                return mkHolApp(mkHolLam(v, body),
                                go(dom, scope, budget / 2));
            }
            default: {
                HolTerm fn = go(HolType::arrow(i, want), scope, budget / 2);
                return mkHolApp(fn, go(i, scope, budget / 2));
            }
        }
    }
};

}  // namespace

TEST_CASE("normalization order does not matter on small terms") {
    TermGen gen{std::mt19937{20260822}};
    HolType i = HolType::base("i");
    std::vector<HolType> wants = {i, HolType::arrow(i, i),
                                  HolType::arrow(HolType::arrow(i, i), i)};
    int tried = 0;
    for (int round = 0; round < 400; ++round) {
        HolTerm t = gen.go(wants[round % wants.size()], {}, 8);
        if (holSize(t) > 12) continue;
        ++tried;
        HolTerm out = betaNormalize(t);
        HolTerm in = innermost(t);
        REQUIRE(holEq(out, in));
        CHECK(betaNormalize(out).get() == out.get());
        CHECK(out->type == t->type);
    }
    CHECK(tried > 100);
}

TEST_CASE("axiom and falsum rules") {
    Ctx c;
    HolTerm pc = c.term("P c");
    CHECK(c.strict(HolSequent{{pc}, {pc}}, "(hAx)").ok);
    CHECK_FALSE(c.strict(HolSequent{{pc}, {c.term("P (f c)")}}, "(hAx)").ok);
    CHECK(c.strict(HolSequent{{c.term("bot")}, {}}, "(hBotL)").ok);
    CHECK_FALSE(c.strict(HolSequent{{pc}, {}}, "(hBotL)").ok);

    // Atoms are variables: distinct atoms close nothing, and there is no
    // permutation to bridge them.
    HolTerm ga = c.term("gP nu#-1");
    HolTerm gb = c.term("gP nu#-2");
    CHECK(c.strict(HolSequent{{ga}, {ga}}, "(hAx)").ok);
    HolCheckReport r = c.strict(HolSequent{{ga}, {gb}}, "(hAx)");
    CHECK_FALSE(r.ok);
    CHECK(r.firstError.find("does not close") != std::string::npos);
    r = c.strict(HolSequent{{ga}, {gb}}, "(hAx :perm \"((nu#-1 nu#-2))\")");
    CHECK_FALSE(r.ok);
    CHECK(r.firstError.find("no permutation") != std::string::npos);
}

TEST_CASE("implication rules split as expected") {
    Ctx c;
    HolTerm pc = c.term("P c");
    HolTerm pfc = c.term("P (f c)");
    HolSequent mp{{pc, c.term("P c => P (f c)")}, {pfc}};
    CHECK(c.strict(mp, "(hImpL (hAx) (hAx))").ok);
    CHECK_FALSE(c.strict(mp, "(hImpL (hAx) (hBotL))").ok);
    CHECK(c.strict(HolSequent{{}, {c.term("P c => P c")}},
                   "(hImpR (hAx))")
              .ok);

    // Two implications on the left: selection must be told which.
    HolSequent two{{c.term("P c => bot"), c.term("P (f c) => bot"), pc}, {}};
    HolCheckReport amb = c.strict(two, "(hImpL (hAx) (hBotL))");
    CHECK_FALSE(amb.ok);
    CHECK(amb.firstError.find("supply :principal") != std::string::npos);
    CHECK(c.strict(two,
                   "(hImpL :principal \"P c => bot\" (hAx) (hBotL))")
              .ok);
}

TEST_CASE("universal instantiation on the left") {
    Ctx c;
    HolTerm all = c.term("forall[i] (\\X:i. P X)");
    CHECK(c.strict(HolSequent{{all}, {c.term("P (f c)")}},
                   "(hForallL :witness \"f c\" (hAx))")
              .ok);
    CHECK_FALSE(c.strict(HolSequent{{all}, {c.term("P (f c)")}},
                         "(hForallL :witness \"c\" (hAx))")
                    .ok);
    HolCheckReport r = c.strict(HolSequent{{all}, {c.term("P c")}},
                                "(hForallL :witness \"P\" (hAx))");
    CHECK_FALSE(r.ok);
    CHECK(r.firstError.find("witness has type") != std::string::npos);

    // The quantified thing need not be a lambda.
    CHECK(c.strict(HolSequent{{c.term("forall[i] P")}, {c.term("P c")}},
                   "(hForallL :witness \"c\" (hAx))")
              .ok);
}

TEST_CASE("strict checking is strictly finer than checking up to beta") {
    Ctx c;
    // The instance carries a beta-redex, so only the modulo-beta mode sees
    // it match the plain P c.
    HolTerm all = c.term("forall[i] (\\X:i. P ((\\Z:i. Z) X))");
    HolSequent goal{{all}, {c.term("P c")}};
    std::string proof = "(hForallL :witness \"c\" (hAx))";
    CHECK_FALSE(c.strict(goal, proof).ok);
    CHECK(c.upToBeta(goal, proof).ok);

    // Whatever the strict mode accepts, the modulo-beta mode accepts.
    std::vector<std::pair<HolSequent, std::string>> accepted = {
        {{{c.term("P c")}, {c.term("P c")}}, "(hAx)"},
        {{{all}, {c.term("P ((\\Z:i. Z) c)")}},
         "(hForallL :witness \"c\" (hAx))"},
        {{{}, {c.term("P c => P c")}}, "(hImpR (hAx))"},
    };
    for (const auto& [g, p] : accepted) {
        CHECK(c.strict(g, p).ok);
        CHECK(c.upToBeta(g, p).ok);
    }
}

TEST_CASE("eigenvariables on the right") {
    Ctx c;
    HolSequent refl{{}, {c.term("forall[i] (\\X:i. P X => P X)")}};
    CHECK(c.strict(refl, "(hForallR (hImpR (hAx)))").ok);
    CHECK(c.strict(refl, "(hForallR :X W (hImpR (hAx)))").ok);

    // The chosen name may not collide with anything in scope.
    HolSequent nested{
        {}, {c.term("forall[i] (\\X:i. forall[i] (\\Y:i. P X => P X))")}};
    CHECK(c.strict(nested, "(hForallR :X E (hForallR :X E2 (hImpR (hAx))))")
              .ok);
    HolCheckReport r = c.strict(
        nested, "(hForallR :X E (hForallR :X E (hImpR (hAx))))");
    CHECK_FALSE(r.ok);
    CHECK(r.firstError.find("already declared") != std::string::npos);

    HolEnv envWithFree;
    HolTerm freeSide = parseHolTermString(c.sig, "P E:i", envWithFree);
    HolSequent bad{{freeSide}, {c.term("forall[i] (\\X:i. P X)")}};
    r = c.strict(bad, "(hForallR :X E (hAx))");
    CHECK_FALSE(r.ok);
    CHECK(r.firstError.find("occurs free") != std::string::npos);

    // Proving forall from an instance must fail: the instance names the
    // eigenvariable only after the rule fires.
    HolSequent wrongWay{{c.term("P c")},
                        {c.term("forall[i] (\\X:i. P X)")}};
    CHECK_FALSE(c.strict(wrongWay, "(hForallR (hAx))").ok);
    // The other direction is fine.
    CHECK(c.strict(HolSequent{{c.term("forall[i] (\\X:i. P X)")},
                              {c.term("P c")}},
                   "(hForallL :witness \"c\" (hAx))")
              .ok);
}

TEST_CASE("report structure mirrors the derivation tree") {
    Ctx c;
    HolSequent mp{{c.term("P c"), c.term("P c => P (f c)")},
                  {c.term("P (f c)")}};
    HolCheckReport r = c.strict(mp, "(hImpL (hAx) (hAx))");
    REQUIRE(r.nodes.size() == 3);
    CHECK(r.nodes[0].path == "0");
    CHECK(r.nodes[1].path == "0.0");
    CHECK(r.nodes[2].path == "0.1");
    CHECK(r.root.premises.size() == 2);
    CHECK(holAlphaEq(r.root.principal, c.term("P c => P (f c)")));

    r = c.strict(mp, "(hImpL (hBotL) (hAx))");
    CHECK_FALSE(r.ok);
    CHECK(r.firstError.rfind("0.0:", 0) == 0);
    CHECK(r.nodes[1].ok == false);
    CHECK(r.nodes[2].ok == true);
}

TEST_CASE("problem files load and check end to end") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "holprob";
    fs::create_directories(dir);
    {
        std::ofstream sig(dir / "tiny.holsig");
        sig << "type i\nconst c : i\nconst P : i -> o\n";
        std::ofstream drv(dir / "inst.hdrv");
        drv << "// instantiating a universal at a constant\n"
            << "use tiny.holsig\n"
            << "assume forall[i] (\\X:i. P ((\\Z:i. Z) X))\n"
            << "show P c\n"
            << "proof\n"
            << "(hForallL :witness \"c\"\n"
            << "  (hAx))\n";
    }
    HolProblem pr = loadHolProblem((dir / "inst.hdrv").string());
    CHECK(pr.goal.left.size() == 1);
    CHECK(pr.goal.right.size() == 1);
    CHECK_FALSE(checkHol(pr.sig, pr.env, pr.goal, pr.proof, false).ok);
    CHECK(checkHol(pr.sig, pr.env, pr.goal, pr.proof, true).ok);
}

TEST_CASE("printing round-trips through the parser") {
    Ctx c;
    std::vector<std::string> samples = {
        "\\X:i. X",
        "\\F:i -> i. \\X:i. F (F X)",
        "forall[i] (\\X:i. P X => (P X => bot) => bot)",
        "g c (f c)",
        "(c, f c, P c)",
        "forall[i -> i] (\\F:i -> i. P (F c))",
        "gP nu#-1 => gP nu#-2",
    };
    for (const std::string& s : samples) {
        HolTerm t = c.term(s);
        HolTerm back = parseHolTermString(c.sig, displayHolTerm(t));
        CHECK(holAlphaEq(back, t));
    }
    // Free variables come out annotated exactly once.
    HolEnv env;
    HolTerm t = parseHolTermString(c.sig, "g X:i X", env);
    std::string shown = displayHolTerm(t);
    CHECK(shown == "g X:i X");
    HolTerm u = parseHolTermString(c.sig, "\\Y:i. g X:i (g X Y)", env);
    CHECK(holAlphaEq(parseHolTermString(c.sig, displayHolTerm(u)), u));
}
