#include <catch2/catch_amalgamated.hpp>

#include "pnl/atoms.hpp"

using namespace pnl;

static Atom nu(std::int64_t i) { return Atom{"nu", i}; }
static Atom mu(std::int64_t i) { return Atom{"mu", i}; }

TEST_CASE("atom basics") {
  CHECK(nu(-3).display() == "nu#-3");
  CHECK(nu(-1).isDown());
  CHECK(nu(0).isUp());
  CHECK(nu(0) != mu(0));
  CHECK(nu(-2) < nu(-1));
  CHECK(nu(-1) < nu(0));
}

TEST_CASE("atom set expressions: membership and normal form") {
  AtomSetExpr fin = AtomSetExpr::finite({nu(0), nu(-1)});
  CHECK(fin.contains(nu(0)));
  CHECK(fin.contains(nu(-1)));
  CHECK_FALSE(fin.contains(nu(1)));

  AtomSetExpr p = AtomSetExpr::permissive({nu(0)}, {nu(-1)});
  CHECK(p.contains(nu(-2)));
  CHECK(p.contains(mu(-7)));   // down atoms of every sort
  CHECK(p.contains(nu(0)));
  CHECK_FALSE(p.contains(nu(-1)));
  CHECK_FALSE(p.contains(nu(1)));

  // Inserting an excluded down atom restores it via the exclusion list.
  AtomSetExpr q = p;
  q.insert(nu(-1));
  CHECK(q == AtomSetExpr::permissive({nu(0)}, {}));
  // Erasing a down atom from a co-down-finite set records an exclusion.
  q.erase(nu(-5));
  CHECK(q.excludedDown == AtomSet{nu(-5)});
  CHECK(q.extras == AtomSet{nu(0)});

  CHECK_THROWS_AS(AtomSetExpr::permissive({nu(-1)}, {}), PnlError);
  CHECK_THROWS_AS(AtomSetExpr::permissive({}, {nu(1)}), PnlError);
}

TEST_CASE("atom set expressions: union and difference") {
  AtomSetExpr p1 = AtomSetExpr::permissive({nu(0)}, {nu(-1), nu(-2)});
  AtomSetExpr p2 = AtomSetExpr::permissive({nu(1)}, {nu(-2), nu(-3)});
  AtomSetExpr u = unionSets(p1, p2);
  CHECK(u.contains(nu(-1)));       // kept by p2
  CHECK(u.contains(nu(-3)));       // kept by p1
  CHECK_FALSE(u.contains(nu(-2))); // excluded by both
  CHECK(u.contains(nu(0)));
  CHECK(u.contains(nu(1)));

  AtomSetExpr fin = AtomSetExpr::finite({nu(-1), nu(7)});
  AtomSetExpr uf = unionSets(p1, fin);
  CHECK(uf.contains(nu(-1)));
  CHECK(uf.contains(nu(7)));
  CHECK(uf.includeDown);

  AtomSetExpr d = minusSets(p1, p2);
  CHECK(d.isFinite());
  CHECK(d.extras == AtomSet{nu(-3), nu(0)});

  AtomSetExpr d2 = minusSets(p1, AtomSetExpr::finite({nu(0), nu(-5)}));
  CHECK_FALSE(d2.contains(nu(0)));
  CHECK_FALSE(d2.contains(nu(-5)));
  CHECK(d2.contains(nu(-3)));

  CHECK(minusAtom(AtomSetExpr::finite({nu(1)}), nu(1)).extras.empty());
}

TEST_CASE("subset decisions with witnesses") {
  AtomSetExpr p1 = AtomSetExpr::permissive({}, {nu(-1)});
  AtomSetExpr p2 = AtomSetExpr::permissive({nu(0)}, {});
  CHECK(isSubset(p1, p2));
  CHECK_FALSE(isSubset(p2, p1));
  auto w = subsetWitness(p2, p1);
  REQUIRE(w.has_value());
  CHECK((*w == nu(-1) || *w == nu(0)));
  CHECK(p2.contains(*w));
  CHECK_FALSE(p1.contains(*w));

  CHECK(isSubset(AtomSetExpr::finite({nu(-4)}), p1));
  auto w2 = subsetWitness(AtomSetExpr::finite({nu(-1)}), p1);
  REQUIRE(w2.has_value());
  CHECK(*w2 == nu(-1));

  // Infinite left against finite right: the witness is drawn fresh.
  auto w3 = subsetWitness(p1, AtomSetExpr::finite({nu(-2)}));
  REQUIRE(w3.has_value());
  CHECK(p1.contains(*w3));
  CHECK(*w3 != nu(-2));

  auto w4 = subsetWitness(AtomSetExpr::permissive(), AtomSetExpr::finite({}), {"nu"});
  REQUIRE(w4.has_value());
  CHECK(w4->isDown());
}

TEST_CASE("permutations: construction and laws") {
  Permutation sw = makeSwap(nu(-1), nu(0));
  CHECK(sw(nu(-1)) == nu(0));
  CHECK(sw(nu(0)) == nu(-1));
  CHECK(sw(nu(1)) == nu(1));
  CHECK(sw.nontriv() == AtomSet{nu(-1), nu(0)});
  CHECK(composePerm(sw, sw).isIdentity());
  CHECK(inversePerm(sw) == sw);
  CHECK(makeSwap(nu(2), nu(2)).isIdentity());
  CHECK_THROWS_AS(makeSwap(nu(0), mu(0)), PnlError);

  Permutation c =
      Permutation::fromEntries({{nu(0), nu(1)}, {nu(1), nu(2)}, {nu(2), nu(0)}});
  Permutation cInv = inversePerm(c);
  CHECK(composePerm(c, cInv).isIdentity());
  CHECK(composePerm(cInv, c).isIdentity());
  Permutation both = composePerm(c, sw);
  for (auto a : {nu(-1), nu(0), nu(1), nu(2), nu(5)})
    CHECK(both(a) == c(sw(a)));

  CHECK_THROWS_AS(Permutation::fromEntries({{nu(0), nu(1)}, {nu(2), nu(1)}}),
                  PnlError);
  CHECK_THROWS_AS(Permutation::fromEntries({{nu(0), nu(1)}}), PnlError);
  CHECK(Permutation::fromEntries({{nu(0), nu(0)}}).isIdentity());
}

TEST_CASE("permutation display uses cycle form") {
  CHECK(Permutation{}.display() == "()");
  CHECK(makeSwap(nu(-1), nu(0)).display() == "((nu#-1 nu#0))");
  Permutation two = composePerm(makeSwap(nu(0), nu(1)), makeSwap(mu(0), mu(1)));
  CHECK(two.display() == "((mu#0 mu#1)(nu#0 nu#1))");
}

TEST_CASE("permutation image of set expressions") {
  AtomSetExpr downs = AtomSetExpr::permissive();
  Permutation sw = makeSwap(nu(-1), nu(0));
  AtomSetExpr img = permApplySet(sw, downs);
  CHECK(img.contains(nu(0)));
  CHECK_FALSE(img.contains(nu(-1)));
  CHECK(img.contains(nu(-2)));
  CHECK(img == AtomSetExpr::permissive({nu(0)}, {nu(-1)}));
  // Round trip.
  CHECK(permApplySet(sw, img) == downs);

  AtomSet fin{nu(-1), nu(3)};
  CHECK(permImageFinite(sw, fin) == AtomSet{nu(0), nu(3)});
}

TEST_CASE("renamings") {
  Renaming r = makeAtomicRen(nu(-1), nu(0));
  CHECK(r(nu(-1)) == nu(0));
  CHECK(r(nu(0)) == nu(0));
  CHECK(r.nontriv() == AtomSet{nu(-1), nu(0)});
  CHECK(makeAtomicRen(nu(1), nu(1)).isIdentity());
  CHECK_THROWS_AS(makeAtomicRen(nu(0), mu(0)), PnlError);

  // Non-injective maps are allowed.
  Renaming sq = Renaming::fromEntries({{nu(0), nu(2)}, {nu(1), nu(2)}});
  CHECK(sq(nu(0)) == sq(nu(1)));

  Renaming back = makeAtomicRen(nu(0), nu(-1));
  Renaming comp = composeRen(back, r);  // back after r
  CHECK(comp(nu(-1)) == nu(-1));        // -1 -> 0 -> -1
  CHECK(comp(nu(0)) == nu(-1));
  CHECK(comp.entries.size() == 1);      // the -1 round trip cancels

  CHECK(r.display() == "[nu#-1->nu#0]");
  CHECK(renImageFinite(sq, {nu(0), nu(1), nu(5)}) == AtomSet{nu(2), nu(5)});
  CHECK(renOfPerm(makeSwap(nu(0), nu(1)))(nu(1)) == nu(0));
}

TEST_CASE("fresh atoms are deterministic and smallest-magnitude") {
  CHECK(freshAtom("nu", AtomSet{}) == nu(0));
  CHECK(freshAtom("nu", AtomSet{nu(0), nu(1)}) == nu(2));
  CHECK(freshAtom("nu", AtomSet{nu(0), nu(2)}) == nu(1));
  CHECK(freshAtom("nu", AtomSet{}, true) == nu(-1));
  CHECK(freshAtom("nu", AtomSet{nu(-1)}, true) == nu(-2));

  // Down atoms fresh for a permission set come from its exclusions,
  // nearest zero first.
  AtomSetExpr p = AtomSetExpr::permissive({}, {nu(-4), nu(-2)});
  CHECK(freshAtom("nu", p, true) == nu(-2));
  CHECK(freshAtom("nu", p, false) == nu(0));
  CHECK(freshAtom("nu", AtomSetExpr::permissive({nu(0)}, {}), false) == nu(1));
  CHECK_THROWS_AS(freshAtom("nu", AtomSetExpr::permissive(), true), PnlError);
  CHECK_THROWS_AS(freshAtom("mu", p, true), PnlError);  // exclusions are nu-only
}

TEST_CASE("freshening pairs") {
  AtomSet a{nu(-1), nu(0), mu(-2)};
  AtomSetExpr avoid = AtomSetExpr::finite({nu(1), nu(2), mu(0)});
  FresheningPair fp = makeFresheningPair(a, avoid);

  CHECK(fp.rho1.dom() == a);
  CHECK(fp.rho2.dom() == renImageFinite(fp.rho1, a));
  for (const Atom& x : a) {
    Atom moved = fp.rho1(x);
    CHECK(moved.isUp());
    CHECK_FALSE(avoid.contains(moved));
    CHECK_FALSE(a.count(moved));
    CHECK(fp.rho2(moved) == x);
  }
  // Distinct sources get distinct intermediates.
  CHECK(renImageFinite(fp.rho1, a).size() == a.size());
  // Deterministic: same inputs, same pair.
  FresheningPair fp2 = makeFresheningPair(a, avoid);
  CHECK(fp.rho1 == fp2.rho1);
  CHECK(fp.rho2 == fp2.rho2);

  // Works against a permission set too.
  FresheningPair fp3 = makeFresheningPair({nu(-1)}, AtomSetExpr::permissive({nu(0)}, {}));
  CHECK(fp3.rho1(nu(-1)).isUp());
  CHECK(fp3.rho1(nu(-1)) != nu(0));
}
