// Brute-force oracle for renaming-class equality.
//
// The library stores renaming-value classes in a canonical form and decides
// class equality structurally (see include/pnl/nomsem.hpp).  This header
// rebuilds the defining relation with none of that insight: the least
// equivalence on renaming-value pairs generated by
//
//   (1)  (rho, x) ~ (rho', x)        when rho and rho' agree on supp(x), and
//   (2)  (rho . pi, x) ~ (rho, pi x) for a permutation pi,
//
// closed over a finite node family and compared against the canonical form
// on every node.
//
// Family: five atoms of one name sort (nu#-2 .. nu#2).  Values are every
// atom, ordered pair, ordered triple, abstraction of an atom, and unary
// constructor of an atom over the pool, deduplicated up to the value-level
// canonical form; all have support of size at most three.  Renamings are all
// 5^5 functions from the pool into itself.  Nodes are renaming-value pairs,
// 3125 times the value count.
//
// Closure: rule (1) unions nodes sharing a value and a support-restricted
// renaming; rule (2) is seeded with the ten pool swaps, whose products give
// every pool permutation.  Both moves stay inside the family, and so does
// the canonicalisation path itself (relabel targets are the up atoms 0..2,
// all in the pool; the relabeling is a product of pool swaps), so two nodes
// share a canonical form exactly when the family closure connects them --
// which is the claim the comparison checks, in both directions, on every
// node.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "pnl/nomsem.hpp"
#include "oracle_common.hpp"

namespace renoracle {

using namespace pnl;

struct RenUniverse {
    std::vector<Atom> pool;                            // 5 atoms, fixed order
    std::vector<GroundValue> values;                   // canonical, deduped
    std::map<std::string, std::uint32_t> valueId;      // by display
    std::vector<std::uint8_t> suppMask;                // bit i: pool[i] free
    std::vector<std::pair<int, int>> swapPairs;        // 10 pool index pairs
    std::vector<std::array<std::uint32_t, 10>> swapVal; // value x swap -> id
    static constexpr std::uint32_t kRenCount = 3125;   // 5^5 functions

    int imgAt(std::uint32_t ren, int i) const {
        static const std::uint32_t pow[5] = {1, 5, 25, 125, 625};
        return static_cast<int>((ren / pow[i]) % 5);
    }

    Renaming renamingOf(std::uint32_t ren) const {
        std::map<Atom, Atom> m;
        for (int i = 0; i < 5; ++i)
            m[pool[static_cast<std::size_t>(i)]] =
                pool[static_cast<std::size_t>(imgAt(ren, i))];
        return Renaming::fromEntries(std::move(m));
    }

    // Index of ren composed with the swap of pool positions (p, q).
    std::uint32_t composeSwap(std::uint32_t ren, int s) const {
        auto [p, q] = swapPairs[static_cast<std::size_t>(s)];
        std::uint32_t out = 0;
        std::uint32_t pow = 1;
        for (int i = 0; i < 5; ++i, pow *= 5) {
            int src = i == p ? q : (i == q ? p : i);
            out += static_cast<std::uint32_t>(imgAt(ren, src)) * pow;
        }
        return out;
    }

    std::uint32_t node(std::uint32_t ren, std::uint32_t val) const {
        return ren * static_cast<std::uint32_t>(values.size()) + val;
    }
    std::uint32_t nodeCount() const {
        return kRenCount * static_cast<std::uint32_t>(values.size());
    }
};

inline RenUniverse buildRenUniverse() {
    RenUniverse u;
    for (std::int64_t k = -2; k <= 2; ++k) u.pool.push_back(Atom{"nu", k});

    auto add = [&](const GroundValue& v) {
        std::string key = displayValue(v);
        if (u.valueId.count(key)) return;
        u.valueId.emplace(std::move(key),
                          static_cast<std::uint32_t>(u.values.size()));
        u.values.push_back(v);
    };
    for (const Atom& a : u.pool) add(mkVAtom(a));
    for (const Atom& a : u.pool)
        for (const Atom& b : u.pool) add(mkVTuple({mkVAtom(a), mkVAtom(b)}));
    for (const Atom& a : u.pool)
        for (const Atom& b : u.pool)
            for (const Atom& c : u.pool)
                add(mkVTuple({mkVAtom(a), mkVAtom(b), mkVAtom(c)}));
    for (const Atom& a : u.pool)
        for (const Atom& b : u.pool) add(mkVAbs(a, mkVAtom(b)));
    for (const Atom& a : u.pool) add(mkVCon("f", mkVAtom(a)));

    for (int p = 0; p < 5; ++p)
        for (int q = p + 1; q < 5; ++q) u.swapPairs.emplace_back(p, q);

    u.suppMask.resize(u.values.size());
    u.swapVal.resize(u.values.size());
    for (std::size_t v = 0; v < u.values.size(); ++v) {
        std::uint8_t m = 0;
        for (int i = 0; i < 5; ++i)
            if (u.values[v]->supp.count(u.pool[static_cast<std::size_t>(i)]))
                m |= static_cast<std::uint8_t>(1u << i);
        u.suppMask[v] = m;
        for (std::size_t s = 0; s < 10; ++s) {
            auto [p, q] = u.swapPairs[s];
            Permutation sw = makeSwap(u.pool[static_cast<std::size_t>(p)],
                                      u.pool[static_cast<std::size_t>(q)]);
            u.swapVal[v][s] =
                u.valueId.at(displayValue(permActValue(sw, u.values[v])));
        }
    }
    return u;
}

struct RenOracleResult {
    std::size_t nodes = 0;
    std::size_t oracleClasses = 0;
    std::size_t canonicalClasses = 0;
    std::size_t disagreements = 0;
};

inline RenOracleResult runRenClosure() {
    RenUniverse u = buildRenUniverse();
    const std::uint32_t V = static_cast<std::uint32_t>(u.values.size());
    oracle::UnionFind uf(u.nodeCount());

    // Rule (1): for each value, group renamings by their restriction to the
    // value's support (packed pool-image indices at support positions).
    for (std::uint32_t v = 0; v < V; ++v) {
        std::unordered_map<std::uint32_t, std::uint32_t> firstSeen;
        firstSeen.reserve(256);
        for (std::uint32_t r = 0; r < RenUniverse::kRenCount; ++r) {
            std::uint32_t key = 0;
            for (int i = 0; i < 5; ++i)
                if (u.suppMask[v] & (1u << i))
                    key = key * 8 +
                          static_cast<std::uint32_t>(u.imgAt(r, i)) + 1;
            auto [it, fresh] = firstSeen.emplace(key, u.node(r, v));
            if (!fresh) uf.unite(it->second, u.node(r, v));
        }
    }

    // Rule (2): each node meets its ten swap partners.
    for (std::uint32_t r = 0; r < RenUniverse::kRenCount; ++r)
        for (std::uint32_t v = 0; v < V; ++v)
            for (int s = 0; s < 10; ++s)
                uf.unite(u.node(r, v),
                         u.node(u.composeSwap(r, s),
                                u.swapVal[v][static_cast<std::size_t>(s)]));

    // Agreement: the union-find partition and the canonical-form partition
    // must coincide node by node.
    RenOracleResult res;
    res.nodes = u.nodeCount();
    std::unordered_map<std::uint32_t, std::string> rootKey;
    std::unordered_map<std::string, std::uint32_t> keyRoot;
    for (std::uint32_t r = 0; r < RenUniverse::kRenCount; ++r) {
        Renaming ren = u.renamingOf(r);
        for (std::uint32_t v = 0; v < V; ++v) {
            std::uint32_t root = uf.find(u.node(r, v));
            std::string key = displayRenElement(mkRenElement(ren, u.values[v]));
            bool ok = true;
            auto [it1, fresh1] = rootKey.emplace(root, key);
            if (!fresh1 && it1->second != key) ok = false;
            auto [it2, fresh2] = keyRoot.emplace(key, root);
            if (!fresh2 && it2->second != root) ok = false;
            if (!ok) ++res.disagreements;
        }
    }
    res.oracleClasses = rootKey.size();
    res.canonicalClasses = keyRoot.size();
    return res;
}

}  // namespace renoracle
