#pragma once

// Shared fixtures: the untyped-lambda-calculus signature most tests run
// against, plus terse atom builders.

#include "pnl/syntax.hpp"

inline pnl::Atom nuA(std::int64_t i) { return pnl::Atom{"nu", i}; }

inline pnl::PnlSort iotaSort() { return pnl::PnlSort::baseSort("iota"); }
inline pnl::PnlSort nuSort() { return pnl::PnlSort::nameSort("nu"); }

// nu, iota; var : (nu)iota, app : (iota,iota)iota, lam : ([nu]iota)iota;
// eq : (iota,iota), P : nu, Pabs : [nu]iota, Q : (nu,nu).
inline pnl::PnlSignature makeLambdaSig() {
  using pnl::PnlSort;
  pnl::PnlSignature sig;
  sig.nameSorts = {"nu"};
  sig.baseSorts = {"iota"};
  sig.termFormers["var"] = {nuSort(), "iota"};
  sig.termFormers["app"] = {PnlSort::tuple({iotaSort(), iotaSort()}), "iota"};
  sig.termFormers["lam"] = {PnlSort::abs("nu", iotaSort()), "iota"};
  sig.propFormers["eq"] = {PnlSort::tuple({iotaSort(), iotaSort()})};
  sig.propFormers["P"] = {nuSort()};
  sig.propFormers["Pabs"] = {PnlSort::abs("nu", iotaSort())};
  sig.propFormers["Q"] = {PnlSort::tuple({nuSort(), nuSort()})};
  sig.validate();
  return sig;
}

inline pnl::Unknown mkUnk(const std::string& name, pnl::PnlSort sort,
                          pnl::PermissionSet pmss = pnl::AtomSetExpr::permissive()) {
  return pnl::Unknown{name, std::move(sort), std::move(pmss)};
}
