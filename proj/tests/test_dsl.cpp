#include "tableq/dsl.hpp"

#include "doctest.h"
#include "gen.hpp"

using namespace tableq;
using namespace tableq::dsl;

TEST_CASE("parse_module: declarations and a quantified equation") {
  ModuleAst m = parse_module(
      "table Net[2000:2001]\n"
      "Net[all y] = Builds[y] - Demolitions[y]\n");
  REQUIRE(m.tables.size() == 1);
  CHECK(m.tables[0].name == "Net");
  CHECK(m.tables[0].dims == std::vector<SubRange>{{2000, 2001}});
  REQUIRE(m.equations.size() == 1);
  const TableEquation& eq = m.equations[0];
  CHECK(eq.table == "Net");
  REQUIRE(eq.lhs.size() == 1);
  CHECK(eq.lhs[0].quantified);
  CHECK(eq.lhs[0].var == "y");
  CHECK(eq.rhs == EqExpr::binary(cells::BinOp::Sub,
                                 EqExpr::table_ref("Builds", {SubExpr::variable("y")}),
                                 EqExpr::table_ref("Demolitions", {SubExpr::variable("y")})));
}

TEST_CASE("parse_module: macro definitions") {
  ModuleAst m = parse_module("def guard(e, alt) = IF(NOT(ISNA(e)), e, alt)\n");
  REQUIRE(m.macros.size() == 1);
  const MacroDef& def = m.macros[0];
  CHECK(def.name == "guard");
  CHECK(def.params == std::vector<std::string>{"e", "alt"});
  EqExpr e = EqExpr::param("e");
  CHECK(def.body == EqExpr::call("IF", {EqExpr::call("NOT", {EqExpr::call("ISNA", {e})}), e,
                                        EqExpr::param("alt")}));
}

TEST_CASE("parse_module: empty and comment-only input") {
  CHECK(parse_module("").empty());
  CHECK(parse_module("# nothing here\n\n").empty());
}

TEST_CASE("parse_module: layout, use, and cell equations") {
  ModuleAst m = parse_module(
      "use \"shared/common.xl\"\n"
      "place Net at 'House Stocks'!H4 down\n"
      "place Grid at 'S'!B2\n"
      "'S'!A1 = \"Year\"\n");
  CHECK(m.uses == std::vector<std::string>{"shared/common.xl"});
  REQUIRE(m.layout.size() == 2);
  CHECK(m.layout[0].table == "Net");
  CHECK(m.layout[0].anchor == cells::CellAddr{"House Stocks", 8, 4});
  CHECK(m.layout[0].orient == Orient::Down);
  CHECK(m.layout[1].orient == Orient::None);
  REQUIRE(m.cell_equations.size() == 1);
  CHECK(m.cell_equations[0].lhs == cells::CellAddr{"S", 1, 1});
  CHECK(m.cell_equations[0].rhs == EqExpr::text("Year"));
}

TEST_CASE("parse_module: quantified patterns on the right-hand side") {
  ModuleAst m = parse_module("Net[all V0] = 'House Stocks'!F[V0-1996]\n");
  REQUIRE(m.equations.size() == 1);
  CHECK(m.equations[0].rhs ==
        EqExpr::cell_pat("House Stocks", SubExpr::constant(6), SubExpr::variable("V0", -1996)));
}

TEST_CASE("parse_module errors") {
  CHECK_THROWS_AS(parse_module("table T[2000:2001]\ntable T[1:2]\n"), Error);  // duplicate
  CHECK_THROWS_AS(parse_module("def f(x) = x\ndef f(y) = y\n"), Error);
  CHECK_THROWS_AS(parse_module("def f(x, x) = x\n"), Error);
  CHECK_THROWS_AS(parse_module("T[all y, all y] = 1\n"), Error);     // reused all-var
  CHECK_THROWS_AS(parse_module("T[all y] = Builds[z]\n"), Error);    // unbound z
  CHECK_THROWS_AS(parse_module("'S'!A1 = Builds[z]\n"), Error);      // vars need a quantifier
  CHECK_THROWS_AS(parse_module("def f(x) = T[y]\n"), Error);         // unbound in macro body
  CHECK_THROWS_AS(parse_module("T[all y] = x\n"), Error);            // bare unknown name
  CHECK_THROWS_AS(parse_module("table T[5:2]\n"), Error);            // empty range

  // positions point at the offending line
  try {
    parse_module("table T[1:2]\nT[all y] = oops\n", "mod.xl");
    FAIL_CHECK("expected error");
  } catch (const Error& e) {
    CHECK(e.where().file == "mod.xl");
    CHECK(e.where().line == 2);
  }
}

TEST_CASE("parse_run_listing: row binder") {
  RunListing listing = parse_run_listing(
      "'House Stocks'!H[V0 in 4:13] = 'House Stocks'!F[V0] - 'House Stocks'!G[V0]");
  REQUIRE(listing.items.size() == 1);
  const RunEquation& eq = listing.items[0];
  CHECK(eq.sheet == "House Stocks");
  CHECK(eq.col == RunPart::fixed(8));
  CHECK(eq.row == RunPart::binder("V0", 4, 13));
  CHECK(eq.rhs ==
        EqExpr::binary(cells::BinOp::Sub,
                       EqExpr::cell_pat("House Stocks", SubExpr::constant(6),
                                        SubExpr::variable("V0")),
                       EqExpr::cell_pat("House Stocks", SubExpr::constant(7),
                                        SubExpr::variable("V0"))));
}

TEST_CASE("parse_run_listing: anonymous column range") {
  RunListing listing = parse_run_listing("'House Stocks'![C:D]1 = \"Year\"");
  REQUIRE(listing.items.size() == 1);
  const RunEquation& eq = listing.items[0];
  CHECK(eq.col == RunPart::anon(3, 4));
  CHECK(eq.row == RunPart::fixed(1));
  CHECK(eq.rhs == EqExpr::text("Year"));
}

TEST_CASE("parse_run_listing: two binders with offsets, wrapped across lines") {
  RunListing listing = parse_run_listing(
      "'Home Sales'![V0 in C:D] [V1 in 4:13] =\n"
      "  'House Sales'![V0+2] [V1-1] - 'Flat Sales'![V0+3] [V1+1]");
  REQUIRE(listing.items.size() == 1);
  const RunEquation& eq = listing.items[0];
  CHECK(eq.sheet == "Home Sales");
  CHECK(eq.col == RunPart::binder("V0", 3, 4));
  CHECK(eq.row == RunPart::binder("V1", 4, 13));
  CHECK(eq.rhs ==
        EqExpr::binary(cells::BinOp::Sub,
                       EqExpr::cell_pat("House Sales", SubExpr::variable("V0", 2),
                                        SubExpr::variable("V1", -1)),
                       EqExpr::cell_pat("Flat Sales", SubExpr::variable("V0", 3),
                                        SubExpr::variable("V1", 1))));
}

TEST_CASE("parse_run_listing: plain equations and several items") {
  RunListing listing = parse_run_listing(
      "'S'!A1 = 1\n"
      "'S'!B[V0 in 2:3] = [10*V0]\n");
  REQUIRE(listing.items.size() == 2);
  CHECK(listing.items[0].col == RunPart::fixed(1));
  CHECK(listing.items[0].row == RunPart::fixed(1));
  Affine form;
  form.base = 0;
  form.terms = {{"V0", 10}};
  CHECK(listing.items[1].rhs == EqExpr::value(form));
}

TEST_CASE("parse_run_listing errors") {
  // unbound right-hand variable
  CHECK_THROWS_AS(parse_run_listing("'S'!H[V0 in 4:13] = 'S'!F[V1]"), Error);
  // anonymous range with variable right-hand side
  CHECK_THROWS_AS(parse_run_listing("'S'![C:D]1 = 'S'!F[V0]"), Error);
  // malformed binder
  CHECK_THROWS_AS(parse_run_listing("'S'!H[V0 in 4:] = 1"), Error);
  CHECK_THROWS_AS(parse_run_listing("'S'!H[in 4:13] = 1"), Error);
  // reversed and out-of-range extents
  CHECK_THROWS_AS(parse_run_listing("'S'!H[V0 in 13:4] = 1"), Error);
  CHECK_THROWS_AS(parse_run_listing("'S'![D:C]1 = 1"), Error);
  CHECK_THROWS_AS(parse_run_listing("'S'!H[V0 in 0:3] = 1"), Error);
  // duplicate variable
  CHECK_THROWS_AS(parse_run_listing("'S'![V0 in C:D] [V0 in 4:13] = 1"), Error);
  // row part before column part
  CHECK_THROWS_AS(parse_run_listing("'S'![4:13]A = 1"), Error);
}

TEST_CASE("expression printing round-trips through the module parser") {
  const char* lines[] = {
      "T[all y] = Builds[y+1] - Demolitions[y-1]",
      "T[all y, all ht] = guard(Sales[y, ht], 0)",
      "T[2000, 1] = \"x\" & \"y\"",
      "S!A1 = 1 + 2 * 3 ^ -4",
      "S!A1 = SUM(S!B1:C9) / 2",
      "T[all V0] = 'House Stocks'!F[V0-1996] + 'House Stocks'!G4",
      "T[all y] = -(T2[y] + 1)",
  };
  for (const char* line : lines) {
    CAPTURE(line);
    ModuleAst m = parse_module(std::string(line) + "\n");
    std::string printed = print_module(m);
    CHECK(printed == std::string(line) + "\n");
    ModuleAst again = parse_module(printed);
    CHECK(print_module(again) == printed);
  }
}

TEST_CASE("module parser does not crash on arbitrary bytes") {
  testgen::Gen gen(1234);
  for (int i = 0; i < 300; ++i) {
    std::string junk;
    int n = gen.irange(0, 80);
    for (int k = 0; k < n; ++k) junk.push_back(static_cast<char>(gen.irange(1, 255)));
    try {
      parse_module(junk);
    } catch (const Error&) {
    }
    try {
      parse_run_listing(junk);
    } catch (const Error&) {
    }
  }
}
