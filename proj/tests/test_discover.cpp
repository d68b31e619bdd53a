#include "tableq/discover.hpp"

#include "doctest.h"
#include "gen.hpp"
#include "tableq/compiler.hpp"

using namespace tableq;
using namespace tableq::cells;
using namespace tableq::discover;

namespace {

// The headline property: renaming and recompiling reproduces the workbook
// byte for byte after canonical serialization.
void check_round_trip(const Workbook& wb, const NamingMap& map) {
  NamedEquationSet named = rename(wb, map);
  std::string module_text = print_named_set(named);
  CAPTURE(module_text);
  Workbook recompiled = compiler::compile(dsl::parse_module(module_text));
  CHECK(serialize_workbook(recompiled) == serialize_workbook(wb));

  // rename never loses cells
  size_t expanded = named.residue.size();
  for (const auto& eq : named.equations) {
    if (eq.lhs.empty() || !eq.lhs.front().quantified) {
      expanded += 1;
      continue;
    }
    for (const auto& decl : named.decls) {
      if (decl.name != eq.table) continue;
      size_t n = 1;
      for (const auto& dim : decl.dims) n *= static_cast<size_t>(dim.size());
      expanded += n;
    }
  }
  CHECK(expanded == wb.cells.size());
}

Workbook housing_1d_fixture() {
  std::string text;
  for (int r = 4; r <= 13; ++r) {
    text += "'House Stocks'!H" + std::to_string(r) + " = 'House Stocks'!F" + std::to_string(r) +
            " - 'House Stocks'!G" + std::to_string(r) + "\n";
  }
  return parse_workbook(text);
}

// Two-column tables: Net H:I, Builds D:E, Demolitions F:G, rows 4..13.
Workbook housing_2d_fixture() {
  std::string text;
  for (int r = 4; r <= 13; ++r) {
    for (int k = 0; k <= 1; ++k) {
      std::string rr = std::to_string(r);
      text += "'House Stocks'!" + index_to_col(8 + k) + rr + " = 'House Stocks'!" +
              index_to_col(4 + k) + rr + " - 'House Stocks'!" + index_to_col(6 + k) + rr + "\n";
    }
  }
  return parse_workbook(text);
}

const char* k2dNames =
    "name Net = 'House Stocks'!H4:I13 rows 4->2000 cols H->1\n"
    "name Builds = 'House Stocks'!D4:E13 rows 4->2000 cols D->1\n"
    "name Demolitions = 'House Stocks'!F4:G13 rows 4->2000 cols F->1\n";

}  // namespace

TEST_CASE("parse_naming_map: one- and two-dimensional entries") {
  NamingMap map = parse_naming_map(
      "name Net = 'House Stocks'!H4:H13 rows 4->2000\n"
      "name Grid = S!F4:G13 rows 4->2000 cols F->1\n"
      "name Row = S!B2:E2 cols B->10\n");
  REQUIRE(map.entries.size() == 3);
  CHECK(map.entries[0].table == "Net");
  CHECK(map.entries[0].row_base->anchor == 4);
  CHECK(map.entries[0].row_base->subscript == 2000);
  CHECK(!map.entries[0].col_base);
  CHECK(map.entries[1].col_base->anchor == 6);
  CHECK(map.entries[1].col_base->subscript == 1);
  CHECK(!map.entries[2].row_base);

  CHECK(entry_decl(map.entries[0]).dims == std::vector<dsl::SubRange>{{2000, 2009}});
  CHECK(entry_decl(map.entries[1]).dims == std::vector<dsl::SubRange>({{2000, 2009}, {1, 2}}));
  CHECK(entry_decl(map.entries[2]).dims == std::vector<dsl::SubRange>{{10, 13}});
  CHECK(entry_layout(map.entries[0]).orient == dsl::Orient::Down);
  CHECK(entry_layout(map.entries[1]).orient == dsl::Orient::None);
  CHECK(entry_layout(map.entries[2]).orient == dsl::Orient::Across);
}

TEST_CASE("parse_naming_map: errors") {
  // overlapping rectangles
  CHECK_THROWS_AS(parse_naming_map("name A = S!H4:H13 rows 4->2000\n"
                                   "name B = S!H10:H20 rows 10->1\n"),
                  Error);
  // duplicate names
  CHECK_THROWS_AS(parse_naming_map("name A = S!A1:A2 rows 1->1\n"
                                   "name A = S!B1:B2 rows 1->1\n"),
                  Error);
  // base anchor outside the rectangle
  CHECK_THROWS_AS(parse_naming_map("name A = S!H4:H13 rows 3->2000\n"), Error);
  CHECK_THROWS_AS(parse_naming_map("name A = S!F4:G13 rows 4->1 cols H->1\n"), Error);
  // multi-column rectangle with no cols clause
  CHECK_THROWS_AS(parse_naming_map("name A = S!F4:G13 rows 4->2000\n"), Error);
  // no clause at all
  CHECK_THROWS_AS(parse_naming_map("name A = S!F4:F4\n"), Error);
}

TEST_CASE("cell_to_element: subscript arithmetic") {
  NamingMap map = parse_naming_map("name Net = 'House Stocks'!H4:H13 rows 4->2000\n");
  auto el = cell_to_element({"House Stocks", 8, 7}, map);
  REQUIRE(el);
  CHECK(el->table == "Net");
  CHECK(el->subs == std::vector<long long>{2003});  // 2000 + (7 - 4)

  // the anchor cell carries the base subscript exactly
  auto anchor = cell_to_element({"House Stocks", 8, 4}, map);
  REQUIRE(anchor);
  CHECK(anchor->subs == std::vector<long long>{2000});

  CHECK(!cell_to_element({"House Stocks", 8, 14}, map));
  CHECK(!cell_to_element({"Other", 8, 7}, map));

  NamingMap two = parse_naming_map("name G = S!F4:G13 rows 4->2000 cols F->1\n");
  auto g = cell_to_element({"S", 7, 9}, two);
  REQUIRE(g);
  CHECK(g->subs == std::vector<long long>({2005, 2}));  // row subscript first
}

TEST_CASE("rename: the two-dimensional housing fixture generalizes") {
  Workbook wb = housing_2d_fixture();
  NamingMap map = parse_naming_map(k2dNames);
  NamedEquationSet named = rename(wb, map);
  REQUIRE(named.equations.size() == 1);
  CHECK(print_table_equation(named.equations[0]) ==
        "Net[all V0, all V1] = Builds[V0, V1] - Demolitions[V0, V1]");
  CHECK(named.residue.empty());
  check_round_trip(wb, map);
}

TEST_CASE("rename: empty naming map leaves everything in the residue") {
  Workbook wb = housing_1d_fixture();
  NamedEquationSet named = rename(wb, NamingMap{});
  CHECK(named.equations.empty());
  CHECK(named.residue.size() == wb.cells.size());
  check_round_trip(wb, NamingMap{});
}

TEST_CASE("rename: naming only the target table keeps lockstep references") {
  Workbook wb = housing_1d_fixture();
  NamingMap map = parse_naming_map("name Net = 'House Stocks'!H4:H13 rows 4->2000\n");
  NamedEquationSet named = rename(wb, map);
  REQUIRE(named.equations.size() == 1);
  // rows 4..13 correspond to subscripts 2000..2009, so the unnamed column F
  // reference at row V0-1996 moves in lockstep
  CHECK(print_table_equation(named.equations[0]) ==
        "Net[all V0] = 'House Stocks'!F[V0-1996] - 'House Stocks'!G[V0-1996]");
  check_round_trip(wb, map);
}

TEST_CASE("rename: a deviant element blocks generalization for its table") {
  Workbook wb = housing_1d_fixture();
  // overwrite one cell with a different shape
  wb.cells.insert_or_assign(CellAddr{"House Stocks", 8, 7}, Formula::number(99));
  NamingMap map = parse_naming_map("name Net = 'House Stocks'!H4:H13 rows 4->2000\n");
  NamedEquationSet named = rename(wb, map);
  // all ten kept as element equations
  CHECK(named.equations.size() == 10);
  for (const auto& eq : named.equations)
    CHECK(!eq.lhs.front().quantified);
  CHECK(print_table_equation(named.equations[3]) == "Net[2003] = 99");
  check_round_trip(wb, map);
}

TEST_CASE("generalize: coverage and uniformity cases") {
  using compiler::ElementEquation;
  compiler::DeclEnv decls =
      compiler::build_decl_env(dsl::parse_module("table T[2000:2001, 1:2]\ntable U[1:3]\n").tables);

  auto ref = [](long long y, long long ht) {
    return dsl::EqExpr::table_ref(
        "B", {dsl::SubExpr::constant(y), dsl::SubExpr::constant(ht)});
  };

  SUBCASE("four uniform elements become one all-equation") {
    std::vector<ElementEquation> els;
    for (long long y = 2000; y <= 2001; ++y)
      for (long long ht = 1; ht <= 2; ++ht) els.push_back({"T", {y, ht}, ref(y, ht), {}});
    GeneralizeResult g = generalize(els, decls);
    REQUIRE(g.equations.size() == 1);
    CHECK(g.leftovers.empty());
    CHECK(dsl::print_table_equation(g.equations[0]) == "T[all V0, all V1] = B[V0, V1]");
  }

  SUBCASE("three uniform plus one deviant element stay element equations") {
    std::vector<ElementEquation> els;
    for (long long y = 2000; y <= 2001; ++y)
      for (long long ht = 1; ht <= 2; ++ht) els.push_back({"T", {y, ht}, ref(y, ht), {}});
    els[3].rhs = dsl::EqExpr::number(1);
    GeneralizeResult g = generalize(els, decls);
    CHECK(g.equations.empty());
    CHECK(g.leftovers.size() == 4);
  }

  SUBCASE("a single element equation is unchanged") {
    std::vector<ElementEquation> els = {{"U", {2}, dsl::EqExpr::number(5), {}}};
    GeneralizeResult g = generalize(els, decls);
    CHECK(g.equations.empty());
    REQUIRE(g.leftovers.size() == 1);
    CHECK(g.leftovers[0].subs == std::vector<long long>{2});
  }

  SUBCASE("incomplete coverage stays element equations") {
    std::vector<ElementEquation> els = {{"U", {1}, dsl::EqExpr::number(5), {}},
                                        {"U", {2}, dsl::EqExpr::number(5), {}}};
    GeneralizeResult g = generalize(els, decls);
    CHECK(g.equations.empty());
    CHECK(g.leftovers.size() == 2);
  }
}

TEST_CASE("cell_to_element inverts the compiler's placement") {
  NamingMap map = parse_naming_map(
      "name Net = 'House Stocks'!H4:H13 rows 7->2003\n"
      "name Grid = S!F4:G13 rows 4->2000 cols G->5\n"
      "name Row = S!B20:E20 cols B->10\n");
  for (const auto& entry : map.entries) {
    dsl::TableDecl decl = entry_decl(entry);
    compiler::DeclEnv decls{{decl.name, decl}};
    compiler::Layout layout = compiler::resolve_layout(decls, {entry_layout(entry)}, {});

    // enumerate every element of the declared rectangle
    std::vector<std::vector<long long>> all_subs{{}};
    for (const auto& dim : decl.dims) {
      std::vector<std::vector<long long>> next;
      for (const auto& prefix : all_subs)
        for (long long v = dim.lo; v <= dim.hi; ++v) {
          auto subs = prefix;
          subs.push_back(v);
          next.push_back(std::move(subs));
        }
      all_subs = std::move(next);
    }
    for (const auto& subs : all_subs) {
      CellAddr addr = layout.addr_of(decl.name, subs, {});
      auto el = cell_to_element(addr, map);
      REQUIRE(el);
      CHECK(el->table == decl.name);
      CHECK(el->subs == subs);
    }
  }
}

TEST_CASE("rename round trip on random named fixtures") {
  testgen::Gen gen(31337);
  for (int i = 0; i < 40; ++i) {
    CAPTURE(i);
    testgen::NamedFixture fixture = testgen::random_named_fixture(gen);
    CAPTURE(fixture.naming_text);
    NamingMap map = parse_naming_map(fixture.naming_text);
    check_round_trip(fixture.workbook, map);
  }
}
