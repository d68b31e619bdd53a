#include "tableq/runs.hpp"

#include <algorithm>

#include "doctest.h"
#include "gen.hpp"
#include "tableq/compiler.hpp"

using namespace tableq;
using namespace tableq::cells;
using namespace tableq::dsl;
using namespace tableq::runs;

namespace {

// The run notation and its expansion must invert each other; detection must
// reproduce the workbook when expanded.
void check_lossless(const Workbook& wb) {
  RunListing detected = detect_runs(wb);
  Workbook expanded = expand_runs(detected);
  CHECK(expanded == wb);

  std::string notation = serialize_run_listing(detected);
  RunListing reparsed = parse_run_listing(notation);
  CHECK(serialize_run_listing(reparsed) == notation);
  CHECK(expand_runs(reparsed) == wb);

  // parsing inverts serialization structurally, not just textually
  REQUIRE(reparsed.items.size() == detected.items.size());
  for (size_t i = 0; i < detected.items.size(); ++i) {
    CHECK(reparsed.items[i].sheet == detected.items[i].sheet);
    CHECK(reparsed.items[i].col == detected.items[i].col);
    CHECK(reparsed.items[i].row == detected.items[i].row);
    CHECK(reparsed.items[i].rhs == detected.items[i].rhs);
  }
}

Workbook housing_column_fixture() {
  std::string text;
  for (int r = 4; r <= 13; ++r) {
    text += "'House Stocks'!H" + std::to_string(r) + " = 'House Stocks'!F" + std::to_string(r) +
            " - 'House Stocks'!G" + std::to_string(r) + "\n";
  }
  return parse_workbook(text);
}

}  // namespace

TEST_CASE("list_workbook prints one repetitive line per cell") {
  Workbook wb = housing_column_fixture();
  std::string listing = list_workbook(wb);
  CHECK(std::count(listing.begin(), listing.end(), '\n') == 10);
  CHECK(listing.find("'House Stocks'!H4 = 'House Stocks'!F4 - 'House Stocks'!G4\n") !=
        std::string::npos);
  CHECK(list_workbook(Workbook{}) == "");
}

TEST_CASE("detect_runs: column of matching formulas becomes one row run") {
  RunListing listing = detect_runs(housing_column_fixture());
  REQUIRE(listing.items.size() == 1);
  CHECK(serialize_run_equation(listing.items[0]) ==
        "'House Stocks'!H[V0 in 4:13] = 'House Stocks'!F[V0] - 'House Stocks'!G[V0]");
  check_lossless(housing_column_fixture());
}

TEST_CASE("detect_runs: equal constant cells become an anonymous run") {
  Workbook wb = parse_workbook(
      "'House Stocks'!C1 = \"Year\"\n"
      "'House Stocks'!D1 = \"Year\"\n");
  RunListing listing = detect_runs(wb);
  REQUIRE(listing.items.size() == 1);
  CHECK(serialize_run_equation(listing.items[0]) == "'House Stocks'![C:D]1 = \"Year\"");
  check_lossless(wb);
}

TEST_CASE("expand_runs: two-binder run expands to twenty cells") {
  const char* run_text =
      "'Home Sales'![V0 in C:D] [V1 in 4:13] = "
      "'House Sales'![V0+2] [V1-1] - 'Flat Sales'![V0+3] [V1+1]";
  Workbook wb = expand_runs(parse_run_listing(run_text));
  REQUIRE(wb.cells.size() == 20);
  std::string listing = list_workbook(wb);
  size_t first_newline = listing.find('\n');
  CHECK(listing.substr(0, first_newline) ==
        "'Home Sales'!C4 = 'House Sales'!E3 - 'Flat Sales'!F5");
  size_t last_start = listing.rfind('\n', listing.size() - 2);
  CHECK(listing.substr(last_start + 1) ==
        "'Home Sales'!D13 = 'House Sales'!F12 - 'Flat Sales'!G14\n");

  // detection recovers the single run, token for token
  RunListing detected = detect_runs(wb);
  REQUIRE(detected.items.size() == 1);
  CHECK(serialize_run_equation(detected.items[0]) == run_text);
}

TEST_CASE("expand_runs: plain lines, duplicates, and off-sheet references") {
  Workbook wb = expand_runs(parse_run_listing("'S'!A1 = 1\n'S'!B2 = A1 + 1\n"));
  CHECK(wb.cells.size() == 2);
  // overlapping runs produce the same cell twice
  CHECK_THROWS_AS(expand_runs(parse_run_listing("'S'!A[V0 in 1:3] = 1\n'S'![A:B]2 = 1\n")),
                  Error);
  // a reference pushed left of column A
  CHECK_THROWS_AS(expand_runs(parse_run_listing("'S'!C[V0 in 1:3] = 'S'![V0-2]5\n")), Error);
}

TEST_CASE("detect_runs: arithmetic progressions of literals") {
  // 10, 20, ..., 100 down one column: a single run whose value tracks the row
  std::string text;
  for (int r = 1; r <= 10; ++r)
    text += "S!A" + std::to_string(r) + " = " + std::to_string(10 * r) + "\n";
  Workbook wb = parse_workbook(text);
  RunListing listing = detect_runs(wb);
  REQUIRE(listing.items.size() == 1);
  CHECK(serialize_run_equation(listing.items[0]) == "S!A[V0 in 1:10] = [10*V0]");
  check_lossless(wb);
}

TEST_CASE("detect_runs: progression breaks split the run") {
  // 1,2,3 then 10,11,12: one affine fit cannot cover both segments
  Workbook wb = parse_workbook(
      "S!A1 = 1\nS!A2 = 2\nS!A3 = 3\n"
      "S!A4 = 10\nS!A5 = 11\nS!A6 = 12\n");
  RunListing listing = detect_runs(wb);
  REQUIRE(listing.items.size() == 2);
  CHECK(serialize_run_equation(listing.items[0]) == "S!A[V0 in 1:3] = [V0]");
  CHECK(serialize_run_equation(listing.items[1]) == "S!A[V0 in 4:6] = [V0+6]");
  check_lossless(wb);
}

TEST_CASE("detect_runs: greedy choice on an L-shaped region prefers the taller block") {
  Workbook wb = parse_workbook("S!A1 = 5\nS!A2 = 5\nS!B1 = 5\n");
  RunListing listing = detect_runs(wb);
  REQUIRE(listing.items.size() == 2);
  CHECK(serialize_run_equation(listing.items[0]) == "S!A[1:2] = 5");
  CHECK(serialize_run_equation(listing.items[1]) == "S!B1 = 5");
  check_lossless(wb);
}

TEST_CASE("detect_runs: strings must match exactly, only numbers increment") {
  Workbook wb = parse_workbook("S!A1 = \"a\"\nS!A2 = \"b\"\n");
  RunListing listing = detect_runs(wb);
  CHECK(listing.items.size() == 2);
  check_lossless(wb);
}

TEST_CASE("detect_runs: absolute ranges join runs only when identical") {
  Workbook moving = parse_workbook(
      "S!A1 = SUM(S!B1:C1)\n"
      "S!A2 = SUM(S!B2:C2)\n");
  // the range endpoints move, so the shapes differ: two plain lines
  CHECK(detect_runs(moving).items.size() == 2);
  check_lossless(moving);

  Workbook fixed = parse_workbook(
      "S!A1 = SUM(S!B1:B9)\n"
      "S!A2 = SUM(S!B1:B9)\n");
  RunListing listing = detect_runs(fixed);
  REQUIRE(listing.items.size() == 1);
  CHECK(serialize_run_equation(listing.items[0]) == "S!A[1:2] = SUM(S!B1:B9)");
  check_lossless(fixed);
}

TEST_CASE("detect_runs: a 1x1 workbook is a plain equation") {
  Workbook wb = parse_workbook("S!C7 = S!A1 + 1\n");
  RunListing listing = detect_runs(wb);
  REQUIRE(listing.items.size() == 1);
  CHECK(serialize_run_equation(listing.items[0]) == "S!C7 = S!A1 + 1");
  check_lossless(wb);
}

TEST_CASE("detect_runs: empty workbook") {
  CHECK(detect_runs(Workbook{}).items.empty());
  CHECK(expand_runs(RunListing{}).empty());
}

TEST_CASE("round trip through the compiler output") {
  const char* module =
      "table Net[2000:2009]\n"
      "table Builds[2000:2009]\n"
      "table Demolitions[2000:2009]\n"
      "place Builds at 'House Stocks'!F4 down\n"
      "place Demolitions at 'House Stocks'!G4 down\n"
      "place Net at 'House Stocks'!H4 down\n"
      "Net[all y] = Builds[y] - Demolitions[y]\n";
  Workbook wb = compiler::compile(parse_module(module));
  check_lossless(wb);
  RunListing listing = detect_runs(wb);
  REQUIRE(listing.items.size() == 1);
  CHECK(serialize_run_equation(listing.items[0]) ==
        "'House Stocks'!H[V0 in 4:13] = 'House Stocks'!F[V0] - 'House Stocks'!G[V0]");
}

TEST_CASE("property: expanding detected runs reproduces random workbooks") {
  testgen::Gen gen(987654);
  for (int i = 0; i < 300; ++i) {
    CAPTURE(i);
    Workbook wb = testgen::random_run_workbook(gen);
    check_lossless(wb);
  }
}

TEST_CASE("property: no two emitted runs can merge into a larger rectangle") {
  testgen::Gen gen(24681357);
  for (int i = 0; i < 60; ++i) {
    CAPTURE(i);
    Workbook wb = testgen::random_run_workbook(gen);
    RunListing listing = detect_runs(wb);

    struct Item {
      std::string sheet;
      long long c1, r1, c2, r2;
    };
    std::vector<Item> items;
    for (const auto& eq : listing.items)
      items.push_back({eq.sheet, eq.col.lo, eq.row.lo, eq.col.hi, eq.row.hi});

    for (size_t a = 0; a < items.size(); ++a) {
      for (size_t b = a + 1; b < items.size(); ++b) {
        const Item& x = items[a];
        const Item& y = items[b];
        if (x.sheet != y.sheet) continue;
        bool col_aligned = x.c1 == y.c1 && x.c2 == y.c2 &&
                           (x.r2 + 1 == y.r1 || y.r2 + 1 == x.r1);
        bool row_aligned = x.r1 == y.r1 && x.r2 == y.r2 &&
                           (x.c2 + 1 == y.c1 || y.c2 + 1 == x.c1);
        if (!col_aligned && !row_aligned) continue;
        // re-detect just the union; a single resulting run would mean the
        // two items should have been merged
        Workbook sub;
        for (const auto& [addr, f] : wb.cells) {
          bool in_x = addr.sheet == x.sheet && addr.col >= x.c1 && addr.col <= x.c2 &&
                      addr.row >= x.r1 && addr.row <= x.r2;
          bool in_y = addr.sheet == y.sheet && addr.col >= y.c1 && addr.col <= y.c2 &&
                      addr.row >= y.r1 && addr.row <= y.r2;
          if (in_x || in_y) sub.cells.emplace(addr, f);
        }
        CAPTURE(serialize_workbook(sub));
        CHECK(detect_runs(sub).items.size() >= 2);
      }
    }
  }
}

TEST_CASE("detected listings are sorted by sheet then position") {
  Workbook wb = parse_workbook(
      "B!A1 = 1\n"
      "A!C5 = 2\n"
      "A!A9 = 3\n");
  RunListing listing = detect_runs(wb);
  REQUIRE(listing.items.size() == 3);
  CHECK(listing.items[0].sheet == "A");
  CHECK(listing.items[0].row.lo == 5);
  CHECK(listing.items[1].row.lo == 9);
  CHECK(listing.items[2].sheet == "B");
}
