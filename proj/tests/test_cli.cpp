#include "tableq/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

using namespace tableq;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status = 0;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  Result r;
  r.status = cli::run(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path test_dir() {
  fs::path dir = fs::temp_directory_path() / "tableq_cli_test";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

const char* kHousingModule =
    "table Net[2000:2009]\n"
    "table Builds[2000:2009]\n"
    "table Demolitions[2000:2009]\n"
    "place Builds at 'House Stocks'!F4 down\n"
    "place Demolitions at 'House Stocks'!G4 down\n"
    "place Net at 'House Stocks'!H4 down\n"
    "Net[all y] = Builds[y] - Demolitions[y]\n";

}  // namespace

TEST_CASE("cli: no arguments prints usage and exits 2") {
  Result r = run_cli({});
  CHECK(r.status == 2);
  CHECK(r.err.find("usage:") != std::string::npos);
  CHECK(run_cli({"frobnicate"}).status == 2);
  CHECK(run_cli({"list"}).status == 2);  // missing input
  CHECK(run_cli({"list", "a", "b"}).status == 2);
  CHECK(run_cli({"list", "--bogus", "x"}).status == 2);
}

TEST_CASE("cli: compile then list reproduces the A1 equations") {
  fs::path dir = test_dir();
  write_file(dir / "housing.xl", kHousingModule);
  Result compiled =
      run_cli({"compile", (dir / "housing.xl").string(), "-o", (dir / "housing.cells").string()});
  REQUIRE(compiled.status == 0);

  Result listed = run_cli({"list", (dir / "housing.cells").string()});
  REQUIRE(listed.status == 0);
  CHECK(listed.out.find("'House Stocks'!H4 = 'House Stocks'!F4 - 'House Stocks'!G4\n") !=
        std::string::npos);
  CHECK(listed.out.find("'House Stocks'!H13 = 'House Stocks'!F13 - 'House Stocks'!G13\n") !=
        std::string::npos);
}

TEST_CASE("cli: runs prints the run notation") {
  fs::path dir = test_dir();
  write_file(dir / "housing.xl", kHousingModule);
  REQUIRE(run_cli({"compile", (dir / "housing.xl").string(), "-o",
                   (dir / "housing.cells").string()})
              .status == 0);
  Result r = run_cli({"runs", (dir / "housing.cells").string()});
  REQUIRE(r.status == 0);
  CHECK(r.out ==
        "'House Stocks'!H[V0 in 4:13] = 'House Stocks'!F[V0] - 'House Stocks'!G[V0]\n");
}

TEST_CASE("cli: compile | runs | expand over standard streams is the identity") {
  fs::path dir = test_dir();
  write_file(dir / "housing.xl", kHousingModule);
  Result compiled = run_cli({"compile", (dir / "housing.xl").string(), "-o", "-"});
  REQUIRE(compiled.status == 0);

  Result runs_result = run_cli({"runs", "-", "-o", "-"}, compiled.out);
  REQUIRE(runs_result.status == 0);

  Result expanded = run_cli({"expand", "-", "-o", "-"}, runs_result.out);
  REQUIRE(expanded.status == 0);
  CHECK(expanded.out == compiled.out);
}

TEST_CASE("cli: rename produces a recompilable module") {
  fs::path dir = test_dir();
  write_file(dir / "housing.xl", kHousingModule);
  REQUIRE(run_cli({"compile", (dir / "housing.xl").string(), "-o",
                   (dir / "housing.cells").string()})
              .status == 0);
  write_file(dir / "housing.names",
             "name Net = 'House Stocks'!H4:H13 rows 4->2000\n"
             "name Builds = 'House Stocks'!F4:F13 rows 4->2000\n"
             "name Demolitions = 'House Stocks'!G4:G13 rows 4->2000\n");
  Result renamed = run_cli({"rename", (dir / "housing.cells").string(), "--names",
                            (dir / "housing.names").string(), "-o",
                            (dir / "recovered.xl").string()});
  REQUIRE(renamed.status == 0);
  std::string module_text = read_file(dir / "recovered.xl");
  CHECK(module_text.find("Net[all V0] = Builds[V0] - Demolitions[V0]\n") != std::string::npos);

  Result recompiled = run_cli({"compile", (dir / "recovered.xl").string(), "-o", "-"});
  REQUIRE(recompiled.status == 0);
  CHECK(recompiled.out == read_file(dir / "housing.cells"));
}

TEST_CASE("cli: graph emits DOT text") {
  Result r = run_cli({"graph", "-"}, "A!B2 = C!D4 + 1\n");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("digraph sheets {") != std::string::npos);
  CHECK(r.out.find("\"A\" -> \"C\" [label=\"1\"];") != std::string::npos);
  Result bare = run_cli({"graph", "-", "--no-counts"}, "A!B2 = C!D4 + 1\n");
  CHECK(bare.out.find("label") == std::string::npos);
}

TEST_CASE("cli: tangle and weave") {
  fs::path dir = test_dir();
  write_file(dir / "doc.lit", "Prose about the table.\n  table T[1:2]\n");
  Result tangled = run_cli({"tangle", (dir / "doc.lit").string()});
  REQUIRE(tangled.status == 0);
  CHECK(tangled.out == "table T[1:2]\n");

  Result woven =
      run_cli({"weave", (dir / "doc.lit").string(), "-o", (dir / "doc.html").string()});
  REQUIRE(woven.status == 0);
  std::string html = read_file(dir / "doc.html");
  CHECK(html.find("<pre class=\"code\">table T[1:2]</pre>") != std::string::npos);
  CHECK(html.find("Prose about the table.") != std::string::npos);
}

TEST_CASE("cli: docset builds a site directory") {
  fs::path dir = test_dir();
  fs::remove_all(dir / "wiki");
  fs::create_directories(dir / "wiki");
  write_file(dir / "wiki" / "Model.wiki", "[[Category:Model]] [[has module::Core]]");
  write_file(dir / "wiki" / "Core.wiki",
             "[[Category:Module]]\n<ask> [[has module::{{PAGENAME}}]] </ask>");
  Result r = run_cli({"docset", (dir / "wiki").string(), "-o", (dir / "site").string()});
  REQUIRE(r.status == 0);
  CHECK(fs::exists(dir / "site" / "index.html"));
  std::string core = read_file(dir / "site" / "Core.html");
  CHECK(core.find(">Model</a>") != std::string::npos);
}

TEST_CASE("cli: input errors exit 1 with positioned diagnostics") {
  fs::path dir = test_dir();
  Result missing = run_cli({"list", (dir / "nope.cells").string()});
  CHECK(missing.status == 1);
  CHECK(missing.err.find("error:") != std::string::npos);
  CHECK(missing.err.find("nope.cells") != std::string::npos);

  write_file(dir / "bad.cells", "S!A1 = 1\nS!A1 = 2\n");
  Result dup = run_cli({"list", (dir / "bad.cells").string()});
  CHECK(dup.status == 1);
  CHECK(dup.err.find("bad.cells:2:1") != std::string::npos);
}

TEST_CASE("cli: failed runs leave no partial output file") {
  fs::path dir = test_dir();
  write_file(dir / "bad.cells", "S!A1 = 1 +\n");
  fs::path target = dir / "never.runs";
  fs::remove(target);
  Result r = run_cli({"runs", (dir / "bad.cells").string(), "-o", target.string()});
  CHECK(r.status == 1);
  CHECK(!fs::exists(target));
  CHECK(!fs::exists(target.string() + ".tmp"));
}

TEST_CASE("cli: a separate layout file joins the compiled modules") {
  fs::path dir = test_dir();
  write_file(dir / "eqs.xl",
             "table T[1:3]\n"
             "T[all y] = 7\n");
  write_file(dir / "grid.layout", "place T at S!A1 down\n");
  Result r = run_cli({"compile", (dir / "eqs.xl").string(), "--layout",
                      (dir / "grid.layout").string(), "-o", "-"});
  REQUIRE(r.status == 0);
  CHECK(r.out == "S!A1 = 7\nS!A2 = 7\nS!A3 = 7\n");

  // without the layout the used table is unplaced
  Result bare = run_cli({"compile", (dir / "eqs.xl").string(), "-o", "-"});
  CHECK(bare.status == 1);
  CHECK(bare.err.find("no layout") != std::string::npos);
}

TEST_CASE("cli: rename accepts run listings by extension") {
  fs::path dir = test_dir();
  write_file(dir / "block.runs", "'S'!A[V0 in 1:3] = [10*V0]\n");
  write_file(dir / "block.names", "name Tens = 'S'!A1:A3 rows 1->1\n");
  Result r = run_cli({"rename", (dir / "block.runs").string(), "--names",
                      (dir / "block.names").string()});
  REQUIRE(r.status == 0);
  CHECK(r.out.find("table Tens[1:3]") != std::string::npos);
}
