#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tableq/diag.hpp"

namespace tableq::docs {

// --- Literate files -------------------------------------------------------------
//
// A line is code iff it starts with at least two spaces. Blank lines between
// two code lines belong to the code block; blank lines next to prose are
// prose.

struct Segment {
  bool code = false;
  std::vector<std::string> lines;  // code lines have the two-space marker stripped
};

struct LiterateFile {
  std::vector<Segment> segments;
};

LiterateFile split_literate(std::string_view text);

// The code lines only, in order, one per output line.
std::string tangle(std::string_view text);

// --- Markup ---------------------------------------------------------------------
//
// Supported: '''bold''', ''italic'', [[Page]] and [[prop::Page]] links,
// = Heading = / == Heading ==, * bullets. [[Category:X]] markers render as
// nothing. Anything malformed renders literally.

struct MarkupOptions {
  // Resolves whether a link target exists; unresolved targets render with a
  // "missing" style. Unset means every target exists.
  std::function<bool(const std::string&)> page_exists;
};

std::string render_markup(std::string_view text, const MarkupOptions& opts = {});

// URL form of a page name, e.g. "anonymous banking" -> "anonymous%20banking.html".
std::string page_href(const std::string& name);

// --- Pages and the fact base ------------------------------------------------------

struct Page {
  std::string name;  // unique; doubles as the topic's canonical name
  std::string body;  // raw markup (or literate text)
  bool literate = false;
};

// Typed links are facts; untyped links are recorded for backlink indices;
// [[Category:X]] markers categorize the page. Links inside <ask> blocks and
// inside literate code are not facts.
struct FactBase {
  std::set<std::tuple<std::string, std::string, std::string>> triples;  // subject, property, object
  std::set<std::pair<std::string, std::string>> links;                  // untyped subject -> object
  std::map<std::string, std::set<std::string>> categories;              // page -> categories

  // Pages linking to target, typed or untyped.
  std::set<std::string> backlinks(const std::string& target) const;
};

// Duplicate page names are an error.
FactBase harvest_facts(const std::vector<Page>& pages);

// --- Inline queries ----------------------------------------------------------------
//
// The supported <ask> subset: a conjunction of [[prop::value]] and
// [[Category:value]] patterns. {{PAGENAME}} in a value resolves to the
// hosting page before evaluation.

struct AskQuery {
  struct Pattern {
    bool category = false;
    std::string property;  // empty for category patterns
    std::string value;
  };
  std::vector<Pattern> patterns;
};

// Throws Error on anything outside the supported subset.
AskQuery parse_ask(std::string_view query, const std::string& pagename);

// Page names satisfying every pattern, sorted.
std::vector<std::string> answer_query(const AskQuery& query, const FactBase& facts);

// --- Weaving and the docset --------------------------------------------------------

// One standalone HTML page: prose through the markup renderer, code set off
// in shaded boxes. <ask> blocks are answered against this file's own links.
std::string weave(std::string_view literate_text, const std::string& title);

struct Site {
  std::map<std::string, std::string> files;  // relative file name -> content
};

// One HTML file per page plus index.html with per-category indices. Every
// page gets a backlink section. Output is a pure function of the input.
Site build_docset(const std::vector<Page>& pages);

// Reads *.wiki (plain markup) and *.lit (literate) files; page name = stem.
std::vector<Page> load_pages(const std::filesystem::path& srcdir);

void write_site(const Site& site, const std::filesystem::path& outdir);

}  // namespace tableq::docs
