#include <algorithm>
#include <fstream>
#include <sstream>

#include "docs_internal.hpp"
#include "tableq/docs.hpp"

namespace tableq::docs {

namespace {

constexpr const char* kStylesheet =
    "body { font-family: sans-serif; max-width: 50em; margin: 2em auto; padding: 0 1em; }\n"
    "pre.code { background: #eaf3fb; border: 1px solid #c9dcee; padding: 0.6em 1em;\n"
    "           margin-left: 2em; overflow-x: auto; }\n"
    "a.missing { color: #ba0000; }\n"
    "ul.ask { border-left: 3px solid #c9dcee; padding-left: 2em; }\n"
    "div.error { background: #fdecea; border: 1px solid #c0392b; padding: 0.5em 1em; }\n"
    "p.categories { color: #555; border-top: 1px solid #ccc; padding-top: 0.5em; }\n"
    "h2.generated { border-bottom: 1px solid #ccc; }\n";

std::string escape_html(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string page_shell(const std::string& title, const std::string& body) {
  return "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" +
         escape_html(title) + "</title>\n<style>\n" + kStylesheet +
         "</style>\n</head>\n<body>\n<h1>" + escape_html(title) + "</h1>\n" + body +
         "</body>\n</html>\n";
}

std::string link_to(const std::string& name) {
  return "<a href=\"" + escape_html(page_href(name)) + "\">" + escape_html(name) + "</a>";
}

std::string answer_html(const std::vector<std::string>& names) {
  if (names.empty()) return "<p class=\"ask-empty\">(none)</p>\n";
  std::string out = "<ul class=\"ask\">\n";
  for (const auto& name : names) out += "<li>" + link_to(name) + "</li>\n";
  return out + "</ul>\n";
}

// Renders prose: evaluates <ask> spans against the fact base, then the
// markup, then splices the answers back in.
std::string render_prose(const std::string& page, std::string_view text, const FactBase& facts,
                         const MarkupOptions& opts) {
  std::vector<std::string> queries;
  std::string stripped = detail::extract_ask_spans(text, queries, "ask");
  std::string html = render_markup(stripped, opts);
  for (size_t i = 0; i < queries.size(); ++i) {
    std::string placeholder = "\x01" "ask" + std::to_string(i) + "\x01";
    std::string replacement;
    try {
      replacement = answer_html(answer_query(parse_ask(queries[i], page), facts));
    } catch (const Error& e) {
      replacement = "<div class=\"error\">" + escape_html(e.message()) + "</div>\n";
    }
    size_t at = html.find(placeholder);
    if (at != std::string::npos) html.replace(at, placeholder.size(), replacement);
  }
  return html;
}

std::string code_box(const std::vector<std::string>& lines) {
  std::string joined;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i) joined.push_back('\n');
    joined += lines[i];
  }
  return "<pre class=\"code\">" + escape_html(joined) + "</pre>\n";
}

std::string render_body(const Page& page, const FactBase& facts, const MarkupOptions& opts) {
  if (!page.literate) return render_prose(page.name, page.body, facts, opts);
  std::string out;
  for (const auto& segment : split_literate(page.body).segments) {
    if (segment.code) {
      out += code_box(segment.lines);
    } else {
      std::string prose;
      for (const auto& line : segment.lines) {
        prose += line;
        prose.push_back('\n');
      }
      out += render_prose(page.name, prose, facts, opts);
    }
  }
  return out;
}

}  // namespace

std::string weave(std::string_view literate_text, const std::string& title) {
  Page page{title, std::string(literate_text), true};
  FactBase facts = harvest_facts({page});
  return page_shell(title, render_body(page, facts, MarkupOptions{}));
}

Site build_docset(const std::vector<Page>& pages) {
  FactBase facts = harvest_facts(pages);  // also rejects duplicate names
  std::set<std::string> names;
  for (const auto& page : pages) names.insert(page.name);
  if (names.count("index"))
    fail({}, "page name 'index' collides with the generated index page");

  MarkupOptions opts;
  opts.page_exists = [&names](const std::string& target) { return names.count(target) != 0; };

  Site site;
  for (const auto& page : pages) {
    std::string body = render_body(page, facts, opts);

    body += "<h2 class=\"generated\">What links here</h2>\n";
    std::set<std::string> sources = facts.backlinks(page.name);
    body += answer_html({sources.begin(), sources.end()});

    auto cats = facts.categories.find(page.name);
    if (cats != facts.categories.end()) {
      body += "<p class=\"categories\">Categories:";
      bool first = true;
      for (const auto& cat : cats->second) {
        body += first ? " " : ", ";
        body += escape_html(cat);
        first = false;
      }
      body += "</p>\n";
    }
    // file names keep the raw page name; hrefs percent-encode it
    site.files[page.name + ".html"] = page_shell(page.name, body);
  }

  // index.html: pages grouped by category, then the uncategorized
  std::map<std::string, std::set<std::string>> by_category;
  std::set<std::string> uncategorized = names;
  for (const auto& [page, cats] : facts.categories) {
    for (const auto& cat : cats) by_category[cat].insert(page);
    uncategorized.erase(page);
  }
  std::string body;
  for (const auto& [cat, members] : by_category) {
    body += "<h2>" + escape_html(cat) + "</h2>\n<ul>\n";
    for (const auto& name : members) body += "<li>" + link_to(name) + "</li>\n";
    body += "</ul>\n";
  }
  if (!uncategorized.empty()) {
    body += "<h2>Uncategorized</h2>\n<ul>\n";
    for (const auto& name : uncategorized) body += "<li>" + link_to(name) + "</li>\n";
    body += "</ul>\n";
  }
  site.files["index.html"] = page_shell("Index", body);
  return site;
}

std::vector<Page> load_pages(const std::filesystem::path& srcdir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(srcdir))
    fail({}, "'" + srcdir.string() + "' is not a directory");
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(srcdir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    if (ext == ".wiki" || ext == ".lit") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());

  std::vector<Page> pages;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail({}, "cannot open file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    pages.push_back({path.stem().string(), std::move(text).str(),
                     path.extension() == ".lit"});
  }
  return pages;
}

void write_site(const Site& site, const std::filesystem::path& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  for (const auto& [name, content] : site.files) {
    fs::path target = outdir / name;
    fs::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) fail({}, "cannot write '" + tmp.string() + "'");
      out << content;
    }
    fs::rename(tmp, target);
  }
}

}  // namespace tableq::docs
