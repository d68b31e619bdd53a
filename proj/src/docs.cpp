#include "tableq/docs.hpp"

#include <algorithm>

namespace tableq::docs {

// --- Literate splitting ----------------------------------------------------------

namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

bool starts_code(const std::string& line) { return line.rfind("  ", 0) == 0; }

}  // namespace

LiterateFile split_literate(std::string_view text) {
  std::vector<std::string> lines = split_lines(text);
  size_t n = lines.size();
  std::vector<bool> code(n, false);

  for (size_t i = 0; i < n; ++i)
    if (!is_blank(lines[i])) code[i] = starts_code(lines[i]);
  // a blank line is code iff the nearest non-blank lines above and below are
  // both code
  for (size_t i = 0; i < n; ++i) {
    if (!is_blank(lines[i])) continue;
    bool above = false, below = false;
    for (size_t j = i; j-- > 0;)
      if (!is_blank(lines[j])) {
        above = code[j];
        break;
      }
    for (size_t j = i + 1; j < n; ++j)
      if (!is_blank(lines[j])) {
        below = code[j];
        break;
      }
    code[i] = above && below;
  }

  LiterateFile out;
  for (size_t i = 0; i < n; ++i) {
    std::string line = lines[i];
    if (code[i] && starts_code(line)) line.erase(0, 2);
    if (code[i] && is_blank(lines[i])) line.clear();
    if (out.segments.empty() || out.segments.back().code != code[i])
      out.segments.push_back({code[i], {}});
    out.segments.back().lines.push_back(std::move(line));
  }
  return out;
}

std::string tangle(std::string_view text) {
  std::string out;
  for (const auto& segment : split_literate(text).segments) {
    if (!segment.code) continue;
    for (const auto& line : segment.lines) {
      out += line;
      out.push_back('\n');
    }
  }
  return out;
}

// --- Markup rendering --------------------------------------------------------------

namespace {

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

std::string trim(std::string_view s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  size_t b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::string render_link(const std::string& inner, const MarkupOptions& opts) {
  if (inner.rfind("Category:", 0) == 0) return {};  // category markers render as nothing
  std::string target = inner;
  size_t sep = inner.find("::");
  if (sep != std::string::npos) target = trim(inner.substr(sep + 2));
  else target = trim(inner);
  if (target.empty()) return escape_html("[[" + inner + "]]");
  bool exists = !opts.page_exists || opts.page_exists(target);
  std::string out = "<a ";
  if (!exists) out += "class=\"missing\" ";
  out += "href=\"" + escape_html(page_href(target)) + "\">" + escape_html(target) + "</a>";
  return out;
}

// Inline markup: links, '''bold''', ''italic''. Unterminated forms render
// literally.
std::string render_inline(std::string_view text, const MarkupOptions& opts) {
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, 2, "[[") == 0) {
      size_t close = text.find("]]", i + 2);
      if (close != std::string_view::npos) {
        out += render_link(std::string(text.substr(i + 2, close - i - 2)), opts);
        i = close + 2;
        continue;
      }
    }
    if (text.compare(i, 3, "'''") == 0) {
      size_t close = text.find("'''", i + 3);
      if (close != std::string_view::npos) {
        out += "<b>" + render_inline(text.substr(i + 3, close - i - 3), opts) + "</b>";
        i = close + 3;
        continue;
      }
    }
    if (text.compare(i, 2, "''") == 0) {
      size_t close = text.find("''", i + 2);
      if (close != std::string_view::npos) {
        out += "<i>" + render_inline(text.substr(i + 2, close - i - 2), opts) + "</i>";
        i = close + 2;
        continue;
      }
    }
    out += escape_html(text.substr(i, 1));
    ++i;
  }
  return out;
}

// A heading line: 1-6 '=' on both ends with the same count.
bool heading_line(const std::string& line, int& level, std::string& title) {
  size_t a = 0;
  while (a < line.size() && line[a] == '=') ++a;
  if (a == 0 || a > 6) return false;
  size_t b = line.size();
  while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t' || line[b - 1] == '\r')) --b;
  size_t e = b;
  while (e > a && line[e - 1] == '=') --e;
  if (b - e != a) return false;
  std::string inner = trim(std::string_view(line).substr(a, e - a));
  if (inner.empty()) return false;
  level = static_cast<int>(a);
  title = inner;
  return true;
}

}  // namespace

std::string page_href(const std::string& name) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : name) {
    bool plain = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                 c == '.' || c == '_' || c == '-';
    if (plain) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out + ".html";
}

std::string render_markup(std::string_view text, const MarkupOptions& opts) {
  std::vector<std::string> lines = split_lines(text);
  std::string out;
  std::vector<std::string> paragraph;
  bool in_list = false;

  auto flush_paragraph = [&] {
    if (paragraph.empty()) return;
    out += "<p>";
    for (size_t i = 0; i < paragraph.size(); ++i) {
      if (i) out.push_back('\n');
      out += render_inline(paragraph[i], opts);
    }
    out += "</p>\n";
    paragraph.clear();
  };
  auto close_list = [&] {
    if (in_list) {
      out += "</ul>\n";
      in_list = false;
    }
  };

  for (const auto& line : lines) {
    int level = 0;
    std::string title;
    if (is_blank(line)) {
      flush_paragraph();
      close_list();
      continue;
    }
    if (heading_line(line, level, title)) {
      flush_paragraph();
      close_list();
      out += "<h" + std::to_string(level) + ">" + render_inline(title, opts) + "</h" +
             std::to_string(level) + ">\n";
      continue;
    }
    if (line[0] == '*') {
      flush_paragraph();
      if (!in_list) {
        out += "<ul>\n";
        in_list = true;
      }
      out += "<li>" + render_inline(trim(std::string_view(line).substr(1)), opts) + "</li>\n";
      continue;
    }
    close_list();
    paragraph.push_back(line);
  }
  flush_paragraph();
  close_list();
  return out;
}

// --- Facts --------------------------------------------------------------------------

namespace {

// Removes <ask>...</ask> spans, returning them separately.
std::string extract_asks(std::string_view text, std::vector<std::string>* queries,
                         const std::string& placeholder_mark = "") {
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    size_t open = text.find("<ask>", i);
    if (open == std::string_view::npos) {
      out += text.substr(i);
      break;
    }
    size_t close = text.find("</ask>", open);
    if (close == std::string_view::npos) {
      out += text.substr(i);
      break;
    }
    out += text.substr(i, open - i);
    if (queries) {
      if (!placeholder_mark.empty())
        out += "\x01" + placeholder_mark + std::to_string(queries->size()) + "\x01";
      queries->emplace_back(text.substr(open + 5, close - open - 5));
    }
    i = close + 6;
  }
  return out;
}

// Scans [[...]] occurrences in prose, feeding categories, typed and untyped
// links.
void scan_links(const std::string& page, std::string_view text, FactBase& fb) {
  size_t i = 0;
  while (true) {
    size_t open = text.find("[[", i);
    if (open == std::string_view::npos) break;
    size_t close = text.find("]]", open + 2);
    if (close == std::string_view::npos) break;
    std::string inner(text.substr(open + 2, close - open - 2));
    i = close + 2;
    if (inner.rfind("Category:", 0) == 0) {
      std::string cat = trim(inner.substr(9));
      if (!cat.empty()) fb.categories[page].insert(cat);
      continue;
    }
    size_t sep = inner.find("::");
    if (sep != std::string::npos) {
      std::string prop = trim(inner.substr(0, sep));
      std::string target = trim(inner.substr(sep + 2));
      if (!prop.empty() && !target.empty()) fb.triples.insert({page, prop, target});
      continue;
    }
    std::string target = trim(inner);
    if (!target.empty()) fb.links.insert({page, target});
  }
}

// Prose of a page: for literate pages the code segments are dropped.
std::string prose_of(const Page& page) {
  if (!page.literate) return page.body;
  std::string out;
  for (const auto& segment : split_literate(page.body).segments) {
    if (segment.code) continue;
    for (const auto& line : segment.lines) {
      out += line;
      out.push_back('\n');
    }
  }
  return out;
}

}  // namespace

std::set<std::string> FactBase::backlinks(const std::string& target) const {
  std::set<std::string> out;
  for (const auto& [from, to] : links)
    if (to == target) out.insert(from);
  for (const auto& [subject, property, object] : triples)
    if (object == target) out.insert(subject);
  return out;
}

FactBase harvest_facts(const std::vector<Page>& pages) {
  std::set<std::string> names;
  for (const auto& page : pages)
    if (!names.insert(page.name).second)
      fail({}, "duplicate page name '" + page.name + "'");

  FactBase fb;
  for (const auto& page : pages) {
    std::string prose = extract_asks(prose_of(page), nullptr);
    scan_links(page.name, prose, fb);
  }
  return fb;
}

// --- Inline queries -----------------------------------------------------------------

AskQuery parse_ask(std::string_view query, const std::string& pagename) {
  std::string text(query);
  // {{PAGENAME}} resolves to the hosting page
  size_t at;
  while ((at = text.find("{{PAGENAME}}")) != std::string::npos)
    text.replace(at, 12, pagename);

  AskQuery out;
  size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    if (text.compare(i, 2, "[[") != 0) fail({}, "unsupported query syntax: " + trim(text));
    size_t close = text.find("]]", i + 2);
    if (close == std::string::npos) fail({}, "unterminated pattern in query: " + trim(text));
    std::string inner = text.substr(i + 2, close - i - 2);
    i = close + 2;
    AskQuery::Pattern pattern;
    if (inner.rfind("Category:", 0) == 0) {
      pattern.category = true;
      pattern.value = trim(inner.substr(9));
    } else {
      size_t sep = inner.find("::");
      if (sep == std::string::npos)
        fail({}, "unsupported pattern [[" + inner + "]]; expected prop::value or Category:value");
      pattern.property = trim(inner.substr(0, sep));
      pattern.value = trim(inner.substr(sep + 2));
      if (pattern.property.empty()) fail({}, "empty property in pattern [[" + inner + "]]");
    }
    if (pattern.value.empty()) fail({}, "empty value in pattern [[" + inner + "]]");
    out.patterns.push_back(std::move(pattern));
  }
  if (out.patterns.empty()) fail({}, "empty query");
  return out;
}

std::vector<std::string> answer_query(const AskQuery& query, const FactBase& facts) {
  std::set<std::string> result;
  bool first = true;
  for (const auto& pattern : query.patterns) {
    std::set<std::string> matches;
    if (pattern.category) {
      for (const auto& [page, cats] : facts.categories)
        if (cats.count(pattern.value)) matches.insert(page);
    } else {
      for (const auto& [subject, property, object] : facts.triples)
        if (property == pattern.property && object == pattern.value) matches.insert(subject);
    }
    if (first) {
      result = std::move(matches);
      first = false;
    } else {
      std::set<std::string> both;
      std::set_intersection(result.begin(), result.end(), matches.begin(), matches.end(),
                            std::inserter(both, both.begin()));
      result = std::move(both);
    }
    if (result.empty()) break;
  }
  return {result.begin(), result.end()};
}

namespace detail {

// shared with the docset builder
std::string extract_ask_spans(std::string_view text, std::vector<std::string>& queries,
                              const std::string& mark) {
  return extract_asks(text, &queries, mark);
}

}  // namespace detail

}  // namespace tableq::docs
