#include "tableq/discover.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "lexer.hpp"

namespace tableq::discover {

using cells::CellAddr;
using cells::Workbook;
using compiler::ElementEquation;
using dsl::EqExpr;
using dsl::SubExpr;

// --- Naming map parsing --------------------------------------------------------

namespace {

using lex::Lexer;
using lex::Tok;
using lex::Token;

std::optional<std::pair<int, int>> split_col_row(std::string_view s) {
  size_t i = 0;
  while (i < s.size() && s[i] >= 'A' && s[i] <= 'Z') ++i;
  if (i == 0 || i == s.size()) return std::nullopt;
  long long row = 0;
  for (size_t j = i; j < s.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) return std::nullopt;
    row = row * 10 + (s[j] - '0');
    if (row > (1LL << 30)) return std::nullopt;
  }
  return std::make_pair(cells::col_to_index(s.substr(0, i)), static_cast<int>(row));
}

long long signed_integer(Lexer& lx) {
  bool negative = false;
  if (lx.peek().punct("-")) {
    lx.next();
    negative = true;
  }
  const Token& t = lx.peek();
  if (!t.is(Tok::Number)) lx.error_at(t, "expected an integer");
  for (char c : t.text)
    if (!std::isdigit(static_cast<unsigned char>(c))) lx.error_at(t, "expected an integer");
  if (t.number > static_cast<double>(1LL << 30)) lx.error_at(t, "number too large");
  long long v = static_cast<long long>(lx.next().number);
  return negative ? -v : v;
}

NamingEntry parse_entry(Lexer& lx) {
  NamingEntry entry;
  entry.pos = lx.peek().pos;
  lx.next();  // 'name'
  entry.table = lx.expect_ident().text;
  lx.expect_punct("=");

  const Token& t = lx.peek();
  if (t.is(Tok::Sheet)) {
    entry.sheet = lx.next().text;
  } else if (t.is(Tok::Ident) && lx.peek(1).punct("!")) {
    entry.sheet = lx.next().text;
  } else {
    lx.error_at(t, "expected a sheet-qualified rectangle like 'Sheet'!A1:B9");
  }
  lx.expect_punct("!");
  Token tl = lx.expect_ident();
  auto a = split_col_row(tl.text);
  if (!a || a->second < 1) lx.error_at(tl, "expected a cell like A1");
  int c2 = a->first, r2 = a->second;
  if (lx.peek().punct(":")) {
    lx.next();
    Token br = lx.expect_ident();
    auto b = split_col_row(br.text);
    if (!b || b->second < 1) lx.error_at(br, "expected a cell like B9 after ':'");
    c2 = b->first;
    r2 = b->second;
  }
  entry.c1 = std::min(a->first, c2);
  entry.c2 = std::max(a->first, c2);
  entry.r1 = std::min(a->second, r2);
  entry.r2 = std::max(a->second, r2);

  while (!lx.at_end()) {
    const Token& clause = lx.peek();
    if (clause.ident("rows")) {
      if (entry.row_base) lx.error_at(clause, "duplicate rows clause");
      lx.next();
      const Token& anchor_tok = lx.peek();
      long long anchor = signed_integer(lx);
      lx.expect_punct("->");
      long long sub = signed_integer(lx);
      if (anchor < entry.r1 || anchor > entry.r2)
        fail(anchor_tok.pos, "rows anchor " + std::to_string(anchor) +
                                 " is outside the rectangle rows " + std::to_string(entry.r1) +
                                 ":" + std::to_string(entry.r2));
      entry.row_base = NamingEntry::Base{static_cast<int>(anchor), sub};
    } else if (clause.ident("cols")) {
      if (entry.col_base) lx.error_at(clause, "duplicate cols clause");
      lx.next();
      Token anchor_tok = lx.expect_ident();
      int anchor = cells::col_to_index(anchor_tok.text);
      lx.expect_punct("->");
      long long sub = signed_integer(lx);
      if (anchor < entry.c1 || anchor > entry.c2)
        fail(anchor_tok.pos, "cols anchor " + anchor_tok.text +
                                 " is outside the rectangle columns " +
                                 cells::index_to_col(entry.c1) + ":" +
                                 cells::index_to_col(entry.c2));
      entry.col_base = NamingEntry::Base{anchor, sub};
    } else {
      lx.error_at(clause, "expected a 'rows' or 'cols' clause");
    }
  }

  if (!entry.row_base && !entry.col_base)
    fail(entry.pos, "entry '" + entry.table + "' needs a rows or cols clause");
  if (!entry.row_base && entry.r1 != entry.r2)
    fail(entry.pos, "entry '" + entry.table + "' spans several rows but has no rows clause");
  if (!entry.col_base && entry.c1 != entry.c2)
    fail(entry.pos, "entry '" + entry.table + "' spans several columns but has no cols clause");
  return entry;
}

}  // namespace

NamingMap parse_naming_map(std::string_view text, std::string filename) {
  NamingMap map;
  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    bool last = nl == std::string_view::npos;
    start = last ? text.size() + 1 : nl + 1;
    if (last && line.empty()) break;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;

    Lexer lx(line, filename, line_no, 1);
    if (!lx.peek().ident("name"))
      lx.error_at(lx.peek(), "expected a 'name' entry");
    map.entries.push_back(parse_entry(lx));
  }

  for (size_t i = 0; i < map.entries.size(); ++i) {
    for (size_t j = i + 1; j < map.entries.size(); ++j) {
      const NamingEntry& a = map.entries[i];
      const NamingEntry& b = map.entries[j];
      if (a.table == b.table)
        fail(b.pos, "duplicate table name '" + b.table + "'");
      if (a.sheet != b.sheet) continue;
      int c1 = std::max(a.c1, b.c1), c2 = std::min(a.c2, b.c2);
      int r1 = std::max(a.r1, b.r1), r2 = std::min(a.r2, b.r2);
      if (c1 <= c2 && r1 <= r2)
        fail(b.pos, "rectangles '" + a.table + "' and '" + b.table + "' overlap at " +
                        cells::to_string({a.sheet, c1, r1}));
    }
  }
  return map;
}

// --- Element mapping -----------------------------------------------------------

std::optional<Element> cell_to_element(const CellAddr& addr, const NamingMap& map) {
  for (const auto& entry : map.entries) {
    if (!entry.contains(addr)) continue;
    Element el;
    el.table = entry.table;
    if (entry.row_base)
      el.subs.push_back(entry.row_base->subscript + addr.row - entry.row_base->anchor);
    if (entry.col_base)
      el.subs.push_back(entry.col_base->subscript + addr.col - entry.col_base->anchor);
    return el;
  }
  return std::nullopt;
}

dsl::TableDecl entry_decl(const NamingEntry& entry) {
  dsl::TableDecl decl;
  decl.name = entry.table;
  if (entry.row_base) {
    long long lo = entry.row_base->subscript + entry.r1 - entry.row_base->anchor;
    decl.dims.push_back({lo, lo + (entry.r2 - entry.r1)});
  }
  if (entry.col_base) {
    long long lo = entry.col_base->subscript + entry.c1 - entry.col_base->anchor;
    decl.dims.push_back({lo, lo + (entry.c2 - entry.c1)});
  }
  decl.pos = entry.pos;
  return decl;
}

dsl::LayoutItem entry_layout(const NamingEntry& entry) {
  dsl::LayoutItem item;
  item.table = entry.table;
  item.anchor = CellAddr{entry.sheet, entry.c1, entry.r1};
  if (entry.row_base && entry.col_base)
    item.orient = dsl::Orient::None;
  else if (entry.row_base)
    item.orient = dsl::Orient::Down;
  else
    item.orient = dsl::Orient::Across;
  item.pos = entry.pos;
  return item;
}

// --- Generalization ------------------------------------------------------------

namespace {

// The skeleton of a right-hand side: its printable structure with every
// unifiable position (table subscripts, fixed cell pattern columns/rows)
// replaced by a hole. Elements share a template iff their skeletons match.
struct Skeleton {
  std::string key;
  std::vector<long long> holes;
};

void skeleton_walk(const EqExpr& e, Skeleton& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, EqExpr::TableRef>) {
          out.key += "T" + std::to_string(node.table.size()) + ":" + node.table + "(";
          for (const auto& sub : node.subs) {
            if (sub.is_const()) {
              out.key += "?,";
              out.holes.push_back(sub.offset);
            } else {
              out.key += dsl::to_string(sub) + ",";
            }
          }
          out.key += ")";
        } else if constexpr (std::is_same_v<T, EqExpr::CellPat>) {
          out.key += "P" + std::to_string(node.sheet.size()) + ":" + node.sheet + "(";
          for (const SubExpr* part : {&node.col, &node.row}) {
            if (part->is_const()) {
              out.key += "?,";
              out.holes.push_back(part->offset);
            } else {
              out.key += dsl::to_string(*part) + ",";
            }
          }
          out.key += ")";
        } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
          out.key += "N(";
          skeleton_walk(node.operand, out);
          out.key += ")";
        } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
          out.key += "B";
          out.key += cells::op_token(node.op);
          out.key += "(";
          skeleton_walk(node.lhs, out);
          out.key += ",";
          skeleton_walk(node.rhs, out);
          out.key += ")";
        } else if constexpr (std::is_same_v<T, EqExpr::Call>) {
          out.key += "C" + std::to_string(node.name.size()) + ":" + node.name + "(";
          for (const auto& a : node.args) {
            skeleton_walk(a, out);
            out.key += ",";
          }
          out.key += ")";
        } else {
          // literals, linear forms, ranges, parameters: structural text
          std::string text = dsl::print_expr(e);
          out.key += "L" + std::to_string(text.size()) + ":" + text;
        }
      },
      e.node());
}

// Rebuilds the first element's right-hand side with each hole replaced by
// its unified subscript expression.
EqExpr rebuild(const EqExpr& e, const std::vector<SubExpr>& unified, size_t& next) {
  return std::visit(
      [&](const auto& node) -> EqExpr {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, EqExpr::TableRef>) {
          std::vector<SubExpr> subs;
          subs.reserve(node.subs.size());
          for (const auto& sub : node.subs)
            subs.push_back(sub.is_const() ? unified[next++] : sub);
          return EqExpr::table_ref(node.table, std::move(subs));
        } else if constexpr (std::is_same_v<T, EqExpr::CellPat>) {
          SubExpr col = node.col.is_const() ? unified[next++] : node.col;
          SubExpr row = node.row.is_const() ? unified[next++] : node.row;
          return EqExpr::cell_pat(node.sheet, std::move(col), std::move(row));
        } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
          return EqExpr::negate(rebuild(node.operand, unified, next));
        } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
          EqExpr lhs = rebuild(node.lhs, unified, next);
          return EqExpr::binary(node.op, std::move(lhs), rebuild(node.rhs, unified, next));
        } else if constexpr (std::is_same_v<T, EqExpr::Call>) {
          std::vector<EqExpr> args;
          args.reserve(node.args.size());
          for (const auto& a : node.args) args.push_back(rebuild(a, unified, next));
          return EqExpr::call(node.name, std::move(args));
        } else {
          return e;
        }
      },
      e.node());
}

std::string dim_var(size_t dim) { return "V" + std::to_string(dim); }

// One table's elements -> one quantified equation, or nothing.
std::optional<dsl::TableEquation> generalize_table(const std::vector<const ElementEquation*>& els,
                                                   const dsl::TableDecl& decl) {
  if (els.size() < 2) return std::nullopt;  // single elements stay as they are
  long long product = 1;
  for (const auto& dim : decl.dims) {
    product *= dim.size();
    if (product > 4000000) return std::nullopt;
  }
  if (static_cast<long long>(els.size()) != product) return std::nullopt;
  std::set<std::vector<long long>> seen;
  for (const ElementEquation* el : els) {
    if (el->subs.size() != decl.dims.size()) return std::nullopt;
    for (size_t d = 0; d < el->subs.size(); ++d)
      if (!decl.dims[d].contains(el->subs[d])) return std::nullopt;
    if (!seen.insert(el->subs).second) return std::nullopt;
  }

  std::vector<Skeleton> skels(els.size());
  for (size_t i = 0; i < els.size(); ++i) {
    skeleton_walk(els[i]->rhs, skels[i]);
    if (skels[i].key != skels[0].key) return std::nullopt;
  }

  size_t holes = skels[0].holes.size();
  std::vector<SubExpr> unified;
  unified.reserve(holes);
  for (size_t h = 0; h < holes; ++h) {
    bool constant = true;
    for (size_t i = 1; i < els.size() && constant; ++i)
      constant = skels[i].holes[h] == skels[0].holes[h];
    if (constant) {
      unified.push_back(SubExpr::constant(skels[0].holes[h]));
      continue;
    }
    bool found = false;
    for (size_t d = 0; d < decl.dims.size() && !found; ++d) {
      long long offset = skels[0].holes[h] - els[0]->subs[d];
      bool fits = true;
      for (size_t i = 0; i < els.size() && fits; ++i)
        fits = skels[i].holes[h] == els[i]->subs[d] + offset;
      if (fits) {
        unified.push_back(SubExpr::variable(dim_var(d), offset));
        found = true;
      }
    }
    if (!found) return std::nullopt;
  }

  // Unified offsets hold for every element, so rebuilding from any one of
  // them gives the same template.
  dsl::TableEquation eq;
  eq.table = decl.name;
  for (size_t d = 0; d < decl.dims.size(); ++d) eq.lhs.push_back({true, dim_var(d), 0});
  size_t next = 0;
  eq.rhs = rebuild(els[0]->rhs, unified, next);
  eq.pos = els[0]->pos;
  return eq;
}

}  // namespace

GeneralizeResult generalize(const std::vector<ElementEquation>& elements,
                            const compiler::DeclEnv& decls) {
  std::map<std::string, std::vector<const ElementEquation*>> by_table;
  for (const auto& el : elements) by_table[el.table].push_back(&el);

  GeneralizeResult out;
  for (const auto& [table, els] : by_table) {
    auto decl_it = decls.find(table);
    std::optional<dsl::TableEquation> eq;
    if (decl_it != decls.end()) eq = generalize_table(els, decl_it->second);
    if (eq) {
      out.equations.push_back(std::move(*eq));
    } else {
      for (const ElementEquation* el : els) out.leftovers.push_back(*el);
    }
  }
  return out;
}

// --- Renaming -------------------------------------------------------------------

NamedEquationSet rename(const Workbook& workbook, const NamingMap& map) {
  NamedEquationSet out;
  compiler::DeclEnv decls;
  std::vector<NamingEntry> sorted_entries = map.entries;
  std::sort(sorted_entries.begin(), sorted_entries.end(),
            [](const NamingEntry& a, const NamingEntry& b) { return a.table < b.table; });
  for (const auto& entry : sorted_entries) {
    dsl::TableDecl decl = entry_decl(entry);
    decls.emplace(decl.name, decl);
    out.decls.push_back(std::move(decl));
    out.layout.push_back(entry_layout(entry));
  }

  auto map_ref = [&map](const CellAddr& addr) -> EqExpr {
    if (auto el = cell_to_element(addr, map)) {
      std::vector<SubExpr> subs;
      subs.reserve(el->subs.size());
      for (long long s : el->subs) subs.push_back(SubExpr::constant(s));
      return EqExpr::table_ref(el->table, std::move(subs));
    }
    return EqExpr::cell_pat(addr.sheet, SubExpr::constant(addr.col),
                            SubExpr::constant(addr.row));
  };

  std::vector<ElementEquation> elements;
  for (const auto& [addr, formula] : workbook.cells) {
    EqExpr rhs = dsl::from_formula(formula, map_ref);
    if (auto el = cell_to_element(addr, map)) {
      elements.push_back({el->table, el->subs, std::move(rhs), {}});
    } else {
      out.residue.push_back({addr, std::move(rhs), {}});
    }
  }

  GeneralizeResult g = generalize(elements, decls);
  out.equations = std::move(g.equations);
  std::sort(g.leftovers.begin(), g.leftovers.end(),
            [](const ElementEquation& a, const ElementEquation& b) {
              return std::tie(a.table, a.subs) < std::tie(b.table, b.subs);
            });
  for (const auto& el : g.leftovers) {
    dsl::TableEquation eq;
    eq.table = el.table;
    for (long long s : el.subs) eq.lhs.push_back({false, "", s});
    eq.rhs = el.rhs;
    out.equations.push_back(std::move(eq));
  }
  std::stable_sort(out.equations.begin(), out.equations.end(),
                   [](const dsl::TableEquation& a, const dsl::TableEquation& b) {
                     return a.table < b.table;
                   });
  return out;
}

dsl::ModuleAst to_module(const NamedEquationSet& set) {
  dsl::ModuleAst module;
  module.tables = set.decls;
  module.layout = set.layout;
  module.equations = set.equations;
  module.cell_equations = set.residue;
  return module;
}

std::string print_named_set(const NamedEquationSet& set) {
  return print_module(to_module(set));
}

}  // namespace tableq::discover
