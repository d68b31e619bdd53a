#include "tableq/compiler.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tableq::compiler {

using dsl::EqExpr;
using dsl::SubExpr;

namespace {

constexpr int kMacroExpansionLimit = 10000;
constexpr long long kElementLimit = 4000000;

std::string line_of(const SourcePos& pos) {
  return pos.known() ? "line " + std::to_string(pos.line) : "<unknown>";
}

}  // namespace

MacroEnv build_macro_env(const std::vector<dsl::MacroDef>& macros) {
  MacroEnv env;
  for (const auto& def : macros) {
    auto [it, inserted] = env.emplace(def.name, def);
    if (!inserted)
      fail(def.pos, "duplicate macro '" + def.name + "'; first defined at " +
                        to_string(it->second.pos));
  }
  return env;
}

DeclEnv build_decl_env(const std::vector<dsl::TableDecl>& tables) {
  DeclEnv env;
  for (const auto& decl : tables) {
    auto [it, inserted] = env.emplace(decl.name, decl);
    if (!inserted)
      fail(decl.pos, "duplicate table '" + decl.name + "'; first declared at " +
                         to_string(it->second.pos));
  }
  return env;
}

// --- Macro expansion -----------------------------------------------------------

namespace {

class MacroExpander {
 public:
  explicit MacroExpander(const MacroEnv& env) : env_(env) {}

  EqExpr expand(const EqExpr& e) {
    return std::visit(
        [&](const auto& node) -> EqExpr {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, EqExpr::Call>) {
            std::vector<EqExpr> args;
            args.reserve(node.args.size());
            for (const auto& a : node.args) args.push_back(expand(a));
            auto it = env_.find(node.name);
            if (it == env_.end()) return EqExpr::call(node.name, std::move(args), e.pos());
            const dsl::MacroDef& def = it->second;
            if (std::find(active_.begin(), active_.end(), node.name) != active_.end())
              fail(e.pos(), "recursive macro expansion: " + cycle_text(node.name));
            if (args.size() != def.params.size())
              fail(e.pos(), "macro '" + node.name + "' expects " +
                                std::to_string(def.params.size()) + " argument(s), got " +
                                std::to_string(args.size()));
            if (++count_ > kMacroExpansionLimit)
              fail(e.pos(), "macro expansion limit exceeded (" +
                                std::to_string(kMacroExpansionLimit) + " expansions)");
            std::map<std::string, EqExpr> bound;
            for (size_t i = 0; i < args.size(); ++i) bound.emplace(def.params[i], args[i]);
            EqExpr body = substitute_params(def.body, bound);
            active_.push_back(node.name);
            EqExpr out = expand(body);
            active_.pop_back();
            return out;
          } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
            return EqExpr::negate(expand(node.operand), e.pos());
          } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
            return EqExpr::binary(node.op, expand(node.lhs), expand(node.rhs), e.pos());
          } else {
            return e;
          }
        },
        e.node());
  }

 private:
  std::string cycle_text(const std::string& name) const {
    auto begin = std::find(active_.begin(), active_.end(), name);
    std::string out;
    for (auto it = begin; it != active_.end(); ++it) out += *it + " -> ";
    return out + name;
  }

  const MacroEnv& env_;
  std::vector<std::string> active_;
  int count_ = 0;
};

}  // namespace

EqExpr expand_macros(const EqExpr& expr, const MacroEnv& macros) {
  return MacroExpander(macros).expand(expr);
}

// --- Quantifier expansion --------------------------------------------------------

namespace {

std::string range_text(const dsl::SubRange& r) {
  return std::to_string(r.lo) + ":" + std::to_string(r.hi);
}

std::string subs_text(const std::vector<long long>& subs) {
  std::string out = "[";
  for (size_t i = 0; i < subs.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(subs[i]);
  }
  return out + "]";
}

// Validates table references and cell patterns in a fully substituted
// right-hand side. binding describes the quantifier assignment for messages.
void check_concrete_rhs(const EqExpr& e, const DeclEnv& decls, const std::string& binding) {
  auto where = [&](const SourcePos& pos, std::string msg) -> Error {
    if (!binding.empty()) msg += " (at " + binding + ")";
    return Error(pos, msg);
  };
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, EqExpr::TableRef>) {
          auto it = decls.find(node.table);
          if (it == decls.end()) throw where(e.pos(), "undeclared table '" + node.table + "'");
          const dsl::TableDecl& decl = it->second;
          if (node.subs.size() != decl.dims.size())
            throw where(e.pos(), "table '" + node.table + "' has " +
                                     std::to_string(decl.dims.size()) +
                                     " dimension(s) but is referenced with " +
                                     std::to_string(node.subs.size()));
          for (size_t d = 0; d < node.subs.size(); ++d) {
            long long v = node.subs[d].offset;  // constant after substitution
            if (!decl.dims[d].contains(v))
              throw where(e.pos(), node.table + "[" + std::to_string(v) +
                                       "] is out of range " + range_text(decl.dims[d]) +
                                       " in dimension " + std::to_string(d + 1));
          }
        } else if constexpr (std::is_same_v<T, EqExpr::CellPat>) {
          if (node.col.is_const() && node.col.offset < 1)
            throw where(e.pos(), "cell reference is left of column A");
          if (node.row.is_const() && node.row.offset < 1)
            throw where(e.pos(), "cell reference is above row 1");
        } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
          check_concrete_rhs(node.operand, decls, binding);
        } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
          check_concrete_rhs(node.lhs, decls, binding);
          check_concrete_rhs(node.rhs, decls, binding);
        } else if constexpr (std::is_same_v<T, EqExpr::Call>) {
          for (const auto& a : node.args) check_concrete_rhs(a, decls, binding);
        }
      },
      e.node());
}

}  // namespace

std::vector<ElementEquation> expand_equation(const dsl::TableEquation& eq, const DeclEnv& decls) {
  auto it = decls.find(eq.table);
  if (it == decls.end()) fail(eq.pos, "undeclared table '" + eq.table + "'");
  const dsl::TableDecl& decl = it->second;
  if (eq.lhs.size() != decl.dims.size())
    fail(eq.pos, "table '" + eq.table + "' has " + std::to_string(decl.dims.size()) +
                     " dimension(s) but the equation gives " + std::to_string(eq.lhs.size()) +
                     " subscript(s)");

  struct Quant {
    std::string var;
    dsl::SubRange range;
  };
  std::vector<Quant> quants;
  long long total = 1;
  for (size_t d = 0; d < eq.lhs.size(); ++d) {
    if (eq.lhs[d].quantified) {
      quants.push_back({eq.lhs[d].var, decl.dims[d]});
      total *= decl.dims[d].size();
      if (total > kElementLimit)
        fail(eq.pos, "quantifier expansion produces more than " +
                         std::to_string(kElementLimit) + " equations");
    } else if (!decl.dims[d].contains(eq.lhs[d].value)) {
      fail(eq.pos, eq.table + "[" + std::to_string(eq.lhs[d].value) + "] is out of range " +
                       range_text(decl.dims[d]) + " in dimension " + std::to_string(d + 1));
    }
  }

  std::vector<ElementEquation> out;
  out.reserve(static_cast<size_t>(total));
  std::vector<long long> values(quants.size());
  for (size_t i = 0; i < quants.size(); ++i) values[i] = quants[i].range.lo;

  while (true) {
    std::map<std::string, long long> env;
    std::string binding;
    for (size_t i = 0; i < quants.size(); ++i) {
      env[quants[i].var] = values[i];
      if (i) binding += ", ";
      binding += quants[i].var + "=" + std::to_string(values[i]);
    }
    std::vector<long long> subs;
    subs.reserve(eq.lhs.size());
    for (const auto& sub : eq.lhs)
      subs.push_back(sub.quantified ? env.at(sub.var) : sub.value);
    EqExpr rhs = substitute_vars(eq.rhs, env);
    check_concrete_rhs(rhs, decls, binding);
    out.push_back({eq.table, std::move(subs), std::move(rhs), eq.pos});

    if (quants.empty()) break;
    size_t i = quants.size();
    while (i > 0) {
      --i;
      if (values[i] < quants[i].range.hi) {
        ++values[i];
        break;
      }
      values[i] = quants[i].range.lo;
      if (i == 0) return out;  // every variable rolled over
    }
  }
  return out;
}

// --- Layout ---------------------------------------------------------------------

cells::CellAddr Layout::addr_of(const std::string& table, const std::vector<long long>& subs,
                                const SourcePos& pos) const {
  auto it = items_.find(table);
  if (it == items_.end()) fail(pos, "no layout for table '" + table + "'");
  const dsl::LayoutItem& item = it->second;
  const dsl::TableDecl& decl = decls_.at(table);
  if (subs.size() != decl.dims.size())
    fail(pos, "table '" + table + "' has " + std::to_string(decl.dims.size()) +
                  " dimension(s) but is referenced with " + std::to_string(subs.size()));
  for (size_t d = 0; d < subs.size(); ++d)
    if (!decl.dims[d].contains(subs[d]))
      fail(pos, table + subs_text(subs) + " is out of range " + range_text(decl.dims[d]) +
                    " in dimension " + std::to_string(d + 1));
  int col = item.anchor.col;
  int row = item.anchor.row;
  if (decl.dims.size() == 1) {
    long long off = subs[0] - decl.dims[0].lo;
    if (item.orient == dsl::Orient::Across)
      col += static_cast<int>(off);
    else
      row += static_cast<int>(off);
  } else {
    row += static_cast<int>(subs[0] - decl.dims[0].lo);
    col += static_cast<int>(subs[1] - decl.dims[1].lo);
  }
  return cells::CellAddr{item.anchor.sheet, col, row};
}

const Layout::Rect* Layout::rect_of(const std::string& table) const {
  auto it = rects_.find(table);
  return it == rects_.end() ? nullptr : &it->second;
}

Layout resolve_layout(const DeclEnv& decls, const std::vector<dsl::LayoutItem>& items,
                      const std::map<std::string, SourcePos>& used_tables) {
  Layout layout;
  layout.decls_ = decls;
  for (const auto& item : items) {
    auto decl_it = decls.find(item.table);
    if (decl_it == decls.end()) fail(item.pos, "layout for undeclared table '" + item.table + "'");
    const dsl::TableDecl& decl = decl_it->second;
    if (decl.dims.size() > 2)
      fail(item.pos, "table '" + item.table + "' has " + std::to_string(decl.dims.size()) +
                         " dimensions; only 1- and 2-dimensional tables can be placed");
    auto [it, inserted] = layout.items_.emplace(item.table, item);
    if (!inserted)
      fail(item.pos, "table '" + item.table + "' is placed twice; first placed at " +
                         to_string(it->second.pos));
    dsl::LayoutItem& stored = layout.items_.at(item.table);
    if (decl.dims.size() == 2) {
      if (item.orient != dsl::Orient::None)
        fail(item.pos, "orientation is implied for two-dimensional table '" + item.table +
                           "' (rows are dimension 1, columns dimension 2)");
    } else if (stored.orient == dsl::Orient::None) {
      stored.orient = dsl::Orient::Down;
    }

    Layout::Rect rect;
    rect.sheet = item.anchor.sheet;
    rect.c1 = rect.c2 = item.anchor.col;
    rect.r1 = rect.r2 = item.anchor.row;
    if (decl.dims.size() == 1) {
      long long n = decl.dims[0].size() - 1;
      if (stored.orient == dsl::Orient::Across)
        rect.c2 += static_cast<int>(n);
      else
        rect.r2 += static_cast<int>(n);
    } else {
      rect.r2 += static_cast<int>(decl.dims[0].size() - 1);
      rect.c2 += static_cast<int>(decl.dims[1].size() - 1);
    }
    layout.rects_.emplace(item.table, rect);
  }

  for (const auto& [table, pos] : used_tables)
    if (!layout.items_.count(table)) {
      if (!decls.count(table)) fail(pos, "undeclared table '" + table + "'");
      fail(pos, "no layout for table '" + table + "'");
    }

  // placed rectangles on one sheet must not overlap
  for (auto a = layout.rects_.begin(); a != layout.rects_.end(); ++a) {
    for (auto b = std::next(a); b != layout.rects_.end(); ++b) {
      const Layout::Rect& ra = a->second;
      const Layout::Rect& rb = b->second;
      if (ra.sheet != rb.sheet) continue;
      int c1 = std::max(ra.c1, rb.c1), c2 = std::min(ra.c2, rb.c2);
      int r1 = std::max(ra.r1, rb.r1), r2 = std::min(ra.r2, rb.r2);
      if (c1 <= c2 && r1 <= r2)
        fail(layout.items_.at(a->first).pos,
             "tables '" + a->first + "' and '" + b->first + "' overlap at " +
                 cells::to_string({ra.sheet, c1, r1}));
    }
  }
  return layout;
}

// --- Full compilation -------------------------------------------------------------

namespace {

void collect_used_tables(const EqExpr& e, std::map<std::string, SourcePos>& used) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, EqExpr::TableRef>) {
          used.emplace(node.table, e.pos());
        } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
          collect_used_tables(node.operand, used);
        } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
          collect_used_tables(node.lhs, used);
          collect_used_tables(node.rhs, used);
        } else if constexpr (std::is_same_v<T, EqExpr::Call>) {
          for (const auto& a : node.args) collect_used_tables(a, used);
        }
      },
      e.node());
}

}  // namespace

cells::Workbook compile(const dsl::ModuleAst& merged) {
  DeclEnv decls = build_decl_env(merged.tables);
  MacroEnv macros = build_macro_env(merged.macros);

  std::vector<ElementEquation> elements;
  for (const auto& eq : merged.equations) {
    dsl::TableEquation expanded = eq;
    expanded.rhs = expand_macros(eq.rhs, macros);
    auto elems = expand_equation(expanded, decls);
    elements.insert(elements.end(), std::make_move_iterator(elems.begin()),
                    std::make_move_iterator(elems.end()));
  }
  std::vector<dsl::CellEquation> cell_eqs;
  cell_eqs.reserve(merged.cell_equations.size());
  for (const auto& ce : merged.cell_equations) {
    dsl::CellEquation expanded = ce;
    expanded.rhs = expand_macros(ce.rhs, macros);
    check_concrete_rhs(expanded.rhs, decls, "");
    cell_eqs.push_back(std::move(expanded));
  }

  std::map<std::string, SourcePos> used;
  for (const auto& el : elements) {
    used.emplace(el.table, el.pos);
    collect_used_tables(el.rhs, used);
  }
  for (const auto& ce : cell_eqs) collect_used_tables(ce.rhs, used);

  Layout layout = resolve_layout(decls, merged.layout, used);
  dsl::TableResolver resolver = [&layout](const std::string& table,
                                          const std::vector<long long>& subs,
                                          const SourcePos& pos) {
    return layout.addr_of(table, subs, pos);
  };

  cells::Workbook wb;
  std::map<cells::CellAddr, SourcePos> defined_at;
  auto define = [&](cells::CellAddr addr, cells::Formula f, const SourcePos& pos,
                    const std::string& what) {
    auto [it, inserted] = defined_at.emplace(addr, pos);
    if (!inserted)
      fail(pos, what + " writes " + cells::to_string(addr) + " twice; first defined at " +
                    line_of(it->second));
    wb.cells.emplace(std::move(addr), std::move(f));
  };

  for (const auto& el : elements) {
    cells::CellAddr addr = layout.addr_of(el.table, el.subs, el.pos);
    define(addr, to_formula(el.rhs, resolver), el.pos, el.table + subs_text(el.subs));
  }
  for (const auto& ce : cell_eqs)
    define(ce.lhs, to_formula(ce.rhs, resolver), ce.pos, "cell equation");
  return wb;
}

// --- Loading --------------------------------------------------------------------

void merge_into(dsl::ModuleAst& dst, dsl::ModuleAst src) {
  auto append = [](auto& d, auto& s) {
    d.insert(d.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  };
  append(dst.tables, src.tables);
  append(dst.macros, src.macros);
  append(dst.uses, src.uses);
  append(dst.layout, src.layout);
  append(dst.equations, src.equations);
  append(dst.cell_equations, src.cell_equations);
}

namespace {

std::string read_file(const std::filesystem::path& path, const std::string& requested_by) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::string msg = "cannot open file '" + path.string() + "'";
    if (!requested_by.empty()) msg += " (used by " + requested_by + ")";
    fail({}, msg);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return std::move(out).str();
}

void load_one(const std::filesystem::path& path, const std::string& requested_by,
              std::set<std::string>& visited, dsl::ModuleAst& merged) {
  std::error_code ec;
  std::filesystem::path canon = std::filesystem::weakly_canonical(path, ec);
  if (ec) canon = path;
  if (!visited.insert(canon.string()).second) return;  // include-once

  std::string text = read_file(path, requested_by);
  dsl::ModuleAst module = dsl::parse_module(text, path.string());
  std::vector<std::string> uses = module.uses;
  merge_into(merged, std::move(module));
  for (const auto& use : uses)
    load_one(path.parent_path() / use, path.string(), visited, merged);
}

}  // namespace

dsl::ModuleAst load_modules(const std::vector<std::string>& paths) {
  dsl::ModuleAst merged;
  std::set<std::string> visited;
  for (const auto& p : paths) load_one(p, "", visited, merged);
  return merged;
}

}  // namespace tableq::compiler
