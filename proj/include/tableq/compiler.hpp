#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tableq/cells.hpp"
#include "tableq/dsl.hpp"

namespace tableq::compiler {

using MacroEnv = std::map<std::string, dsl::MacroDef>;
using DeclEnv = std::map<std::string, dsl::TableDecl>;

// Duplicate names are an error (reported with both positions).
MacroEnv build_macro_env(const std::vector<dsl::MacroDef>& macros);
DeclEnv build_decl_env(const std::vector<dsl::TableDecl>& tables);

// Replaces macro calls by their bodies until none remain. Substitution is
// capture-free: parameters are the only substitutable leaves and macro
// bodies cannot mention equation variables. Recursion (direct or mutual) is
// an error, as is exceeding 10000 expansions for one expression.
dsl::EqExpr expand_macros(const dsl::EqExpr& expr, const MacroEnv& macros);

// A single concrete equation: one table element and its right-hand side with
// all subscript variables substituted away.
struct ElementEquation {
  std::string table;
  std::vector<long long> subs;
  dsl::EqExpr rhs;
  SourcePos pos;
};

// Expands `all` quantifiers into one element equation per assignment, in
// lexicographic order of the quantified variables. Right-hand subscripts are
// checked against the referenced tables' declared ranges; errors name the
// variable binding that triggered them.
std::vector<ElementEquation> expand_equation(const dsl::TableEquation& eq, const DeclEnv& decls);

// Table placements resolved against declarations: maps elements to cells and
// rejects overlapping rectangles.
class Layout {
 public:
  struct Rect {
    std::string sheet;
    int c1 = 1, r1 = 1, c2 = 1, r2 = 1;  // inclusive
  };

  Layout() = default;

  cells::CellAddr addr_of(const std::string& table, const std::vector<long long>& subs,
                          const SourcePos& pos) const;
  const Rect* rect_of(const std::string& table) const;
  bool has(const std::string& table) const { return rects_.count(table) != 0; }

  friend Layout resolve_layout(const DeclEnv& decls, const std::vector<dsl::LayoutItem>& items,
                               const std::map<std::string, SourcePos>& used_tables);

 private:
  DeclEnv decls_;
  std::map<std::string, dsl::LayoutItem> items_;
  std::map<std::string, Rect> rects_;
};

// Validates that every used table is placed exactly once and that no two
// placed rectangles on one sheet overlap.
Layout resolve_layout(const DeclEnv& decls, const std::vector<dsl::LayoutItem>& items,
                      const std::map<std::string, SourcePos>& used_tables);

// The whole pipeline: macro expansion, quantifier expansion, layout
// resolution, and lowering to one workbook cell per element equation.
// Defining the same cell twice is an error reporting both definitions.
cells::Workbook compile(const dsl::ModuleAst& merged);

// Appends src's items to dst.
void merge_into(dsl::ModuleAst& dst, dsl::ModuleAst src);

// Reads and parses the given files, resolving `use` includes relative to the
// using file. Each file is loaded at most once.
dsl::ModuleAst load_modules(const std::vector<std::string>& paths);

}  // namespace tableq::compiler
