#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tableq/cells.hpp"
#include "tableq/compiler.hpp"
#include "tableq/dsl.hpp"

namespace tableq::discover {

// One named rectangle: the cells it covers and how rows/columns map to
// subscripts. A missing col base on a one-column rectangle gives a 1-D table
// over rows, and symmetrically for one-row rectangles.
struct NamingEntry {
  struct Base {
    int anchor = 1;            // row number or column index inside the rectangle
    long long subscript = 0;   // the subscript that anchor corresponds to
  };

  std::string table;
  std::string sheet;
  int c1 = 1, r1 = 1, c2 = 1, r2 = 1;  // inclusive, normalized
  std::optional<Base> row_base;
  std::optional<Base> col_base;
  SourcePos pos;

  bool contains(const cells::CellAddr& addr) const {
    return addr.sheet == sheet && addr.col >= c1 && addr.col <= c2 && addr.row >= r1 &&
           addr.row <= r2;
  }
};

struct NamingMap {
  std::vector<NamingEntry> entries;
};

// Lines of the form
//   name NAME = 'Sheet'!A1:B9 rows 4->2000 cols F->1
// with '#' comments. Rectangles on one sheet must be disjoint, table names
// unique, and each base anchor inside its rectangle.
NamingMap parse_naming_map(std::string_view text, std::string filename = "");

struct Element {
  std::string table;
  std::vector<long long> subs;  // row subscript first for 2-D entries
};

std::optional<Element> cell_to_element(const cells::CellAddr& addr, const NamingMap& map);

// Declaration and placement implied by an entry's rectangle and bases.
dsl::TableDecl entry_decl(const NamingEntry& entry);
dsl::LayoutItem entry_layout(const NamingEntry& entry);

// The renamed listing: declarations and layout inferred from the naming map,
// quantified equations where generalization succeeded, element equations
// where it did not, and plain cell equations for unnamed cells. Printing the
// set gives a module that recompiles to the original workbook.
struct NamedEquationSet {
  std::vector<dsl::TableDecl> decls;
  std::vector<dsl::LayoutItem> layout;
  std::vector<dsl::TableEquation> equations;
  std::vector<dsl::CellEquation> residue;
};

NamedEquationSet rename(const cells::Workbook& workbook, const NamingMap& map);

// Merges element equations into `all`-quantified equations. A table
// generalizes only when its elements cover the whole declared rectangle with
// one shared template whose subscripts and unnamed cell references are
// affine offsets of the left-hand subscripts; otherwise its elements are
// returned as leftovers unchanged.
struct GeneralizeResult {
  std::vector<dsl::TableEquation> equations;
  std::vector<compiler::ElementEquation> leftovers;
};
GeneralizeResult generalize(const std::vector<compiler::ElementEquation>& elements,
                            const compiler::DeclEnv& decls);

dsl::ModuleAst to_module(const NamedEquationSet& set);
std::string print_named_set(const NamedEquationSet& set);

}  // namespace tableq::discover
