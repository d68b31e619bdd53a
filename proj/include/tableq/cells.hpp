#pragma once

#include <compare>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tableq/diag.hpp"

namespace tableq::cells {

// --- Column letters ---------------------------------------------------------
//
// Columns use bijective base-26 numbering: A=1 .. Z=26, AA=27, AB=28, ...

int col_to_index(std::string_view letters);
std::string index_to_col(int index);

// --- Cell addresses ---------------------------------------------------------

struct CellAddr {
  std::string sheet;  // nonempty, no leading/trailing whitespace
  int col = 1;        // 1-based
  int row = 1;        // 1-based

  // Listing order: sheet, then row-major within a sheet.
  friend auto operator<=>(const CellAddr& a, const CellAddr& b) {
    if (auto c = a.sheet <=> b.sheet; c != 0) return c;
    if (auto c = a.row <=> b.row; c != 0) return c;
    return a.col <=> b.col;
  }
  friend bool operator==(const CellAddr&, const CellAddr&) = default;
};

// Validates the invariants above; throws Error on violation.
CellAddr make_addr(std::string sheet, int col, int row, const SourcePos& pos = {});

// 'Sheet'!A1 form; the sheet is quoted unless it matches [A-Za-z_][A-Za-z0-9_]*.
std::string to_string(const CellAddr& addr);
std::string quote_sheet(std::string_view sheet);

// --- Formulas ---------------------------------------------------------------

enum class BinOp { Add, Sub, Mul, Div, Pow, Concat, Eq, Ne, Lt, Le, Gt, Ge };

std::string_view op_token(BinOp op);

// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

// Immutable expression tree. Nodes are shared; copying a Formula is cheap and
// all operations on it are pure.
class Formula {
 public:
  struct Number;
  struct Text;
  struct Ref;
  struct Range;
  struct Neg;
  struct Bin;
  struct Call;
  using Node = std::variant<Number, Text, Ref, Range, Neg, Bin, Call>;

  Formula();

  static Formula number(double value);
  static Formula text(std::string value);
  static Formula ref(CellAddr addr);
  static Formula range(CellAddr a, CellAddr b);  // normalizes corner order
  // Folds negation of a literal into a negative literal, so canonical trees
  // never contain Neg(Number).
  static Formula negate(Formula operand);
  static Formula binary(BinOp op, Formula lhs, Formula rhs);
  static Formula call(std::string name, std::vector<Formula> args);

  const Node& node() const;

  // Deep structural equality; numbers compare bit-exactly.
  friend bool operator==(const Formula& a, const Formula& b) { return equal(a, b); }

 private:
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Node node);
  static bool equal(const Formula& a, const Formula& b);

  std::shared_ptr<const Node> node_;
};

struct Formula::Number {
  double value = 0;
};
struct Formula::Text {
  std::string value;
};
struct Formula::Ref {
  CellAddr addr;
};
struct Formula::Range {  // tl and br share a sheet; tl.col<=br.col, tl.row<=br.row
  CellAddr tl;
  CellAddr br;
};
struct Formula::Neg {
  Formula operand;
};
struct Formula::Bin {
  BinOp op;
  Formula lhs;
  Formula rhs;
};
struct Formula::Call {
  std::string name;  // uppercase
  std::vector<Formula> args;
};

inline const Formula::Node& Formula::node() const { return *node_; }

// Parses a formula. Unqualified references take default_sheet. Positions in
// errors are relative to the given pos (start of the text).
Formula parse_formula(std::string_view text, std::string_view default_sheet,
                      const SourcePos& pos = {});

// Canonical text: fully qualified references, single spaces around binary
// operators, minimal parentheses. parse_formula inverts it.
std::string serialize_formula(const Formula& formula);

// --- Workbooks --------------------------------------------------------------

struct Workbook {
  std::map<CellAddr, Formula> cells;  // one formula per address

  bool empty() const { return cells.empty(); }
  friend bool operator==(const Workbook&, const Workbook&) = default;
};

// Workbook text format: one "<cell-ref> = <formula>" per line; blank lines
// and lines starting with '#' are ignored. Duplicate addresses are an error.
Workbook parse_workbook(std::string_view text, std::string_view filename = "");

// Lines sorted by (sheet, row, column); parse_workbook inverts it.
std::string serialize_workbook(const Workbook& workbook);

}  // namespace tableq::cells
