#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tableq/cells.hpp"
#include "tableq/diag.hpp"

namespace tableq::dsl {

// --- Subscript expressions ----------------------------------------------------
//
// A table subscript or run-address position: a constant, a variable, or a
// variable plus a constant offset. A zero offset is the plain variable form.

struct SubExpr {
  std::string var;        // empty means constant
  long long offset = 0;   // the constant, or the offset added to the variable

  bool is_const() const { return var.empty(); }
  static SubExpr constant(long long value) { return {"", value}; }
  static SubExpr variable(std::string name, long long offset = 0) {
    return {std::move(name), offset};
  }

  // env must bind var when present.
  long long eval(const std::map<std::string, long long>& env) const;

  friend bool operator==(const SubExpr&, const SubExpr&) = default;
};

std::string to_string(const SubExpr& sub);

// A linear form over run variables: base + sum(coeff * var). Used for number
// slots whose value changes across a run. Evaluation order is fixed (base
// first, then terms in stored order) so detection and expansion agree bit-

// for-bit on the result.
struct Affine {
  double base = 0;
  std::vector<std::pair<std::string, long long>> terms;  // sorted by var, coeff != 0

  double eval(const std::map<std::string, long long>& env) const;
  friend bool operator==(const Affine&, const Affine&) = default;
};

// --- Equation expressions -------------------------------------------------------
//
// The right-hand-side tree for table equations, macro bodies, and run
// templates. Leaves may be table references with subscript expressions,
// cell patterns whose column/row are subscript expressions, macro
// parameters, and bracketed linear-form values.

class EqExpr {
 public:
  struct Number {
    double value = 0;
  };
  struct Text {
    std::string value;
  };
  struct Value {  // bracketed linear form, e.g. [10*V0+2]
    Affine form;
  };
  struct Param {
    std::string name;
  };
  struct TableRef {
    std::string table;
    std::vector<SubExpr> subs;
  };
  struct CellPat {
    std::string sheet;
    SubExpr col;  // column-index space
    SubExpr row;
  };
  struct RangePat {  // ranges are always concrete
    std::string sheet;
    int c1 = 1, r1 = 1, c2 = 1, r2 = 1;
  };
  struct Neg;
  struct Bin;
  struct Call;
  using Node = std::variant<Number, Text, Value, Param, TableRef, CellPat, RangePat, Neg, Bin, Call>;

  EqExpr();

  static EqExpr number(double value, SourcePos pos = {});
  static EqExpr text(std::string value, SourcePos pos = {});
  static EqExpr value(Affine form, SourcePos pos = {});
  static EqExpr param(std::string name, SourcePos pos = {});
  static EqExpr table_ref(std::string table, std::vector<SubExpr> subs, SourcePos pos = {});
  static EqExpr cell_pat(std::string sheet, SubExpr col, SubExpr row, SourcePos pos = {});
  static EqExpr range_pat(std::string sheet, int c1, int r1, int c2, int r2, SourcePos pos = {});
  static EqExpr negate(EqExpr operand, SourcePos pos = {});  // folds literals
  static EqExpr binary(cells::BinOp op, EqExpr lhs, EqExpr rhs, SourcePos pos = {});
  static EqExpr call(std::string name, std::vector<EqExpr> args, SourcePos pos = {});

  const Node& node() const;
  const SourcePos& pos() const;

  // Structural equality; source positions are ignored.
  friend bool operator==(const EqExpr& a, const EqExpr& b) { return equal(a, b); }

 private:
  struct Impl;
  explicit EqExpr(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  static EqExpr make(Node node, SourcePos pos);
  static bool equal(const EqExpr& a, const EqExpr& b);

  std::shared_ptr<const Impl> impl_;
};

struct EqExpr::Neg {
  EqExpr operand;
};
struct EqExpr::Bin {
  cells::BinOp op;
  EqExpr lhs;
  EqExpr rhs;
};
struct EqExpr::Call {
  std::string name;  // verbatim; macro names are case-sensitive
  std::vector<EqExpr> args;
};

struct EqExpr::Impl {
  SourcePos pos;
  Node node;
};

// Canonical text of an expression (minimal parentheses, spaced operators).
std::string print_expr(const EqExpr& expr);

// Variables appearing in subscript positions or linear-form values.
std::vector<std::string> free_vars(const EqExpr& expr);

// Replaces bound variables by their values; fully bound subscripts become
// constants and fully bound linear forms become number literals.
EqExpr substitute_vars(const EqExpr& expr, const std::map<std::string, long long>& env);

// Replaces Param leaves by the given argument trees.
EqExpr substitute_params(const EqExpr& expr, const std::map<std::string, EqExpr>& args);

// Lowers a variable-free expression to a cell formula. resolve_table maps a
// table element to its cell; pass nullptr where table references are illegal.
using TableResolver =
    std::function<cells::CellAddr(const std::string& table, const std::vector<long long>& subs,
                                  const SourcePos& pos)>;
cells::Formula to_formula(const EqExpr& expr, const TableResolver& resolve_table);

// Lifts a cell formula into an equation expression, mapping each cell
// reference through map_ref (e.g. to a table reference or a fixed pattern).
EqExpr from_formula(const cells::Formula& formula,
                    const std::function<EqExpr(const cells::CellAddr&)>& map_ref);

// --- Module AST -----------------------------------------------------------------

struct SubRange {
  long long lo = 0;
  long long hi = 0;  // lo <= hi

  long long size() const { return hi - lo + 1; }
  bool contains(long long v) const { return lo <= v && v <= hi; }
  friend bool operator==(const SubRange&, const SubRange&) = default;
};

struct TableDecl {
  std::string name;
  std::vector<SubRange> dims;  // at least one
  SourcePos pos;
};

struct MacroDef {
  std::string name;
  std::vector<std::string> params;
  EqExpr body;
  SourcePos pos;
};

enum class Orient { Down, Across, None };  // None: two-dimensional placement

struct LayoutItem {
  std::string table;
  cells::CellAddr anchor;
  Orient orient = Orient::Down;
  SourcePos pos;
};

struct LhsSub {
  bool quantified = false;
  std::string var;      // when quantified
  long long value = 0;  // when not
};

struct TableEquation {
  std::string table;
  std::vector<LhsSub> lhs;
  EqExpr rhs;
  SourcePos pos;
};

struct CellEquation {
  cells::CellAddr lhs;
  EqExpr rhs;
  SourcePos pos;
};

struct ModuleAst {
  std::vector<TableDecl> tables;
  std::vector<MacroDef> macros;
  std::vector<std::string> uses;  // as written in the source
  std::vector<LayoutItem> layout;
  std::vector<TableEquation> equations;
  std::vector<CellEquation> cell_equations;

  bool empty() const {
    return tables.empty() && macros.empty() && uses.empty() && layout.empty() &&
           equations.empty() && cell_equations.empty();
  }
};

// One item per line; '#' starts a comment. See the grammar in the README.
ModuleAst parse_module(std::string_view text, std::string origin = "");

std::string print_module(const ModuleAst& module);
std::string print_table_equation(const TableEquation& eq);
std::string print_layout_item(const LayoutItem& item);
std::string print_table_decl(const TableDecl& decl);

// --- Run listings ------------------------------------------------------------

struct RunPart {
  enum class Kind { Fixed, Binder, Anon };
  Kind kind = Kind::Fixed;
  std::string var;       // Binder only
  long long lo = 0;      // Fixed uses lo == hi
  long long hi = 0;

  long long size() const { return hi - lo + 1; }
  bool ranged() const { return kind != Kind::Fixed; }
  static RunPart fixed(long long v) { return {Kind::Fixed, "", v, v}; }
  static RunPart binder(std::string var, long long lo, long long hi) {
    return {Kind::Binder, std::move(var), lo, hi};
  }
  static RunPart anon(long long lo, long long hi) { return {Kind::Anon, "", lo, hi}; }
  friend bool operator==(const RunPart&, const RunPart&) = default;
};

struct RunEquation {
  std::string sheet;
  RunPart col;  // column-index space
  RunPart row;
  EqExpr rhs;
  SourcePos pos;
};

struct RunListing {
  std::vector<RunEquation> items;
};

// Whitespace-insensitive between tokens; an equation may span lines.
RunListing parse_run_listing(std::string_view text, std::string filename = "");

}  // namespace tableq::dsl
