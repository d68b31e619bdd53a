#include "tableq/runs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>

namespace tableq::runs {

using cells::CellAddr;
using cells::Formula;
using cells::Workbook;
using dsl::Affine;
using dsl::EqExpr;
using dsl::RunEquation;
using dsl::RunListing;
using dsl::RunPart;
using dsl::SubExpr;

std::string list_workbook(const Workbook& workbook) { return serialize_workbook(workbook); }

// --- Expansion -----------------------------------------------------------------

Workbook expand_runs(const RunListing& listing) {
  Workbook wb;
  std::map<CellAddr, SourcePos> defined_at;
  for (const auto& eq : listing.items) {
    for (long long c = eq.col.lo; c <= eq.col.hi; ++c) {
      for (long long r = eq.row.lo; r <= eq.row.hi; ++r) {
        std::map<std::string, long long> env;
        if (eq.col.kind == RunPart::Kind::Binder) env[eq.col.var] = c;
        if (eq.row.kind == RunPart::Kind::Binder) env[eq.row.var] = r;
        Formula f = to_formula(substitute_vars(eq.rhs, env), nullptr);
        CellAddr addr =
            cells::make_addr(eq.sheet, static_cast<int>(c), static_cast<int>(r), eq.pos);
        auto [it, inserted] = defined_at.emplace(addr, eq.pos);
        if (!inserted) {
          std::string first = it->second.known()
                                  ? "the equation at line " + std::to_string(it->second.line)
                                  : "an earlier equation";
          fail(eq.pos, "cell " + cells::to_string(addr) + " is produced twice (also by " + first +
                           ")");
        }
        wb.cells.emplace(std::move(addr), std::move(f));
      }
    }
  }
  return wb;
}

// --- Serialization -------------------------------------------------------------

namespace {

std::string col_part_text(const RunPart& p) {
  switch (p.kind) {
    case RunPart::Kind::Fixed: return cells::index_to_col(static_cast<int>(p.lo));
    case RunPart::Kind::Binder:
      return "[" + p.var + " in " + cells::index_to_col(static_cast<int>(p.lo)) + ":" +
             cells::index_to_col(static_cast<int>(p.hi)) + "]";
    case RunPart::Kind::Anon:
      return "[" + cells::index_to_col(static_cast<int>(p.lo)) + ":" +
             cells::index_to_col(static_cast<int>(p.hi)) + "]";
  }
  return {};
}

std::string row_part_text(const RunPart& p) {
  switch (p.kind) {
    case RunPart::Kind::Fixed: return std::to_string(p.lo);
    case RunPart::Kind::Binder:
      return "[" + p.var + " in " + std::to_string(p.lo) + ":" + std::to_string(p.hi) + "]";
    case RunPart::Kind::Anon:
      return "[" + std::to_string(p.lo) + ":" + std::to_string(p.hi) + "]";
  }
  return {};
}

}  // namespace

std::string serialize_run_equation(const RunEquation& eq) {
  std::string out = cells::quote_sheet(eq.sheet) + "!";
  out += col_part_text(eq.col);
  if (eq.col.ranged() && eq.row.ranged()) out.push_back(' ');
  out += row_part_text(eq.row);
  out += " = ";
  out += dsl::print_expr(eq.rhs);
  return out;
}

std::string serialize_run_listing(const RunListing& listing) {
  std::string out;
  for (const auto& eq : listing.items) {
    out += serialize_run_equation(eq);
    out.push_back('\n');
  }
  return out;
}

// --- Detection -----------------------------------------------------------------

namespace {

bool bits_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

// The shape of a formula relative to its host cell: cell references become
// (sheet, column delta, row delta), numeric literals become slots. Two cells
// can join one run only if their shape keys are identical.
struct Shape {
  std::string key;
  std::vector<double> consts;  // slot values, in tree walk order
};

void shape_walk(const Formula& f, const CellAddr& host, Shape& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Formula::Number>) {
          out.key += "#";
          out.consts.push_back(node.value);
        } else if constexpr (std::is_same_v<T, Formula::Text>) {
          out.key += "s" + std::to_string(node.value.size()) + ":" + node.value;
        } else if constexpr (std::is_same_v<T, Formula::Ref>) {
          out.key += "R" + std::to_string(node.addr.sheet.size()) + ":" + node.addr.sheet + "," +
                     std::to_string(node.addr.col - host.col) + "," +
                     std::to_string(node.addr.row - host.row) + ";";
        } else if constexpr (std::is_same_v<T, Formula::Range>) {
          out.key += "G" + std::to_string(node.tl.sheet.size()) + ":" + node.tl.sheet + "," +
                     std::to_string(node.tl.col) + "," + std::to_string(node.tl.row) + "," +
                     std::to_string(node.br.col) + "," + std::to_string(node.br.row) + ";";
        } else if constexpr (std::is_same_v<T, Formula::Neg>) {
          out.key += "N(";
          shape_walk(node.operand, host, out);
          out.key += ")";
        } else if constexpr (std::is_same_v<T, Formula::Bin>) {
          out.key += "B";
          out.key += cells::op_token(node.op);
          out.key += "(";
          shape_walk(node.lhs, host, out);
          out.key += ",";
          shape_walk(node.rhs, host, out);
          out.key += ")";
        } else {
          out.key += "C" + std::to_string(node.name.size()) + ":" + node.name + "(";
          for (const auto& a : node.args) {
            shape_walk(a, host, out);
            out.key += ",";
          }
          out.key += ")";
        }
      },
      f.node());
}

struct GroupCell {
  int col = 0;
  int row = 0;
  std::vector<double> consts;
  const Formula* formula = nullptr;
};

// One run variable per ranged dimension. Both ranged: V0 = column, V1 = row;
// otherwise the single ranged dimension is V0.
struct RectVars {
  std::string col_var;  // empty when the column is fixed
  std::string row_var;
};

RectVars rect_vars(bool col_ranged, bool row_ranged) {
  if (col_ranged && row_ranged) return {"V0", "V1"};
  if (row_ranged) return {"", "V0"};
  if (col_ranged) return {"V0", ""};
  return {"", ""};
}

// Fits one constant slot over a rectangle: value = base + a*row + b*col with
// integer a, b. Returns the linear form exactly as expansion will evaluate
// it, or nothing if some cell disagrees bit-for-bit. Verification runs
// row-major, and on failure *fail_row gets the first offending row, so the
// caller can shrink the candidate straight to the tallest fit.
class SlotFit {
 public:
  static std::optional<Affine> fit(const std::map<std::pair<int, int>, const GroupCell*>& grid,
                                   int c1, int r1, int c2, int r2, size_t slot,
                                   const RectVars& vars, int* fail_row = nullptr) {
    auto value = [&](int c, int r) { return grid.at({c, r})->consts[slot]; };
    auto failed = [&](int row) {
      if (fail_row) *fail_row = row;
      return std::nullopt;
    };
    long long a = 0, b = 0;
    if (r2 > r1 && !integral_diff(value(c1, r1 + 1) - value(c1, r1), a))
      return failed(r1 + 1);
    if (c2 > c1 && !integral_diff(value(c1 + 1, r1) - value(c1, r1), b))
      return failed(r1);

    Affine form;
    form.base = value(c1, r1) - static_cast<double>(a) * r1 - static_cast<double>(b) * c1;
    if (!vars.col_var.empty() && b != 0) form.terms.emplace_back(vars.col_var, b);
    if (!vars.row_var.empty() && a != 0) form.terms.emplace_back(vars.row_var, a);
    std::sort(form.terms.begin(), form.terms.end());
    if (form.terms.empty()) {
      // constant slot: every cell must hold the same bits
      for (int r = r1; r <= r2; ++r)
        for (int c = c1; c <= c2; ++c)
          if (!bits_equal(value(c, r), value(c1, r1))) return failed(r);
      form.base = value(c1, r1);
      return form;
    }
    if ((a != 0 && vars.row_var.empty()) || (b != 0 && vars.col_var.empty()))
      return failed(r1);
    std::map<std::string, long long> env;
    for (int r = r1; r <= r2; ++r) {
      if (!vars.row_var.empty()) env[vars.row_var] = r;
      for (int c = c1; c <= c2; ++c) {
        if (!vars.col_var.empty()) env[vars.col_var] = c;
        if (!bits_equal(form.eval(env), value(c, r))) return failed(r);
      }
    }
    return form;
  }

 private:
  static bool integral_diff(double d, long long& out) {
    if (!std::isfinite(d) || d != std::floor(d) || std::abs(d) > 1e12) return false;
    out = static_cast<long long>(d);
    return true;
  }
};

// Builds the run template from the top-left cell's formula.
class TemplateBuilder {
 public:
  TemplateBuilder(int c1, int r1, const RectVars& vars, std::vector<std::optional<Affine>> slots)
      : c1_(c1), r1_(r1), vars_(vars), slots_(std::move(slots)) {}

  EqExpr build(const Formula& f) {
    using cells::Formula;
    return std::visit(
        [&](const auto& node) -> EqExpr {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Formula::Number>) {
            const std::optional<Affine>& form = slots_[slot_++];
            if (form && !form->terms.empty()) return EqExpr::value(*form);
            return EqExpr::number(node.value);
          } else if constexpr (std::is_same_v<T, Formula::Text>) {
            return EqExpr::text(node.value);
          } else if constexpr (std::is_same_v<T, Formula::Ref>) {
            int dc = node.addr.col - c1_;
            int dr = node.addr.row - r1_;
            SubExpr col = vars_.col_var.empty() ? SubExpr::constant(node.addr.col)
                                                : SubExpr::variable(vars_.col_var, dc);
            SubExpr row = vars_.row_var.empty() ? SubExpr::constant(node.addr.row)
                                                : SubExpr::variable(vars_.row_var, dr);
            return EqExpr::cell_pat(node.addr.sheet, std::move(col), std::move(row));
          } else if constexpr (std::is_same_v<T, Formula::Range>) {
            return EqExpr::range_pat(node.tl.sheet, node.tl.col, node.tl.row, node.br.col,
                                     node.br.row);
          } else if constexpr (std::is_same_v<T, Formula::Neg>) {
            return EqExpr::negate(build(node.operand));
          } else if constexpr (std::is_same_v<T, Formula::Bin>) {
            EqExpr lhs = build(node.lhs);
            return EqExpr::binary(node.op, std::move(lhs), build(node.rhs));
          } else {
            std::vector<EqExpr> args;
            args.reserve(node.args.size());
            for (const auto& a : node.args) args.push_back(build(a));
            return EqExpr::call(node.name, std::move(args));
          }
        },
        f.node());
  }

 private:
  int c1_;
  int r1_;
  RectVars vars_;
  std::vector<std::optional<Affine>> slots_;
  size_t slot_ = 0;
};

struct Rect {
  int c1 = 0, r1 = 0, c2 = 0, r2 = 0;
  long long area() const { return static_cast<long long>(c2 - c1 + 1) * (r2 - r1 + 1); }
};

// Greedy choice order: larger area, then topmost, then leftmost, then taller.
bool better(const Rect& a, const Rect& b) {
  if (a.area() != b.area()) return a.area() > b.area();
  if (a.r1 != b.r1) return a.r1 < b.r1;
  if (a.c1 != b.c1) return a.c1 < b.c1;
  return (a.r2 - a.r1) > (b.r2 - b.r1);
}

class GroupDetector {
 public:
  GroupDetector(std::string sheet, std::vector<GroupCell> group_cells)
      : sheet_(std::move(sheet)), cells_(std::move(group_cells)) {
    for (const auto& cell : cells_) grid_.emplace(std::make_pair(cell.col, cell.row), &cell);
    slot_count_ = cells_.front().consts.size();
  }

  std::vector<RunEquation> run() {
    std::vector<RunEquation> out;
    while (!grid_.empty()) {
      std::optional<Rect> best = find_best();
      if (!best || best->area() < 2) break;
      out.push_back(emit(*best));
      for (int c = best->c1; c <= best->c2; ++c)
        for (int r = best->r1; r <= best->r2; ++r) grid_.erase({c, r});
    }
    for (const auto& [pos, cell] : grid_) out.push_back(emit_single(*cell));
    return out;
  }

 private:
  std::optional<Rect> find_best() {
    // rows of present cells, for the staircase scan
    std::map<std::pair<int, int>, int> down_run;  // (col,row) -> cells below incl. self
    std::map<int, std::vector<int>> by_col;
    for (const auto& [pos, cell] : grid_) by_col[pos.first].push_back(pos.second);
    for (auto& [col, rows] : by_col) {
      std::sort(rows.begin(), rows.end(), std::greater<>());
      int run_len = 0;
      int prev = -2;
      for (int r : rows) {
        run_len = (r + 1 == prev) ? run_len + 1 : 1;
        prev = r;
        down_run[{col, r}] = run_len;
      }
    }

    std::optional<Rect> best;
    // scan top-left candidates in (row, col) order for deterministic ties
    std::vector<std::pair<int, int>> anchors;  // (row, col)
    anchors.reserve(grid_.size());
    for (const auto& [pos, cell] : grid_) anchors.emplace_back(pos.second, pos.first);
    std::sort(anchors.begin(), anchors.end());

    for (const auto& [r1, c1] : anchors) {
      int max_h = std::numeric_limits<int>::max();
      for (int w = 1;; ++w) {
        auto it = down_run.find({c1 + w - 1, r1});
        if (it == down_run.end()) break;
        max_h = std::min(max_h, it->second);
        if (best && static_cast<long long>(w) * max_h < best->area())
          continue;  // a taller rect may still win at a larger width
        int h = max_h;
        while (h >= 1) {
          Rect cand{c1, r1, c1 + w - 1, r1 + h - 1};
          if (best && !better(cand, *best)) break;  // smaller h only shrinks the area
          int fail_row = 0;
          if (fits(cand, &fail_row)) {
            best = cand;
            break;
          }
          // every taller candidate shares the failure; jump to the bound
          h = std::min(h - 1, fail_row - r1);
        }
      }
    }
    return best;
  }

  bool fits(const Rect& rect, int* fail_row) {
    RectVars vars = rect_vars(rect.c2 > rect.c1, rect.r2 > rect.r1);
    for (size_t slot = 0; slot < slot_count_; ++slot)
      if (!SlotFit::fit(grid_, rect.c1, rect.r1, rect.c2, rect.r2, slot, vars, fail_row))
        return false;
    return true;
  }

  RunEquation emit(const Rect& rect) {
    RectVars vars = rect_vars(rect.c2 > rect.c1, rect.r2 > rect.r1);
    std::vector<std::optional<Affine>> slots;
    slots.reserve(slot_count_);
    for (size_t slot = 0; slot < slot_count_; ++slot)
      slots.push_back(SlotFit::fit(grid_, rect.c1, rect.r1, rect.c2, rect.r2, slot, vars));

    const GroupCell& origin = *grid_.at({rect.c1, rect.r1});
    TemplateBuilder builder(rect.c1, rect.r1, vars, std::move(slots));
    EqExpr rhs = builder.build(*origin.formula);

    bool anonymous = free_vars(rhs).empty();
    RunEquation eq;
    eq.sheet = sheet_;
    if (rect.c2 > rect.c1)
      eq.col = anonymous ? RunPart::anon(rect.c1, rect.c2)
                         : RunPart::binder(vars.col_var, rect.c1, rect.c2);
    else
      eq.col = RunPart::fixed(rect.c1);
    if (rect.r2 > rect.r1)
      eq.row = anonymous ? RunPart::anon(rect.r1, rect.r2)
                         : RunPart::binder(vars.row_var, rect.r1, rect.r2);
    else
      eq.row = RunPart::fixed(rect.r1);
    eq.rhs = std::move(rhs);
    return eq;
  }

  RunEquation emit_single(const GroupCell& cell) {
    RunEquation eq;
    eq.sheet = sheet_;
    eq.col = RunPart::fixed(cell.col);
    eq.row = RunPart::fixed(cell.row);
    eq.rhs = dsl::from_formula(*cell.formula, [](const CellAddr& addr) {
      return EqExpr::cell_pat(addr.sheet, SubExpr::constant(addr.col),
                              SubExpr::constant(addr.row));
    });
    return eq;
  }

  std::string sheet_;
  std::vector<GroupCell> cells_;
  std::map<std::pair<int, int>, const GroupCell*> grid_;
  size_t slot_count_ = 0;
};

}  // namespace

RunListing detect_runs(const Workbook& workbook) {
  // group cells by (sheet, shape)
  std::map<std::pair<std::string, std::string>, std::vector<GroupCell>> groups;
  for (const auto& [addr, formula] : workbook.cells) {
    Shape shape;
    shape_walk(formula, addr, shape);
    groups[{addr.sheet, std::move(shape.key)}].push_back(
        {addr.col, addr.row, std::move(shape.consts), &formula});
  }

  RunListing listing;
  for (auto& [key, group_cells] : groups) {
    GroupDetector detector(key.first, std::move(group_cells));
    for (auto& eq : detector.run()) listing.items.push_back(std::move(eq));
  }
  std::stable_sort(listing.items.begin(), listing.items.end(),
                   [](const RunEquation& a, const RunEquation& b) {
                     return std::tie(a.sheet, a.row.lo, a.col.lo) <
                            std::tie(b.sheet, b.row.lo, b.col.lo);
                   });
  return listing;
}

}  // namespace tableq::runs
