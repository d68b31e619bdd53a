#include "tableq/dsl.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <set>

namespace tableq::dsl {

using cells::BinOp;

long long SubExpr::eval(const std::map<std::string, long long>& env) const {
  if (is_const()) return offset;
  auto it = env.find(var);
  if (it == env.end()) fail({}, "unbound variable '" + var + "'");
  return it->second + offset;
}

std::string to_string(const SubExpr& sub) {
  if (sub.is_const()) return std::to_string(sub.offset);
  if (sub.offset == 0) return sub.var;
  return sub.var + (sub.offset > 0 ? "+" : "-") + std::to_string(std::llabs(sub.offset));
}

double Affine::eval(const std::map<std::string, long long>& env) const {
  double v = base;
  for (const auto& [var, coeff] : terms) {
    auto it = env.find(var);
    if (it == env.end()) fail({}, "unbound variable '" + var + "'");
    v += static_cast<double>(coeff) * static_cast<double>(it->second);
  }
  return v;
}

// --- EqExpr ------------------------------------------------------------------

EqExpr::EqExpr() : EqExpr(number(0)) {}

EqExpr EqExpr::make(Node node, SourcePos pos) {
  return EqExpr(std::make_shared<const Impl>(Impl{std::move(pos), std::move(node)}));
}

const EqExpr::Node& EqExpr::node() const { return impl_->node; }
const SourcePos& EqExpr::pos() const { return impl_->pos; }

EqExpr EqExpr::number(double value, SourcePos pos) { return make(Number{value}, std::move(pos)); }
EqExpr EqExpr::text(std::string value, SourcePos pos) {
  return make(Text{std::move(value)}, std::move(pos));
}
EqExpr EqExpr::value(Affine form, SourcePos pos) {
  if (form.terms.empty()) return number(form.base, std::move(pos));
  return make(Value{std::move(form)}, std::move(pos));
}
EqExpr EqExpr::param(std::string name, SourcePos pos) {
  return make(Param{std::move(name)}, std::move(pos));
}
EqExpr EqExpr::table_ref(std::string table, std::vector<SubExpr> subs, SourcePos pos) {
  return make(TableRef{std::move(table), std::move(subs)}, std::move(pos));
}
EqExpr EqExpr::cell_pat(std::string sheet, SubExpr col, SubExpr row, SourcePos pos) {
  return make(CellPat{std::move(sheet), std::move(col), std::move(row)}, std::move(pos));
}
EqExpr EqExpr::range_pat(std::string sheet, int c1, int r1, int c2, int r2, SourcePos pos) {
  return make(RangePat{std::move(sheet), std::min(c1, c2), std::min(r1, r2), std::max(c1, c2),
                       std::max(r1, r2)},
              std::move(pos));
}
EqExpr EqExpr::negate(EqExpr operand, SourcePos pos) {
  if (const auto* n = std::get_if<Number>(&operand.node()))
    return number(-n->value, std::move(pos));
  return make(Neg{std::move(operand)}, std::move(pos));
}
EqExpr EqExpr::binary(BinOp op, EqExpr lhs, EqExpr rhs, SourcePos pos) {
  return make(Bin{op, std::move(lhs), std::move(rhs)}, std::move(pos));
}
EqExpr EqExpr::call(std::string name, std::vector<EqExpr> args, SourcePos pos) {
  return make(Call{std::move(name), std::move(args)}, std::move(pos));
}

bool EqExpr::equal(const EqExpr& a, const EqExpr& b) {
  if (a.impl_ == b.impl_) return true;
  const Node& na = a.node();
  const Node& nb = b.node();
  if (na.index() != nb.index()) return false;
  return std::visit(
      [&nb](const auto& va) -> bool {
        using T = std::decay_t<decltype(va)>;
        const T& vb = std::get<T>(nb);
        if constexpr (std::is_same_v<T, Number>) {
          return std::bit_cast<std::uint64_t>(va.value) == std::bit_cast<std::uint64_t>(vb.value);
        } else if constexpr (std::is_same_v<T, Text>) {
          return va.value == vb.value;
        } else if constexpr (std::is_same_v<T, Value>) {
          return std::bit_cast<std::uint64_t>(va.form.base) ==
                     std::bit_cast<std::uint64_t>(vb.form.base) &&
                 va.form.terms == vb.form.terms;
        } else if constexpr (std::is_same_v<T, Param>) {
          return va.name == vb.name;
        } else if constexpr (std::is_same_v<T, TableRef>) {
          return va.table == vb.table && va.subs == vb.subs;
        } else if constexpr (std::is_same_v<T, CellPat>) {
          return va.sheet == vb.sheet && va.col == vb.col && va.row == vb.row;
        } else if constexpr (std::is_same_v<T, RangePat>) {
          return va.sheet == vb.sheet && va.c1 == vb.c1 && va.r1 == vb.r1 && va.c2 == vb.c2 &&
                 va.r2 == vb.r2;
        } else if constexpr (std::is_same_v<T, Neg>) {
          return equal(va.operand, vb.operand);
        } else if constexpr (std::is_same_v<T, Bin>) {
          return va.op == vb.op && equal(va.lhs, vb.lhs) && equal(va.rhs, vb.rhs);
        } else {
          if (va.name != vb.name || va.args.size() != vb.args.size()) return false;
          for (size_t i = 0; i < va.args.size(); ++i)
            if (!equal(va.args[i], vb.args[i])) return false;
          return true;
        }
      },
      na);
}

// --- Printing ------------------------------------------------------------------

namespace {

int op_prec(BinOp op) {
  switch (op) {
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 1;
    case BinOp::Concat: return 2;
    case BinOp::Add:
    case BinOp::Sub: return 3;
    case BinOp::Mul:
    case BinOp::Div: return 4;
    case BinOp::Pow: return 6;
  }
  return 7;
}

int node_prec(const EqExpr& e) {
  const auto& n = e.node();
  if (const auto* num = std::get_if<EqExpr::Number>(&n))
    return std::signbit(num->value) ? 5 : 7;
  if (std::holds_alternative<EqExpr::Neg>(n)) return 5;
  if (const auto* bin = std::get_if<EqExpr::Bin>(&n)) return op_prec(bin->op);
  return 7;
}

std::string print_affine(const Affine& form) {
  std::string out = "[";
  bool first = true;
  for (const auto& [var, coeff] : form.terms) {
    long long mag = std::llabs(coeff);
    if (first) {
      if (coeff < 0) out.push_back('-');
      first = false;
    } else {
      out.push_back(coeff < 0 ? '-' : '+');
    }
    if (mag != 1) out += std::to_string(mag) + "*";
    out += var;
  }
  if (form.base != 0 || first) {
    if (!first) out.push_back(std::signbit(form.base) ? '-' : '+');
    else if (std::signbit(form.base)) out.push_back('-');
    out += cells::format_number(std::abs(form.base));
  }
  out.push_back(']');
  return out;
}

std::string print_col_part(const SubExpr& col) {
  if (col.is_const()) return cells::index_to_col(static_cast<int>(col.offset));
  return "[" + to_string(col) + "]";
}

std::string print_row_part(const SubExpr& row) {
  if (row.is_const()) return std::to_string(row.offset);
  return "[" + to_string(row) + "]";
}

void print(const EqExpr& e, std::string& out);

void print_child(const EqExpr& child, bool parens, std::string& out) {
  if (parens) out.push_back('(');
  print(child, out);
  if (parens) out.push_back(')');
}

void print(const EqExpr& e, std::string& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, EqExpr::Number>) {
          out += cells::format_number(node.value);
        } else if constexpr (std::is_same_v<T, EqExpr::Text>) {
          out.push_back('"');
          for (char c : node.value) {
            out.push_back(c);
            if (c == '"') out.push_back('"');
          }
          out.push_back('"');
        } else if constexpr (std::is_same_v<T, EqExpr::Value>) {
          out += print_affine(node.form);
        } else if constexpr (std::is_same_v<T, EqExpr::Param>) {
          out += node.name;
        } else if constexpr (std::is_same_v<T, EqExpr::TableRef>) {
          out += node.table;
          out.push_back('[');
          for (size_t i = 0; i < node.subs.size(); ++i) {
            if (i) out += ", ";
            out += to_string(node.subs[i]);
          }
          out.push_back(']');
        } else if constexpr (std::is_same_v<T, EqExpr::CellPat>) {
          out += cells::quote_sheet(node.sheet);
          out.push_back('!');
          std::string col = print_col_part(node.col);
          std::string row = print_row_part(node.row);
          out += col;
          if (!node.col.is_const() && !node.row.is_const()) out.push_back(' ');
          out += row;
        } else if constexpr (std::is_same_v<T, EqExpr::RangePat>) {
          out += cells::quote_sheet(node.sheet);
          out.push_back('!');
          out += cells::index_to_col(node.c1) + std::to_string(node.r1);
          out.push_back(':');
          out += cells::index_to_col(node.c2) + std::to_string(node.r2);
        } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
          out.push_back('-');
          print_child(node.operand, node_prec(node.operand) < 6, out);
        } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
          int prec = op_prec(node.op);
          bool right_assoc = node.op == BinOp::Pow;
          bool non_assoc = prec == 1;
          bool lp, rp;
          if (right_assoc) {
            lp = node_prec(node.lhs) <= prec;
            rp = node_prec(node.rhs) < 5;
          } else {
            lp = node_prec(node.lhs) < prec + (non_assoc ? 1 : 0);
            rp = node_prec(node.rhs) <= prec;
          }
          print_child(node.lhs, lp, out);
          out.push_back(' ');
          out += cells::op_token(node.op);
          out.push_back(' ');
          print_child(node.rhs, rp, out);
        } else {
          out += node.name;
          out.push_back('(');
          for (size_t i = 0; i < node.args.size(); ++i) {
            if (i) out += ", ";
            print(node.args[i], out);
          }
          out.push_back(')');
        }
      },
      e.node());
}

}  // namespace

std::string print_expr(const EqExpr& expr) {
  std::string out;
  print(expr, out);
  return out;
}

// --- Variables and substitution ---------------------------------------------

namespace {

void collect_vars(const EqExpr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, EqExpr::Value>) {
          for (const auto& [var, coeff] : node.form.terms) out.insert(var);
        } else if constexpr (std::is_same_v<T, EqExpr::TableRef>) {
          for (const auto& sub : node.subs)
            if (!sub.is_const()) out.insert(sub.var);
        } else if constexpr (std::is_same_v<T, EqExpr::CellPat>) {
          if (!node.col.is_const()) out.insert(node.col.var);
          if (!node.row.is_const()) out.insert(node.row.var);
        } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
          collect_vars(node.operand, out);
        } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
          collect_vars(node.lhs, out);
          collect_vars(node.rhs, out);
        } else if constexpr (std::is_same_v<T, EqExpr::Call>) {
          for (const auto& a : node.args) collect_vars(a, out);
        }
      },
      e.node());
}

SubExpr subst_sub(const SubExpr& sub, const std::map<std::string, long long>& env) {
  if (sub.is_const()) return sub;
  auto it = env.find(sub.var);
  if (it == env.end()) return sub;
  return SubExpr::constant(it->second + sub.offset);
}

}  // namespace

std::vector<std::string> free_vars(const EqExpr& expr) {
  std::set<std::string> vars;
  collect_vars(expr, vars);
  return {vars.begin(), vars.end()};
}

EqExpr substitute_vars(const EqExpr& expr, const std::map<std::string, long long>& env) {
  return std::visit(
      [&](const auto& node) -> EqExpr {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, EqExpr::Value>) {
          for (const auto& term : node.form.terms)
            if (!env.count(term.first)) return expr;  // partially bound forms stay symbolic
          return EqExpr::number(node.form.eval(env), expr.pos());
        } else if constexpr (std::is_same_v<T, EqExpr::TableRef>) {
          std::vector<SubExpr> subs;
          subs.reserve(node.subs.size());
          for (const auto& s : node.subs) subs.push_back(subst_sub(s, env));
          return EqExpr::table_ref(node.table, std::move(subs), expr.pos());
        } else if constexpr (std::is_same_v<T, EqExpr::CellPat>) {
          return EqExpr::cell_pat(node.sheet, subst_sub(node.col, env), subst_sub(node.row, env),
                                  expr.pos());
        } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
          return EqExpr::negate(substitute_vars(node.operand, env), expr.pos());
        } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
          return EqExpr::binary(node.op, substitute_vars(node.lhs, env),
                                substitute_vars(node.rhs, env), expr.pos());
        } else if constexpr (std::is_same_v<T, EqExpr::Call>) {
          std::vector<EqExpr> args;
          args.reserve(node.args.size());
          for (const auto& a : node.args) args.push_back(substitute_vars(a, env));
          return EqExpr::call(node.name, std::move(args), expr.pos());
        } else {
          return expr;
        }
      },
      expr.node());
}

EqExpr substitute_params(const EqExpr& expr, const std::map<std::string, EqExpr>& args) {
  return std::visit(
      [&](const auto& node) -> EqExpr {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, EqExpr::Param>) {
          auto it = args.find(node.name);
          if (it == args.end()) fail(expr.pos(), "unbound parameter '" + node.name + "'");
          return it->second;
        } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
          return EqExpr::negate(substitute_params(node.operand, args), expr.pos());
        } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
          return EqExpr::binary(node.op, substitute_params(node.lhs, args),
                                substitute_params(node.rhs, args), expr.pos());
        } else if constexpr (std::is_same_v<T, EqExpr::Call>) {
          std::vector<EqExpr> out;
          out.reserve(node.args.size());
          for (const auto& a : node.args) out.push_back(substitute_params(a, args));
          return EqExpr::call(node.name, std::move(out), expr.pos());
        } else {
          return expr;
        }
      },
      expr.node());
}

// --- Conversion to and from cell formulas ------------------------------------

cells::Formula to_formula(const EqExpr& expr, const TableResolver& resolve_table) {
  using cells::Formula;
  return std::visit(
      [&](const auto& node) -> Formula {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, EqExpr::Number>) {
          return Formula::number(node.value);
        } else if constexpr (std::is_same_v<T, EqExpr::Text>) {
          return Formula::text(node.value);
        } else if constexpr (std::is_same_v<T, EqExpr::Value>) {
          if (!node.form.terms.empty())
            fail(expr.pos(), "unbound variable '" + node.form.terms.front().first + "'");
          return Formula::number(node.form.base);
        } else if constexpr (std::is_same_v<T, EqExpr::Param>) {
          fail(expr.pos(), "macro parameter '" + node.name + "' outside a macro body");
        } else if constexpr (std::is_same_v<T, EqExpr::TableRef>) {
          if (!resolve_table)
            fail(expr.pos(), "table reference '" + node.table + "' is not allowed here");
          std::vector<long long> subs;
          for (const auto& s : node.subs) {
            if (!s.is_const()) fail(expr.pos(), "unbound variable '" + s.var + "'");
            subs.push_back(s.offset);
          }
          return Formula::ref(resolve_table(node.table, subs, expr.pos()));
        } else if constexpr (std::is_same_v<T, EqExpr::CellPat>) {
          if (!node.col.is_const()) fail(expr.pos(), "unbound variable '" + node.col.var + "'");
          if (!node.row.is_const()) fail(expr.pos(), "unbound variable '" + node.row.var + "'");
          if (node.col.offset < 1)
            fail(expr.pos(), "cell reference is left of column A (column index " +
                                 std::to_string(node.col.offset) + ")");
          if (node.row.offset < 1)
            fail(expr.pos(),
                 "cell reference is above row 1 (row " + std::to_string(node.row.offset) + ")");
          return Formula::ref(cells::CellAddr{node.sheet, static_cast<int>(node.col.offset),
                                              static_cast<int>(node.row.offset)});
        } else if constexpr (std::is_same_v<T, EqExpr::RangePat>) {
          return Formula::range({node.sheet, node.c1, node.r1}, {node.sheet, node.c2, node.r2});
        } else if constexpr (std::is_same_v<T, EqExpr::Neg>) {
          return Formula::negate(to_formula(node.operand, resolve_table));
        } else if constexpr (std::is_same_v<T, EqExpr::Bin>) {
          return Formula::binary(node.op, to_formula(node.lhs, resolve_table),
                                 to_formula(node.rhs, resolve_table));
        } else {
          std::vector<Formula> args;
          args.reserve(node.args.size());
          for (const auto& a : node.args) args.push_back(to_formula(a, resolve_table));
          return Formula::call(node.name, std::move(args));
        }
      },
      expr.node());
}

EqExpr from_formula(const cells::Formula& formula,
                    const std::function<EqExpr(const cells::CellAddr&)>& map_ref) {
  using cells::Formula;
  return std::visit(
      [&](const auto& node) -> EqExpr {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Formula::Number>) {
          return EqExpr::number(node.value);
        } else if constexpr (std::is_same_v<T, Formula::Text>) {
          return EqExpr::text(node.value);
        } else if constexpr (std::is_same_v<T, Formula::Ref>) {
          return map_ref(node.addr);
        } else if constexpr (std::is_same_v<T, Formula::Range>) {
          return EqExpr::range_pat(node.tl.sheet, node.tl.col, node.tl.row, node.br.col,
                                   node.br.row);
        } else if constexpr (std::is_same_v<T, Formula::Neg>) {
          return EqExpr::negate(from_formula(node.operand, map_ref));
        } else if constexpr (std::is_same_v<T, Formula::Bin>) {
          return EqExpr::binary(node.op, from_formula(node.lhs, map_ref),
                                from_formula(node.rhs, map_ref));
        } else {
          std::vector<EqExpr> args;
          args.reserve(node.args.size());
          for (const auto& a : node.args) args.push_back(from_formula(a, map_ref));
          return EqExpr::call(node.name, std::move(args));
        }
      },
      formula.node());
}

// --- Module printing -----------------------------------------------------------

std::string print_table_decl(const TableDecl& decl) {
  std::string out = "table " + decl.name + "[";
  for (size_t i = 0; i < decl.dims.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(decl.dims[i].lo) + ":" + std::to_string(decl.dims[i].hi);
  }
  out.push_back(']');
  return out;
}

std::string print_layout_item(const LayoutItem& item) {
  std::string out = "place " + item.table + " at " + cells::to_string(item.anchor);
  if (item.orient == Orient::Down) out += " down";
  if (item.orient == Orient::Across) out += " across";
  return out;
}

std::string print_table_equation(const TableEquation& eq) {
  std::string out = eq.table + "[";
  for (size_t i = 0; i < eq.lhs.size(); ++i) {
    if (i) out += ", ";
    if (eq.lhs[i].quantified)
      out += "all " + eq.lhs[i].var;
    else
      out += std::to_string(eq.lhs[i].value);
  }
  out += "] = " + print_expr(eq.rhs);
  return out;
}

std::string print_module(const ModuleAst& module) {
  std::string out;
  for (const auto& use : module.uses) {
    out += "use \"";
    for (char c : use) {
      out.push_back(c);
      if (c == '"') out.push_back('"');
    }
    out += "\"\n";
  }
  for (const auto& t : module.tables) out += print_table_decl(t) + "\n";
  for (const auto& m : module.macros) {
    out += "def " + m.name + "(";
    for (size_t i = 0; i < m.params.size(); ++i) {
      if (i) out += ", ";
      out += m.params[i];
    }
    out += ") = " + print_expr(m.body) + "\n";
  }
  for (const auto& l : module.layout) out += print_layout_item(l) + "\n";
  for (const auto& e : module.equations) out += print_table_equation(e) + "\n";
  for (const auto& c : module.cell_equations)
    out += cells::to_string(c.lhs) + " = " + print_expr(c.rhs) + "\n";
  return out;
}

}  // namespace tableq::dsl
