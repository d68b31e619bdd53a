#include "tableq/cells.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>

namespace tableq {

std::string to_string(const SourcePos& pos) {
  if (!pos.known()) return pos.file;
  std::string out = pos.file.empty() ? "<input>" : pos.file;
  out += ":" + std::to_string(pos.line) + ":" + std::to_string(pos.col);
  return out;
}

Error::Error(SourcePos pos, const std::string& message)
    : std::runtime_error(pos.known() || !pos.file.empty() ? to_string(pos) + ": " + message
                                                          : message),
      pos_(std::move(pos)),
      message_(message) {}

}  // namespace tableq

namespace tableq::cells {

int col_to_index(std::string_view letters) {
  if (letters.empty()) fail({}, "empty column letters");
  long long index = 0;
  for (char c : letters) {
    if (c < 'A' || c > 'Z')
      fail({}, "invalid character '" + std::string(1, c) + "' in column letters '" +
                   std::string(letters) + "'");
    index = index * 26 + (c - 'A' + 1);
    if (index > (1LL << 30)) fail({}, "column '" + std::string(letters) + "' out of range");
  }
  return static_cast<int>(index);
}

std::string index_to_col(int index) {
  if (index < 1) fail({}, "column index must be >= 1, got " + std::to_string(index));
  std::string out;
  int i = index;
  while (i > 0) {
    --i;
    out.push_back(static_cast<char>('A' + i % 26));
    i /= 26;
  }
  return {out.rbegin(), out.rend()};
}

namespace {

bool ident_shaped(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  };
  if (!alpha(name[0])) return false;
  for (char c : name)
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  return true;
}

}  // namespace

std::string quote_sheet(std::string_view sheet) {
  if (ident_shaped(sheet)) return std::string(sheet);
  std::string out = "'";
  for (char c : sheet) {
    out.push_back(c);
    if (c == '\'') out.push_back('\'');
  }
  out.push_back('\'');
  return out;
}

CellAddr make_addr(std::string sheet, int col, int row, const SourcePos& pos) {
  if (sheet.empty()) fail(pos, "empty sheet name");
  if (std::isspace(static_cast<unsigned char>(sheet.front())) ||
      std::isspace(static_cast<unsigned char>(sheet.back())))
    fail(pos, "sheet name '" + sheet + "' has leading or trailing whitespace");
  if (col < 1) fail(pos, "column index must be >= 1, got " + std::to_string(col));
  if (row < 1) fail(pos, "row must be >= 1, got " + std::to_string(row));
  return CellAddr{std::move(sheet), col, row};
}

std::string to_string(const CellAddr& addr) {
  return quote_sheet(addr.sheet) + "!" + index_to_col(addr.col) + std::to_string(addr.row);
}

std::string_view op_token(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Pow: return "^";
    case BinOp::Concat: return "&";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "<>";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
  }
  return "?";
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

// --- Formula construction ----------------------------------------------------

Formula::Formula() : Formula(number(0)) {}

Formula Formula::make(Node node) { return Formula(std::make_shared<const Node>(std::move(node))); }

Formula Formula::number(double value) { return make(Number{value}); }
Formula Formula::text(std::string value) { return make(Text{std::move(value)}); }
Formula Formula::ref(CellAddr addr) { return make(Ref{std::move(addr)}); }

Formula Formula::range(CellAddr a, CellAddr b) {
  if (a.sheet != b.sheet)
    fail({}, "range endpoints are on different sheets: '" + a.sheet + "' and '" + b.sheet + "'");
  CellAddr tl{a.sheet, std::min(a.col, b.col), std::min(a.row, b.row)};
  CellAddr br{a.sheet, std::max(a.col, b.col), std::max(a.row, b.row)};
  return make(Range{std::move(tl), std::move(br)});
}

Formula Formula::negate(Formula operand) {
  if (const auto* n = std::get_if<Number>(&operand.node())) return number(-n->value);
  return make(Neg{std::move(operand)});
}

Formula Formula::binary(BinOp op, Formula lhs, Formula rhs) {
  return make(Bin{op, std::move(lhs), std::move(rhs)});
}

Formula Formula::call(std::string name, std::vector<Formula> args) {
  for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return make(Call{std::move(name), std::move(args)});
}

bool Formula::equal(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
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
        } else if constexpr (std::is_same_v<T, Ref>) {
          return va.addr == vb.addr;
        } else if constexpr (std::is_same_v<T, Range>) {
          return va.tl == vb.tl && va.br == vb.br;
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

// --- Canonical printing ------------------------------------------------------

namespace {

// Precedence, low to high: comparisons(1) & (2) + -(3) * /(4) unary(5) ^(6)
// atoms(7). Negative number literals print with a leading '-', so they bind
// like a unary minus.
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

int node_prec(const Formula& f) {
  const auto& n = f.node();
  if (const auto* num = std::get_if<Formula::Number>(&n))
    return std::signbit(num->value) ? 5 : 7;
  if (std::holds_alternative<Formula::Neg>(n)) return 5;
  if (const auto* bin = std::get_if<Formula::Bin>(&n)) return op_prec(bin->op);
  return 7;
}

std::string quote_text(const std::string& value) {
  std::string out = "\"";
  for (char c : value) {
    out.push_back(c);
    if (c == '"') out.push_back('"');
  }
  out.push_back('"');
  return out;
}

void print(const Formula& f, std::string& out);

void print_child(const Formula& child, bool need_parens, std::string& out) {
  if (need_parens) out.push_back('(');
  print(child, out);
  if (need_parens) out.push_back(')');
}

void print(const Formula& f, std::string& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Formula::Number>) {
          out += format_number(node.value);
        } else if constexpr (std::is_same_v<T, Formula::Text>) {
          out += quote_text(node.value);
        } else if constexpr (std::is_same_v<T, Formula::Ref>) {
          out += to_string(node.addr);
        } else if constexpr (std::is_same_v<T, Formula::Range>) {
          out += to_string(node.tl);
          out.push_back(':');
          out += index_to_col(node.br.col) + std::to_string(node.br.row);
        } else if constexpr (std::is_same_v<T, Formula::Neg>) {
          out.push_back('-');
          print_child(node.operand, node_prec(node.operand) < 6, out);
        } else if constexpr (std::is_same_v<T, Formula::Bin>) {
          int prec = op_prec(node.op);
          bool right_assoc = node.op == BinOp::Pow;
          bool non_assoc = prec == 1;
          bool lp, rp;
          if (right_assoc) {
            lp = node_prec(node.lhs) <= prec;
            rp = node_prec(node.rhs) < 5;  // '^' accepts a unary right operand
          } else {
            lp = node_prec(node.lhs) < prec + (non_assoc ? 1 : 0);
            rp = node_prec(node.rhs) <= prec;
          }
          print_child(node.lhs, lp, out);
          out.push_back(' ');
          out += op_token(node.op);
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
      f.node());
}

}  // namespace

std::string serialize_formula(const Formula& formula) {
  std::string out;
  print(formula, out);
  return out;
}

std::string serialize_workbook(const Workbook& workbook) {
  std::string out;
  for (const auto& [addr, formula] : workbook.cells) {
    out += to_string(addr);
    out += " = ";
    out += serialize_formula(formula);
    out.push_back('\n');
  }
  return out;
}

}  // namespace tableq::cells
