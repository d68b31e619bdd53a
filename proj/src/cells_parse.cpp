#include <cctype>
#include <optional>

#include "lexer.hpp"
#include "tableq/cells.hpp"

namespace tableq::cells {

namespace {

using lex::Lexer;
using lex::Tok;
using lex::Token;

// A1-style column+row, e.g. "AB12" -> (28, 12). Column letters are uppercase.
std::optional<std::pair<int, int>> split_col_row(std::string_view text) {
  size_t i = 0;
  while (i < text.size() && text[i] >= 'A' && text[i] <= 'Z') ++i;
  if (i == 0 || i == text.size()) return std::nullopt;
  for (size_t j = i; j < text.size(); ++j)
    if (!std::isdigit(static_cast<unsigned char>(text[j]))) return std::nullopt;
  long long row = 0;
  for (size_t j = i; j < text.size(); ++j) {
    row = row * 10 + (text[j] - '0');
    if (row > (1LL << 30)) return std::nullopt;
  }
  return std::make_pair(col_to_index(text.substr(0, i)), static_cast<int>(row));
}

class FormulaParser {
 public:
  FormulaParser(Lexer& lx, std::string default_sheet)
      : lx_(lx), default_sheet_(std::move(default_sheet)) {}

  Formula parse_expression() { return parse_cmp(); }

 private:
  std::optional<BinOp> peek_op(int prec) {
    const Token& t = lx_.peek();
    if (t.kind != Tok::Punct) return std::nullopt;
    auto is = [&](std::string_view p) { return t.text == p; };
    switch (prec) {
      case 1:
        if (is("=")) return BinOp::Eq;
        if (is("<>")) return BinOp::Ne;
        if (is("<")) return BinOp::Lt;
        if (is("<=")) return BinOp::Le;
        if (is(">")) return BinOp::Gt;
        if (is(">=")) return BinOp::Ge;
        return std::nullopt;
      case 2:
        if (is("&")) return BinOp::Concat;
        return std::nullopt;
      case 3:
        if (is("+")) return BinOp::Add;
        if (is("-")) return BinOp::Sub;
        return std::nullopt;
      case 4:
        if (is("*")) return BinOp::Mul;
        if (is("/")) return BinOp::Div;
        return std::nullopt;
      default: return std::nullopt;
    }
  }

  Formula parse_cmp() {
    Formula lhs = parse_concat();
    if (auto op = peek_op(1)) {
      lx_.next();
      Formula rhs = parse_concat();
      lhs = Formula::binary(*op, std::move(lhs), std::move(rhs));
      if (peek_op(1))
        lx_.error_at(lx_.peek(), "comparison operators cannot be chained");
    }
    return lhs;
  }

  Formula parse_concat() {
    Formula lhs = parse_add();
    while (auto op = peek_op(2)) {
      lx_.next();
      lhs = Formula::binary(*op, std::move(lhs), parse_add());
    }
    return lhs;
  }

  Formula parse_add() {
    Formula lhs = parse_mul();
    while (auto op = peek_op(3)) {
      lx_.next();
      lhs = Formula::binary(*op, std::move(lhs), parse_mul());
    }
    return lhs;
  }

  Formula parse_mul() {
    Formula lhs = parse_unary();
    while (auto op = peek_op(4)) {
      lx_.next();
      lhs = Formula::binary(*op, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  Formula parse_unary() {
    if (lx_.peek().punct("-")) {
      lx_.next();
      return Formula::negate(parse_unary());
    }
    return parse_pow();
  }

  Formula parse_pow() {
    Formula lhs = parse_atom();
    if (lx_.peek().punct("^")) {
      lx_.next();
      return Formula::binary(BinOp::Pow, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  Formula parse_atom() {
    const Token& t = lx_.peek();
    switch (t.kind) {
      case Tok::Number: {
        Token tok = lx_.next();
        return Formula::number(tok.number);
      }
      case Tok::String: {
        Token tok = lx_.next();
        return Formula::text(tok.text);
      }
      case Tok::Sheet: {
        Token tok = lx_.next();
        return parse_ref_tail(tok.text, tok.pos);
      }
      case Tok::Ident: {
        if (lx_.peek(1).punct("(")) {
          Token name = lx_.next();
          lx_.next();  // (
          std::vector<Formula> args;
          if (!lx_.peek().punct(")")) {
            args.push_back(parse_expression());
            while (lx_.peek().punct(",")) {
              lx_.next();
              args.push_back(parse_expression());
            }
          }
          lx_.expect_punct(")");
          return Formula::call(name.text, std::move(args));
        }
        if (lx_.peek(1).punct("!")) {
          Token sheet = lx_.next();
          lx_.next();  // !
          return parse_ref_after_bang(sheet.text, sheet.pos);
        }
        if (auto cr = split_col_row(t.text)) {
          Token tok = lx_.next();
          return parse_range_tail(default_sheet(tok.pos), cr->first, cr->second, tok.pos);
        }
        lx_.error_at(t, "unknown name '" + t.text +
                            "'; cell references look like A1 and may be sheet-qualified");
      }
      case Tok::Punct:
        if (t.punct("(")) {
          lx_.next();
          Formula inner = parse_expression();
          lx_.expect_punct(")");
          return inner;
        }
        [[fallthrough]];
      default: lx_.error_at(t, "expected a formula value");
    }
  }

  Formula parse_ref_tail(const std::string& sheet, const SourcePos& pos) {
    lx_.expect_punct("!");
    return parse_ref_after_bang(sheet, pos);
  }

  Formula parse_ref_after_bang(const std::string& sheet, const SourcePos& pos) {
    Token cell = lx_.expect_ident();
    auto cr = split_col_row(cell.text);
    if (!cr) lx_.error_at(cell, "expected a cell like A1 after '!'");
    return parse_range_tail(sheet, cr->first, cr->second, pos);
  }

  Formula parse_range_tail(const std::string& sheet, int col, int row, const SourcePos& pos) {
    CellAddr first = make_addr(sheet, col, row, pos);
    if (!lx_.peek().punct(":")) return Formula::ref(std::move(first));
    lx_.next();
    Token end = lx_.expect_ident();
    auto cr = split_col_row(end.text);
    if (!cr) lx_.error_at(end, "expected a cell like B9 after ':'");
    CellAddr second = make_addr(sheet, cr->first, cr->second, end.pos);
    return Formula::range(std::move(first), std::move(second));
  }

  std::string default_sheet(const SourcePos& pos) {
    if (default_sheet_.empty())
      fail(pos, "unqualified cell reference but no default sheet in this context");
    return default_sheet_;
  }

  Lexer& lx_;
  std::string default_sheet_;
};

CellAddr parse_qualified_addr(Lexer& lx) {
  const Token& t = lx.peek();
  std::string sheet;
  SourcePos pos = t.pos;
  if (t.kind == Tok::Sheet) {
    sheet = lx.next().text;
  } else if (t.kind == Tok::Ident && lx.peek(1).punct("!")) {
    sheet = lx.next().text;
  } else {
    lx.error_at(t, "expected a sheet-qualified cell address like 'Sheet'!A1");
  }
  lx.expect_punct("!");
  Token cell = lx.expect_ident();
  auto cr = split_col_row(cell.text);
  if (!cr) lx.error_at(cell, "expected a cell like A1 after '!'");
  return make_addr(sheet, cr->first, cr->second, pos);
}

}  // namespace

Formula parse_formula(std::string_view text, std::string_view default_sheet,
                      const SourcePos& pos) {
  Lexer lx(text, pos.file, pos.known() ? pos.line : 1, pos.known() ? pos.col : 1);
  FormulaParser parser(lx, std::string(default_sheet));
  Formula f = parser.parse_expression();
  if (!lx.at_end()) lx.error_at(lx.peek(), "unexpected input after formula");
  return f;
}

Workbook parse_workbook(std::string_view text, std::string_view filename) {
  Workbook wb;
  std::map<CellAddr, int> def_lines;
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

    Lexer lx(line, std::string(filename), line_no, 1);
    CellAddr addr = parse_qualified_addr(lx);
    lx.expect_punct("=");
    FormulaParser parser(lx, addr.sheet);
    Formula f = parser.parse_expression();
    if (!lx.at_end()) lx.error_at(lx.peek(), "unexpected input after formula");

    auto [it, inserted] = def_lines.emplace(addr, line_no);
    if (!inserted)
      fail({std::string(filename), line_no, 1},
           "duplicate cell " + to_string(addr) + "; first defined on line " +
               std::to_string(it->second));
    wb.cells.emplace(std::move(addr), std::move(f));
  }
  return wb;
}

}  // namespace tableq::cells
