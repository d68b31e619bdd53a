#include <cctype>
#include <set>

#include "lexer.hpp"
#include "tableq/dsl.hpp"

namespace tableq::dsl {

namespace {

using lex::Lexer;
using lex::Tok;
using lex::Token;

bool all_letters(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < 'A' || c > 'Z') return false;
  return true;
}

// "AB12" -> (28, 12)
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

bool digits_only(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

long long integer_token(Lexer& lx) {
  const Token& t = lx.peek();
  if (!t.is(Tok::Number) || !digits_only(t.text)) lx.error_at(t, "expected an integer");
  if (t.number > static_cast<double>(1LL << 30)) lx.error_at(t, "number too large");
  return static_cast<long long>(lx.next().number);
}

long long signed_integer(Lexer& lx) {
  if (lx.peek().punct("-")) {
    lx.next();
    return -integer_token(lx);
  }
  return integer_token(lx);
}

enum class Mode { Module, Listing };

struct ExprContext {
  Mode mode = Mode::Module;
  std::string default_sheet;                       // Listing: the left-hand sheet
  const std::set<std::string>* params = nullptr;   // macro bodies only
};

class ExprParser {
 public:
  ExprParser(Lexer& lx, ExprContext ctx) : lx_(lx), ctx_(std::move(ctx)) {}

  EqExpr parse_expression() { return parse_cmp(); }

  // A table subscript or address offset: 5, -5, V0, V0+2, V0-1.
  SubExpr parse_subexpr() {
    const Token& t = lx_.peek();
    if (t.is(Tok::Ident)) {
      Token var = lx_.next();
      long long off = 0;
      if (lx_.peek().punct("+")) {
        lx_.next();
        off = integer_token(lx_);
      } else if (lx_.peek().punct("-")) {
        lx_.next();
        off = -integer_token(lx_);
      }
      return SubExpr::variable(var.text, off);
    }
    return SubExpr::constant(signed_integer(lx_));
  }

 private:
  std::optional<cells::BinOp> peek_op(int prec) {
    using cells::BinOp;
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

  EqExpr parse_cmp() {
    EqExpr lhs = parse_concat();
    if (auto op = peek_op(1)) {
      SourcePos pos = lx_.next().pos;
      EqExpr rhs = parse_concat();
      lhs = EqExpr::binary(*op, std::move(lhs), std::move(rhs), pos);
      if (peek_op(1)) lx_.error_at(lx_.peek(), "comparison operators cannot be chained");
    }
    return lhs;
  }

  EqExpr parse_concat() {
    EqExpr lhs = parse_add();
    while (auto op = peek_op(2)) {
      SourcePos pos = lx_.next().pos;
      lhs = EqExpr::binary(*op, std::move(lhs), parse_add(), pos);
    }
    return lhs;
  }

  EqExpr parse_add() {
    EqExpr lhs = parse_mul();
    while (auto op = peek_op(3)) {
      SourcePos pos = lx_.next().pos;
      lhs = EqExpr::binary(*op, std::move(lhs), parse_mul(), pos);
    }
    return lhs;
  }

  EqExpr parse_mul() {
    EqExpr lhs = parse_unary();
    while (auto op = peek_op(4)) {
      SourcePos pos = lx_.next().pos;
      lhs = EqExpr::binary(*op, std::move(lhs), parse_unary(), pos);
    }
    return lhs;
  }

  EqExpr parse_unary() {
    if (lx_.peek().punct("-")) {
      SourcePos pos = lx_.next().pos;
      return EqExpr::negate(parse_unary(), pos);
    }
    return parse_pow();
  }

  EqExpr parse_pow() {
    EqExpr lhs = parse_atom();
    if (lx_.peek().punct("^")) {
      SourcePos pos = lx_.next().pos;
      return EqExpr::binary(cells::BinOp::Pow, std::move(lhs), parse_unary(), pos);
    }
    return lhs;
  }

  EqExpr parse_atom() {
    const Token& t = lx_.peek();
    switch (t.kind) {
      case Tok::Number: {
        Token tok = lx_.next();
        return EqExpr::number(tok.number, tok.pos);
      }
      case Tok::String: {
        Token tok = lx_.next();
        return EqExpr::text(tok.text, tok.pos);
      }
      case Tok::Sheet: {
        Token tok = lx_.next();
        lx_.expect_punct("!");
        return parse_pattern(tok.text, tok.pos);
      }
      case Tok::Ident: {
        if (lx_.peek(1).punct("(")) {
          Token name = lx_.next();
          lx_.next();  // (
          std::vector<EqExpr> args;
          if (!lx_.peek().punct(")")) {
            args.push_back(parse_expression());
            while (lx_.peek().punct(",")) {
              lx_.next();
              args.push_back(parse_expression());
            }
          }
          lx_.expect_punct(")");
          return EqExpr::call(name.text, std::move(args), name.pos);
        }
        if (lx_.peek(1).punct("!")) {
          Token sheet = lx_.next();
          lx_.next();  // !
          return parse_pattern(sheet.text, sheet.pos);
        }
        if (lx_.peek(1).punct("[")) {
          if (ctx_.mode == Mode::Module) {
            Token name = lx_.next();
            lx_.next();  // [
            std::vector<SubExpr> subs;
            subs.push_back(parse_subexpr());
            while (lx_.peek().punct(",")) {
              lx_.next();
              subs.push_back(parse_subexpr());
            }
            lx_.expect_punct("]");
            return EqExpr::table_ref(name.text, std::move(subs), name.pos);
          }
          // Listing: a column-letters pattern like F[V0]
          if (!all_letters(t.text))
            lx_.error_at(t, "expected column letters before '['");
          Token col = lx_.next();
          return parse_pattern_parts(default_sheet(col.pos),
                                     SubExpr::constant(cells::col_to_index(col.text)), col.pos);
        }
        if (ctx_.mode == Mode::Listing) {
          if (auto cr = split_col_row(t.text)) {
            Token tok = lx_.next();
            return finish_fixed_ref(default_sheet(tok.pos), cr->first, cr->second, tok.pos);
          }
          lx_.error_at(t, "unknown name '" + t.text + "'");
        }
        if (ctx_.params && ctx_.params->count(t.text)) {
          Token tok = lx_.next();
          return EqExpr::param(tok.text, tok.pos);
        }
        if (split_col_row(t.text))
          lx_.error_at(t, "cell references must be sheet-qualified here ('Sheet'!" + t.text + ")");
        lx_.error_at(t, ctx_.params ? "unknown name '" + t.text + "' (not a macro parameter)"
                                    : "unknown name '" + t.text + "'");
      }
      case Tok::Punct:
        if (t.punct("(")) {
          lx_.next();
          EqExpr inner = parse_expression();
          lx_.expect_punct(")");
          return inner;
        }
        if (t.punct("[") && ctx_.mode == Mode::Listing) return parse_affine_value();
        [[fallthrough]];
      default: lx_.error_at(t, "expected a formula value");
    }
  }

  // After 'Sheet'!: column part then row part, or a fixed range like A1:B9.
  EqExpr parse_pattern(const std::string& sheet, const SourcePos& pos) {
    const Token& t = lx_.peek();
    if (t.is(Tok::Ident)) {
      if (auto cr = split_col_row(t.text)) {
        lx_.next();
        return finish_fixed_ref(sheet, cr->first, cr->second, pos);
      }
      if (all_letters(t.text)) {
        Token col = lx_.next();
        return parse_pattern_parts(sheet, SubExpr::constant(cells::col_to_index(col.text)), pos);
      }
      lx_.error_at(t, "expected a cell like A1 after '!'");
    }
    if (t.punct("[")) {
      SubExpr col = parse_bracket_subexpr();
      return parse_pattern_parts(sheet, col, pos);
    }
    lx_.error_at(t, "expected a cell like A1 after '!'");
  }

  // The column part is known; parse the row part.
  EqExpr parse_pattern_parts(const std::string& sheet, SubExpr col, const SourcePos& pos) {
    const Token& t = lx_.peek();
    SubExpr row;
    if (t.is(Tok::Number)) {
      long long r = integer_token(lx_);
      if (r < 1) fail(t.pos, "row must be >= 1, got " + std::to_string(r));
      row = SubExpr::constant(r);
    } else if (t.punct("[")) {
      row = parse_bracket_subexpr();
    } else {
      lx_.error_at(t, "expected a row (a number or a [...] subscript)");
    }
    if (col.is_const() && col.offset < 1)
      fail(pos, "column index must be >= 1, got " + std::to_string(col.offset));
    check_var(col, pos);
    check_var(row, pos);
    return EqExpr::cell_pat(sheet, std::move(col), std::move(row), pos);
  }

  EqExpr finish_fixed_ref(const std::string& sheet, int col, int row, const SourcePos& pos) {
    if (row < 1) fail(pos, "row must be >= 1, got " + std::to_string(row));
    if (lx_.peek().punct(":")) {
      lx_.next();
      Token end = lx_.expect_ident();
      auto cr = split_col_row(end.text);
      if (!cr || cr->second < 1) lx_.error_at(end, "expected a cell like B9 after ':'");
      return EqExpr::range_pat(sheet, col, row, cr->first, cr->second, pos);
    }
    return EqExpr::cell_pat(sheet, SubExpr::constant(col), SubExpr::constant(row), pos);
  }

  SubExpr parse_bracket_subexpr() {
    lx_.expect_punct("[");
    SubExpr sub = parse_subexpr();
    if (lx_.peek().ident("in"))
      lx_.error_at(lx_.peek(), "run binders may appear only on the left-hand side");
    lx_.expect_punct("]");
    return sub;
  }

  void check_var(const SubExpr& sub, const SourcePos& pos) {
    if (sub.is_const()) return;
    if (ctx_.mode == Mode::Module && ctx_.params)
      fail(pos, "unbound variable '" + sub.var + "' in macro body");
  }

  // [10*V0], [2*V0+3*V1+1.5], [V0-2]
  EqExpr parse_affine_value() {
    Token open = lx_.expect_punct("[");
    Affine form;
    bool first = true;
    while (true) {
      int sign = 1;
      if (lx_.peek().punct("-")) {
        lx_.next();
        sign = -1;
      } else if (lx_.peek().punct("+")) {
        if (first) lx_.error_at(lx_.peek(), "expected a term");
        lx_.next();
      } else if (!first) {
        break;
      }
      const Token& t = lx_.peek();
      if (t.is(Tok::Number)) {
        Token num = lx_.next();
        if (lx_.peek().punct("*")) {
          if (!digits_only(num.text))
            lx_.error_at(num, "variable coefficients must be integers");
          lx_.next();
          Token var = lx_.expect_ident();
          form.terms.emplace_back(var.text, sign * static_cast<long long>(num.number));
        } else {
          form.base += sign * num.number;
        }
      } else if (t.is(Tok::Ident)) {
        Token var = lx_.next();
        form.terms.emplace_back(var.text, sign);
      } else {
        lx_.error_at(t, "expected a term");
      }
      first = false;
    }
    lx_.expect_punct("]");
    // canonical order: sorted by variable, zero coefficients dropped
    std::sort(form.terms.begin(), form.terms.end());
    std::vector<std::pair<std::string, long long>> merged;
    for (auto& term : form.terms) {
      if (!merged.empty() && merged.back().first == term.first)
        merged.back().second += term.second;
      else
        merged.push_back(term);
    }
    std::erase_if(merged, [](const auto& t2) { return t2.second == 0; });
    form.terms = std::move(merged);
    return EqExpr::value(std::move(form), open.pos);
  }

  std::string default_sheet(const SourcePos& pos) {
    if (ctx_.default_sheet.empty())
      fail(pos, "unqualified cell reference but no default sheet in this context");
    return ctx_.default_sheet;
  }

  Lexer& lx_;
  ExprContext ctx_;
};

// Sheet name for an address: quoted token or identifier followed by '!'.
std::string parse_sheet_name(Lexer& lx) {
  const Token& t = lx.peek();
  if (t.is(Tok::Sheet)) {
    std::string sheet = lx.next().text;
    lx.expect_punct("!");
    return sheet;
  }
  if (t.is(Tok::Ident) && lx.peek(1).punct("!")) {
    std::string sheet = lx.next().text;
    lx.next();
    return sheet;
  }
  lx.error_at(t, "expected a sheet-qualified reference like 'Sheet'!A1");
}

cells::CellAddr parse_cell_addr(Lexer& lx) {
  const Token& start = lx.peek();
  std::string sheet = parse_sheet_name(lx);
  Token cell = lx.expect_ident();
  auto cr = split_col_row(cell.text);
  if (!cr) lx.error_at(cell, "expected a cell like A1 after '!'");
  return cells::make_addr(sheet, cr->first, cr->second, start.pos);
}

void check_bound(const EqExpr& rhs, const std::set<std::string>& bound, const SourcePos& pos,
                 const std::string& what) {
  for (const auto& var : free_vars(rhs))
    if (!bound.count(var))
      fail(pos, "unbound variable '" + var + "' " + what);
}

// --- Module parsing ----------------------------------------------------------

struct ModuleParser {
  ModuleAst module;
  std::string origin;

  void parse_line(Lexer& lx) {
    const Token& t = lx.peek();
    if (t.is(Tok::Ident) && t.text == "table") return parse_table(lx);
    if (t.is(Tok::Ident) && t.text == "def") return parse_def(lx);
    if (t.is(Tok::Ident) && t.text == "use") return parse_use(lx);
    if (t.is(Tok::Ident) && t.text == "place") return parse_place(lx);
    return parse_equation(lx);
  }

  void parse_table(Lexer& lx) {
    SourcePos pos = lx.next().pos;
    Token name = lx.expect_ident();
    TableDecl decl{name.text, {}, pos};
    lx.expect_punct("[");
    do {
      const Token& at = lx.peek();
      long long lo = signed_integer(lx);
      lx.expect_punct(":");
      long long hi = signed_integer(lx);
      if (lo > hi)
        fail(at.pos, "empty subscript range " + std::to_string(lo) + ":" + std::to_string(hi));
      decl.dims.push_back({lo, hi});
    } while (lx.peek().punct(",") && (lx.next(), true));
    lx.expect_punct("]");
    expect_line_end(lx);
    for (const auto& other : module.tables)
      if (other.name == decl.name)
        fail(pos, "duplicate table '" + decl.name + "'; first declared at line " +
                      std::to_string(other.pos.line));
    module.tables.push_back(std::move(decl));
  }

  void parse_def(Lexer& lx) {
    SourcePos pos = lx.next().pos;
    Token name = lx.expect_ident();
    lx.expect_punct("(");
    std::vector<std::string> params;
    std::set<std::string> param_set;
    if (!lx.peek().punct(")")) {
      do {
        Token p = lx.expect_ident();
        if (!param_set.insert(p.text).second)
          fail(p.pos, "duplicate parameter '" + p.text + "'");
        params.push_back(p.text);
      } while (lx.peek().punct(",") && (lx.next(), true));
    }
    lx.expect_punct(")");
    lx.expect_punct("=");
    ExprParser ep(lx, {Mode::Module, "", &param_set});
    EqExpr body = ep.parse_expression();
    expect_line_end(lx);
    check_bound(body, {}, pos, "in macro body");
    for (const auto& other : module.macros)
      if (other.name == name.text)
        fail(pos, "duplicate macro '" + name.text + "'; first defined at line " +
                      std::to_string(other.pos.line));
    module.macros.push_back({name.text, std::move(params), std::move(body), pos});
  }

  void parse_use(Lexer& lx) {
    lx.next();
    const Token& t = lx.peek();
    if (!t.is(Tok::String)) lx.error_at(t, "expected a quoted file path after 'use'");
    module.uses.push_back(lx.next().text);
    expect_line_end(lx);
  }

  void parse_place(Lexer& lx) {
    SourcePos pos = lx.next().pos;
    Token name = lx.expect_ident();
    const Token& at = lx.peek();
    if (!at.ident("at")) lx.error_at(at, "expected 'at'");
    lx.next();
    cells::CellAddr anchor = parse_cell_addr(lx);
    Orient orient = Orient::None;  // None: unspecified; two-dimensional, or down by default
    if (lx.peek().ident("down")) {
      lx.next();
      orient = Orient::Down;
    } else if (lx.peek().ident("across")) {
      lx.next();
      orient = Orient::Across;
    }
    expect_line_end(lx);
    module.layout.push_back({name.text, std::move(anchor), orient, pos});
  }

  void parse_equation(Lexer& lx) {
    const Token& t = lx.peek();
    if (t.is(Tok::Ident) && lx.peek(1).punct("[")) {
      // table equation
      SourcePos pos = t.pos;
      Token name = lx.next();
      lx.next();  // [
      std::vector<LhsSub> lhs;
      std::set<std::string> bound;
      do {
        if (lx.peek().ident("all")) {
          lx.next();
          Token var = lx.expect_ident();
          if (!bound.insert(var.text).second)
            fail(var.pos, "variable '" + var.text + "' is quantified twice on one left-hand side");
          lhs.push_back({true, var.text, 0});
        } else {
          lhs.push_back({false, "", signed_integer(lx)});
        }
      } while (lx.peek().punct(",") && (lx.next(), true));
      lx.expect_punct("]");
      lx.expect_punct("=");
      ExprParser ep(lx, {Mode::Module, "", nullptr});
      EqExpr rhs = ep.parse_expression();
      expect_line_end(lx);
      check_bound(rhs, bound, pos, "on the right-hand side");
      module.equations.push_back({name.text, std::move(lhs), std::move(rhs), pos});
      return;
    }
    // cell equation
    SourcePos pos = t.pos;
    cells::CellAddr addr = parse_cell_addr(lx);
    lx.expect_punct("=");
    ExprParser ep(lx, {Mode::Module, "", nullptr});
    EqExpr rhs = ep.parse_expression();
    expect_line_end(lx);
    check_bound(rhs, {}, pos, "in a cell equation");
    module.cell_equations.push_back({std::move(addr), std::move(rhs), pos});
  }

  void expect_line_end(Lexer& lx) {
    if (!lx.at_end()) lx.error_at(lx.peek(), "unexpected input at end of line");
  }
};

}  // namespace

ModuleAst parse_module(std::string_view text, std::string origin) {
  ModuleParser mp;
  mp.origin = origin;
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
    Lexer lx(line, origin, line_no, 1);
    mp.parse_line(lx);
  }
  return std::move(mp.module);
}

// --- Run listings --------------------------------------------------------------

namespace {

// One bracketed left-hand part: binder, anonymous range, or both kinds of
// range operand decide the axis (letters = column, digits = row).
struct LhsBracket {
  bool is_col = false;
  RunPart part;
};

LhsBracket parse_lhs_bracket(Lexer& lx) {
  lx.expect_punct("[");
  LhsBracket out;
  const Token& t = lx.peek();
  if (t.is(Tok::Ident) && lx.peek(1).ident("in")) {
    Token var = lx.next();
    lx.next();  // in
    const Token& lo_tok = lx.peek();
    if (lo_tok.is(Tok::Ident) && all_letters(lo_tok.text)) {
      long long lo = cells::col_to_index(lx.next().text);
      lx.expect_punct(":");
      Token hi_tok = lx.expect_ident();
      if (!all_letters(hi_tok.text)) lx.error_at(hi_tok, "expected column letters");
      long long hi = cells::col_to_index(hi_tok.text);
      if (lo > hi) fail(lo_tok.pos, "reversed column range");
      out.is_col = true;
      out.part = RunPart::binder(var.text, lo, hi);
    } else {
      long long lo = integer_token(lx);
      lx.expect_punct(":");
      long long hi = integer_token(lx);
      if (lo < 1) fail(lo_tok.pos, "row must be >= 1, got " + std::to_string(lo));
      if (lo > hi) fail(lo_tok.pos, "reversed row range");
      out.is_col = false;
      out.part = RunPart::binder(var.text, lo, hi);
    }
    lx.expect_punct("]");
    return out;
  }
  if (t.is(Tok::Ident) && all_letters(t.text)) {
    long long lo = cells::col_to_index(lx.next().text);
    lx.expect_punct(":");
    Token hi_tok = lx.expect_ident();
    if (!all_letters(hi_tok.text)) lx.error_at(hi_tok, "expected column letters");
    long long hi = cells::col_to_index(hi_tok.text);
    if (lo > hi) fail(t.pos, "reversed column range");
    out.is_col = true;
    out.part = RunPart::anon(lo, hi);
    lx.expect_punct("]");
    return out;
  }
  if (t.is(Tok::Number)) {
    long long lo = integer_token(lx);
    lx.expect_punct(":");
    long long hi = integer_token(lx);
    if (lo < 1) fail(t.pos, "row must be >= 1, got " + std::to_string(lo));
    if (lo > hi) fail(t.pos, "reversed row range");
    out.is_col = false;
    out.part = RunPart::anon(lo, hi);
    lx.expect_punct("]");
    return out;
  }
  lx.error_at(t, "malformed run binder; expected 'VAR in lo:hi' or 'lo:hi'");
}

RunEquation parse_run_equation(Lexer& lx) {
  const Token& start = lx.peek();
  RunEquation eq;
  eq.pos = start.pos;
  eq.sheet = parse_sheet_name(lx);

  std::optional<RunPart> col, row;
  while (!(col && row)) {
    const Token& t = lx.peek();
    if (t.is(Tok::Ident) && !col && !row) {
      if (auto cr = split_col_row(t.text)) {
        lx.next();
        if (cr->second < 1) fail(t.pos, "row must be >= 1");
        col = RunPart::fixed(cr->first);
        row = RunPart::fixed(cr->second);
        break;
      }
      if (all_letters(t.text)) {
        col = RunPart::fixed(cells::col_to_index(lx.next().text));
        continue;
      }
      lx.error_at(t, "expected a cell like H4 after '!'");
    }
    if (t.is(Tok::Number) && col && !row) {
      long long r = integer_token(lx);
      if (r < 1) fail(t.pos, "row must be >= 1, got " + std::to_string(r));
      row = RunPart::fixed(r);
      continue;
    }
    if (t.punct("[")) {
      LhsBracket br = parse_lhs_bracket(lx);
      if (br.is_col) {
        if (col) fail(t.pos, "two column parts on one left-hand side");
        if (row) fail(t.pos, "column part must come before the row part");
        col = br.part;
      } else {
        if (row) fail(t.pos, "two row parts on one left-hand side");
        if (!col) fail(t.pos, "missing column part before the row part");
        row = br.part;
      }
      continue;
    }
    lx.error_at(t, col ? "expected a row part" : "expected a cell or run pattern after '!'");
  }
  eq.col = *col;
  eq.row = *row;

  lx.expect_punct("=");
  ExprParser ep(lx, {Mode::Listing, eq.sheet, nullptr});
  eq.rhs = ep.parse_expression();

  // scoping checks
  std::set<std::string> bound;
  if (eq.col.kind == RunPart::Kind::Binder) bound.insert(eq.col.var);
  if (eq.row.kind == RunPart::Kind::Binder) {
    if (!bound.insert(eq.row.var).second)
      fail(eq.pos, "variable '" + eq.row.var + "' bound twice on one left-hand side");
  }
  check_bound(eq.rhs, bound, eq.pos, "on the right-hand side");
  bool anon = eq.col.kind == RunPart::Kind::Anon || eq.row.kind == RunPart::Kind::Anon;
  if (anon && !free_vars(eq.rhs).empty())
    fail(eq.pos, "anonymous range with a variable right-hand side");
  return eq;
}

}  // namespace

RunListing parse_run_listing(std::string_view text, std::string filename) {
  Lexer lx(text, std::move(filename));
  RunListing listing;
  while (!lx.at_end()) listing.items.push_back(parse_run_equation(lx));
  return listing;
}

}  // namespace tableq::dsl
