#include "lexer.hpp"

#include <cctype>
#include <charconv>

namespace tableq::lex {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

Lexer::Lexer(std::string_view src, std::string file, int first_line, int first_col)
    : file_(std::move(file)) {
  tokenize(src, first_line, first_col);
}

void Lexer::tokenize(std::string_view src, int first_line, int first_col) {
  size_t i = 0;
  int line = first_line;
  int col = first_col;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  auto pos_here = [&]() { return SourcePos{file_, line, col}; };

  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      size_t j = i;
      while (j < src.size() && src[j] != '\n') ++j;
      advance(j - i);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    SourcePos pos = pos_here();
    if (ident_start(c)) {
      size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      tokens_.push_back({Tok::Ident, std::string(src.substr(i, j - i)), 0, pos});
      advance(j - i);
      continue;
    }
    if (digit(c) || (c == '.' && i + 1 < src.size() && digit(src[i + 1]))) {
      size_t j = i;
      while (j < src.size() && digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.' && j + 1 < src.size() && digit(src[j + 1])) {
        ++j;
        while (j < src.size() && digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && digit(src[k])) {
          while (k < src.size() && digit(src[k])) ++k;
          j = k;
        }
      }
      std::string text(src.substr(i, j - i));
      double value = 0;
      auto res = std::from_chars(text.data(), text.data() + text.size(), value);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        fail(pos, "malformed number '" + text + "'");
      tokens_.push_back({Tok::Number, text, value, pos});
      advance(j - i);
      continue;
    }
    if (c == '"' || c == '\'') {
      char q = c;
      std::string value;
      size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        if (src[j] == q) {
          if (j + 1 < src.size() && src[j + 1] == q) {
            value.push_back(q);
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        if (src[j] == '\n') break;  // strings and sheet names stay on one line
        value.push_back(src[j]);
        ++j;
      }
      if (!closed)
        fail(pos, q == '"' ? std::string("unterminated string literal")
                           : std::string("unterminated sheet name"));
      tokens_.push_back({q == '"' ? Tok::String : Tok::Sheet, value, 0, pos});
      advance(j - i);
      continue;
    }
    auto two = src.substr(i, 2);
    if (two == "<=" || two == ">=" || two == "<>" || two == "->") {
      tokens_.push_back({Tok::Punct, std::string(two), 0, pos});
      advance(2);
      continue;
    }
    if (std::string_view("+-*/^&=<>()[]:,!").find(c) != std::string_view::npos) {
      tokens_.push_back({Tok::Punct, std::string(1, c), 0, pos});
      advance(1);
      continue;
    }
    fail(pos, "unexpected character '" + std::string(1, c) + "'");
  }
  tokens_.push_back({Tok::End, "", 0, pos_here()});
}

const Token& Lexer::peek(size_t ahead) const {
  size_t at = index_ + ahead;
  if (at >= tokens_.size()) at = tokens_.size() - 1;
  return tokens_[at];
}

Token Lexer::next() {
  Token t = peek();
  if (index_ + 1 < tokens_.size()) ++index_;
  return t;
}

Token Lexer::expect_punct(std::string_view p) {
  if (!peek().punct(p))
    error_at(peek(), "expected '" + std::string(p) + "'");
  return next();
}

Token Lexer::expect_ident() {
  if (!peek().is(Tok::Ident)) error_at(peek(), "expected a name");
  return next();
}

void Lexer::error_at(const Token& token, const std::string& message) const {
  std::string shown = message;
  if (token.kind == Tok::End)
    shown += " (at end of input)";
  else
    shown += " (found '" + (token.kind == Tok::String ? "\"" + token.text + "\"" : token.text) +
             "')";
  fail(token.pos, shown);
}

}  // namespace tableq::lex
