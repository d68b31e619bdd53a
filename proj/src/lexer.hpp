#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tableq/diag.hpp"

namespace tableq::lex {

enum class Tok {
  End,
  Ident,   // [A-Za-z_][A-Za-z0-9_]*
  Number,  // 12, 3.5, .5, 1e+05
  String,  // "..." with "" escape
  Sheet,   // '...' with '' escape (text holds the unescaped name)
  Punct,   // one of: + - * / ^ & = <> < <= > >= ( ) [ ] : , ! ->
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0;
  SourcePos pos;

  bool is(Tok k) const { return kind == k; }
  bool punct(std::string_view p) const { return kind == Tok::Punct && text == p; }
  bool ident(std::string_view name) const { return kind == Tok::Ident && text == name; }
};

// Tokenizes the whole input up front. '#' starts a comment running to end of
// line; newlines are plain whitespace. line/col of the first byte can be
// offset so single lines extracted from a file report real positions.
class Lexer {
 public:
  Lexer(std::string_view src, std::string file, int first_line = 1, int first_col = 1);

  const Token& peek(size_t ahead = 0) const;
  Token next();
  bool at_end() const { return peek().kind == Tok::End; }

  // Consumes a punct token or fails with "expected ...".
  Token expect_punct(std::string_view p);
  Token expect_ident();

  [[noreturn]] void error_at(const Token& token, const std::string& message) const;

 private:
  void tokenize(std::string_view src, int first_line, int first_col);

  std::string file_;
  std::vector<Token> tokens_;
  size_t index_ = 0;
};

}  // namespace tableq::lex
