#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tracereason/source_span.hpp"

namespace tracereason {

enum class TokenKind {
  Identifier,
  Integer,
  String,
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Colon,
  Pipe,
  Arrow,
  Equals,
  At,
  End,
};

const char* token_kind_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier name, integer digits, or unescaped string contents
  SourceSpan span;
};

struct LexResult {
  std::vector<Token> tokens;  // always terminated by an End token
  std::vector<Diagnostic> errors;
};

/// Tokenizes spec and model files. Skips whitespace and `//`, `/* */`
/// comments. Bad characters are reported and skipped, so the token stream
/// is always usable for error recovery.
LexResult lex(std::string_view text, const std::string& file);

}  // namespace tracereason
