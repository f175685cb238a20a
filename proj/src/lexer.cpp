#include "tracereason/lexer.hpp"

#include <cctype>

namespace tracereason {

const char* token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Integer: return "integer";
    case TokenKind::String: return "string";
    case TokenKind::LBrace: return "'{'";
    case TokenKind::RBrace: return "'}'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::Comma: return "','";
    case TokenKind::Colon: return "':'";
    case TokenKind::Pipe: return "'|'";
    case TokenKind::Arrow: return "'->'";
    case TokenKind::Equals: return "'='";
    case TokenKind::At: return "'@'";
    case TokenKind::End: return "end of input";
  }
  return "token";
}

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$' || c == '\'';
}

class Lexer {
 public:
  Lexer(std::string_view text, const std::string& file) : text_(text), file_(file) {}

  LexResult run() {
    LexResult out;
    while (true) {
      skip_trivia(out);
      if (at_end()) break;
      lex_one(out);
    }
    out.tokens.push_back(Token{TokenKind::End, "", span_here(0)});
    return out;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++column_;  // continuation bytes stay in the same column
    }
  }

  SourceSpan span_here(std::size_t length) const { return SourceSpan{file_, line_, column_, length}; }

  void skip_trivia(LexResult& out) {
    while (!at_end()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ';') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        const SourceSpan start = span_here(2);
        advance();
        advance();
        bool closed = false;
        while (!at_end()) {
          if (peek() == '*' && peek(1) == '/') {
            advance();
            advance();
            closed = true;
            break;
          }
          advance();
        }
        if (!closed) out.errors.push_back({start, "unterminated block comment"});
      } else {
        break;
      }
    }
  }

  void lex_one(LexResult& out) {
    const SourceSpan start = span_here(1);
    const std::size_t begin = pos_;
    const char c = peek();

    auto single = [&](TokenKind kind) {
      advance();
      out.tokens.push_back(Token{kind, std::string(1, c), start});
    };

    if (is_ident_start(c)) {
      std::size_t cols = 0;
      while (!at_end() && is_ident_char(peek())) {
        advance();
        ++cols;
      }
      SourceSpan span = start;
      span.length = cols;
      out.tokens.push_back(Token{TokenKind::Identifier, std::string(text_.substr(begin, pos_ - begin)), span});
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())) != 0) advance();
      SourceSpan span = start;
      span.length = pos_ - begin;
      out.tokens.push_back(Token{TokenKind::Integer, std::string(text_.substr(begin, pos_ - begin)), span});
      return;
    }
    if (c == '"') {
      lex_string(out, start);
      return;
    }
    switch (c) {
      case '{': single(TokenKind::LBrace); return;
      case '}': single(TokenKind::RBrace); return;
      case '(': single(TokenKind::LParen); return;
      case ')': single(TokenKind::RParen); return;
      case '[': single(TokenKind::LBracket); return;
      case ']': single(TokenKind::RBracket); return;
      case ',': single(TokenKind::Comma); return;
      case ':': single(TokenKind::Colon); return;
      case '|': single(TokenKind::Pipe); return;
      case '=': single(TokenKind::Equals); return;
      case '@': single(TokenKind::At); return;
      case '-':
        if (peek(1) == '>') {
          advance();
          advance();
          SourceSpan span = start;
          span.length = 2;
          out.tokens.push_back(Token{TokenKind::Arrow, "->", span});
          return;
        }
        break;
      default:
        break;
    }
    // Consume a whole code point so the error span stays on a character boundary.
    advance();
    while (!at_end() && (static_cast<unsigned char>(peek()) & 0xC0) == 0x80) advance();
    out.errors.push_back({start, "unexpected character '" + std::string(text_.substr(begin, pos_ - begin)) + "'"});
  }

  void lex_string(LexResult& out, SourceSpan start) {
    const std::size_t start_col = column_;
    advance();  // opening quote
    std::string value;
    while (!at_end() && peek() != '"' && peek() != '\n') {
      if (peek() == '\\' && pos_ + 1 < text_.size()) {
        advance();
        const char esc = peek();
        value.push_back(esc == 'n' ? '\n' : esc == 't' ? '\t' : esc);
        advance();
        continue;
      }
      value.push_back(peek());
      advance();
    }
    if (at_end() || peek() != '"') {
      start.length = column_ - start_col;
      out.errors.push_back({start, "unterminated string literal"});
      out.tokens.push_back(Token{TokenKind::String, std::move(value), start});
      return;
    }
    advance();
    start.length = column_ - start_col;
    out.tokens.push_back(Token{TokenKind::String, std::move(value), start});
  }

  std::string_view text_;
  const std::string& file_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace

LexResult lex(std::string_view text, const std::string& file) { return Lexer(text, file).run(); }

}  // namespace tracereason
