#pragma once

#include <cctype>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "therafuzz/error.hpp"

namespace therafuzz {

enum class TokenKind {
  kw_if,
  kw_and,
  kw_then,
  kw_is,
  identifier,
  number,
  lparen,
  rparen,
  lbrace,
  rbrace,
  comma,
  semicolon,
  end,
};

inline const char* describe(TokenKind k) {
  switch (k) {
    case TokenKind::kw_if: return "IF";
    case TokenKind::kw_and: return "AND";
    case TokenKind::kw_then: return "THEN";
    case TokenKind::kw_is: return "IS";
    case TokenKind::identifier: return "identifier";
    case TokenKind::number: return "number";
    case TokenKind::lparen: return "'('";
    case TokenKind::rparen: return "')'";
    case TokenKind::lbrace: return "'{'";
    case TokenKind::rbrace: return "'}'";
    case TokenKind::comma: return "','";
    case TokenKind::semicolon: return "';'";
    case TokenKind::end: return "end of input";
  }
  return "token";
}

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;   // lexeme exactly as written
  std::string value;  // lowercase for keywords and identifiers, == text otherwise
  Location location;
  std::size_t offset = 0;

  bool is_word(std::string_view w) const { return kind == TokenKind::identifier && value == w; }
};

struct TokenStream {
  std::vector<Token> tokens;  // always terminated by an `end` token
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline TokenKind keyword_kind(std::string_view folded) {
  if (folded == "if") return TokenKind::kw_if;
  if (folded == "and") return TokenKind::kw_and;
  if (folded == "then") return TokenKind::kw_then;
  if (folded == "is") return TokenKind::kw_is;
  return TokenKind::identifier;
}

}  // namespace detail

/// Splits rule/knowledge-base text into tokens. `#` starts a comment running to
/// end of line. Illegal characters are reported and skipped so lexing always
/// reaches the end of the input.
inline TokenStream tokenize(std::string_view src) {
  TokenStream out;
  std::size_t i = 0;
  std::size_t line = 1;
  std::size_t line_start = 0;
  auto loc = [&](std::size_t at) { return Location{line, at - line_start + 1}; };

  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++i;
      ++line;
      line_start = i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    const std::size_t start = i;
    if (detail::is_alpha(c)) {
      while (i < src.size() && (detail::is_alpha(src[i]) || detail::is_digit(src[i]) || src[i] == '_')) ++i;
      std::string text(src.substr(start, i - start));
      std::string folded = text;
      for (auto& ch : folded) ch = detail::ascii_lower(ch);
      out.tokens.push_back({detail::keyword_kind(folded), std::move(text), std::move(folded), loc(start), start});
      continue;
    }
    if (detail::is_digit(c) || (c == '-' && i + 1 < src.size() && detail::is_digit(src[i + 1]))) {
      ++i;
      while (i < src.size() && detail::is_digit(src[i])) ++i;
      if (i + 1 < src.size() && src[i] == '.' && detail::is_digit(src[i + 1])) {
        ++i;
        while (i < src.size() && detail::is_digit(src[i])) ++i;
      }
      std::string text(src.substr(start, i - start));
      out.tokens.push_back({TokenKind::number, text, text, loc(start), start});
      continue;
    }
    TokenKind punct = TokenKind::end;
    switch (c) {
      case '(': punct = TokenKind::lparen; break;
      case ')': punct = TokenKind::rparen; break;
      case '{': punct = TokenKind::lbrace; break;
      case '}': punct = TokenKind::rbrace; break;
      case ',': punct = TokenKind::comma; break;
      case ';': punct = TokenKind::semicolon; break;
      default: break;
    }
    if (punct != TokenKind::end) {
      ++i;
      std::string text(1, c);
      out.tokens.push_back({punct, text, text, loc(start), start});
      continue;
    }
    // Illegal byte. A multi-byte UTF-8 sequence is reported once.
    std::string shown;
    auto uc = static_cast<unsigned char>(c);
    if (uc >= 0x20 && uc < 0x7f) {
      shown = "'" + std::string(1, c) + "'";
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "0x%02X", uc);
      shown = buf;
    }
    out.diagnostics.push_back({Severity::error, loc(start), "illegal character " + shown, "illegal-char"});
    ++i;
    if (uc >= 0xC0)
      while (i < src.size() && (static_cast<unsigned char>(src[i]) & 0xC0) == 0x80) ++i;
  }
  out.tokens.push_back({TokenKind::end, "", "", loc(i), i});
  return out;
}

}  // namespace therafuzz
