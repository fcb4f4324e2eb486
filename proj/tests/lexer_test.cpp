#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/fixture.hpp"
#include "support/generators.hpp"
#include "therafuzz/lexer.hpp"

using namespace therafuzz;

namespace {

std::vector<TokenKind> kinds(const TokenStream& ts) {
  std::vector<TokenKind> out;
  for (const auto& t : ts.tokens) out.push_back(t.kind);
  return out;
}

// Slice of `src` at a 1-based line/column with `len` bytes.
std::string slice(std::string_view src, Location loc, std::size_t len) {
  std::size_t line = 1, i = 0;
  while (line < loc.line && i < src.size()) {
    if (src[i] == '\n') ++line;
    ++i;
  }
  return std::string(src.substr(i + loc.column - 1, len));
}

std::string lower(std::string s) {
  for (auto& c : s) c = detail::ascii_lower(c);
  return s;
}

}  // namespace

TEST_CASE("minimal rule tokens", "[lexer]") {
  auto ts = tokenize("IF (a is b) THEN c is d");
  using K = TokenKind;
  CHECK(ts.diagnostics.empty());
  CHECK(kinds(ts) == std::vector<K>{K::kw_if, K::lparen, K::identifier, K::kw_is, K::identifier, K::rparen, K::kw_then,
                                    K::identifier, K::kw_is, K::identifier, K::end});
  CHECK(ts.tokens[2].value == "a");
  CHECK(ts.tokens[9].value == "d");
}

TEST_CASE("keywords and identifiers fold case", "[lexer]") {
  auto a = tokenize("and");
  auto b = tokenize("AND");
  auto c = tokenize("AnD");
  CHECK(a.tokens[0].kind == TokenKind::kw_and);
  CHECK(b.tokens[0].kind == TokenKind::kw_and);
  CHECK(c.tokens[0].kind == TokenKind::kw_and);

  auto id = tokenize("Speech_Problems_Level");
  CHECK(id.tokens[0].kind == TokenKind::identifier);
  CHECK(id.tokens[0].value == "speech_problems_level");
  CHECK(id.tokens[0].text == "Speech_Problems_Level");
}

TEST_CASE("illegal character is reported at its column", "[lexer]") {
  auto ts = tokenize("a@b");
  REQUIRE(ts.diagnostics.size() == 1);
  CHECK(ts.diagnostics[0].code == "illegal-char");
  CHECK(ts.diagnostics[0].location == Location{1, 2});
  CHECK(ts.tokens.size() == 3);  // a, b, end

  auto multi = tokenize("x\n  y \xC3\xA9 z");
  REQUIRE(multi.diagnostics.size() == 1);
  CHECK(multi.diagnostics[0].location == Location{2, 5});
}

TEST_CASE("numbers, comments and punctuation", "[lexer]") {
  auto ts = tokenize("range -1.5 3 # trailing comment ( ignored\n{ (0, 0.25) };");
  using K = TokenKind;
  CHECK(kinds(ts) == std::vector<K>{K::identifier, K::number, K::number, K::lbrace, K::lparen, K::number, K::comma,
                                    K::number, K::rparen, K::rbrace, K::semicolon, K::end});
  CHECK(ts.tokens[1].text == "-1.5");
  CHECK(ts.tokens[3].location == Location{2, 1});
  CHECK(tokenize("1.").diagnostics.size() == 1);
}

TEST_CASE("token positions slice back to their lexemes", "[lexer][property]") {
  std::mt19937_64 rng(99);
  std::vector<std::string> sources = {fixture::document()};
  for (int i = 0; i < 300; ++i) sources.push_back(gen::random_rule(rng).text);
  for (const auto& src : sources) {
    auto ts = tokenize(src);
    REQUIRE(ts.diagnostics.empty());
    for (const auto& t : ts.tokens) {
      if (t.kind == TokenKind::end) continue;
      auto s = slice(src, t.location, t.text.size());
      REQUIRE(s == t.text);
      REQUIRE(lower(s) == t.value);
      REQUIRE(src.substr(t.offset, t.text.size()) == t.text);
    }
  }
}
