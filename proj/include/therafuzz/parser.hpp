#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "therafuzz/detail/numbers.hpp"
#include "therafuzz/error.hpp"
#include "therafuzz/knowledge_base.hpp"
#include "therafuzz/lexer.hpp"
#include "therafuzz/rule.hpp"

namespace therafuzz {

/// Either a value with possibly some warnings, or no value and at least one error.
template <class T>
struct Parsed {
  std::optional<T> value;
  std::vector<Diagnostic> diagnostics;

  bool ok() const noexcept { return value.has_value(); }
  explicit operator bool() const noexcept { return ok(); }
};

namespace detail {

// Recursive-descent parser over a token stream. Grammar:
//
//   document := (variable | rule)*
//   variable := "variable" ident ("input"|"output") "range" num num "{" term* "}"
//   term     := "term" ident ( "tri" num num num | "trap" num num num num | "points" point+ )
//   point    := "(" num "," num ")"
//   rule     := IF clause (AND clause)* THEN ident IS ident [";"]
//   clause   := "(" ident IS ident ")"
//
// Errors throw a private Abort after recording a diagnostic; callers resync at
// the next statement start.
class Parser {
 public:
  explicit Parser(std::string_view src) : stream_(tokenize(src)) { diags_ = stream_.diagnostics; }

  std::vector<Diagnostic>& diagnostics() { return diags_; }
  bool at_end() const { return peek().kind == TokenKind::end; }

  std::optional<Rule> rule_statement() {
    try {
      return rule();
    } catch (const Abort&) {
      resync();
      return std::nullopt;
    }
  }

  std::optional<Rule> single_rule() {
    auto r = rule_statement();
    if (r && !at_end()) {
      error_at(peek(), "unexpected " + show(peek()) + " after the end of the rule", "syntax");
      return std::nullopt;
    }
    return r;
  }

  Parsed<KnowledgeBase> document() {
    KnowledgeBase kb;
    std::set<std::string> names;
    while (!at_end()) {
      if (peek().kind == TokenKind::kw_if) {
        if (auto r = rule_statement()) kb.rules.push_back(std::move(*r));
        continue;
      }
      if (peek().is_word("variable")) {
        const Location decl = peek().location;
        const Token& head = peek(1);
        try {
          auto v = variable();
          if (v) {
            if (!names.insert(v->name()).second)
              error_at(head, "variable '" + v->name() + "' is declared more than once", "dup-variable");
            else {
              kb.declared_at[v->name()] = decl;
              kb.variables.push_back(std::move(*v));
            }
          }
        } catch (const Abort&) {
          resync();
        }
        continue;
      }
      error_at(peek(), "expected 'variable' or IF, found " + show(peek()), "syntax");
      advance();
      resync();
    }
    if (kb.variables.empty() && !has_errors(diags_))
      diags_.push_back({Severity::error, Location{1, 1}, "no variables declared", "no-variables"});
    kb.renumber_rules();
    Parsed<KnowledgeBase> out;
    out.diagnostics = std::move(diags_);
    if (!has_errors(out.diagnostics)) out.value = std::move(kb);
    return out;
  }

 private:
  struct Abort {};

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, stream_.tokens.size() - 1);
    return stream_.tokens[i];
  }

  const Token& advance() {
    const Token& t = peek();
    if (pos_ + 1 < stream_.tokens.size()) ++pos_;
    return t;
  }

  static std::string show(const Token& t) {
    switch (t.kind) {
      case TokenKind::end: return "end of input";
      case TokenKind::identifier: return "identifier '" + t.text + "'";
      case TokenKind::number: return "number " + t.text;
      default: return "'" + t.text + "'";
    }
  }

  // End-of-input errors point at the last real token so the location stays inside the text.
  Location where(const Token& t) const {
    if (t.kind == TokenKind::end && stream_.tokens.size() > 1) return stream_.tokens[stream_.tokens.size() - 2].location;
    if (t.kind == TokenKind::end && stream_.tokens.size() == 1) return Location{1, 1};
    return t.location;
  }

  void error_at(const Token& t, std::string message, std::string code) {
    diags_.push_back({Severity::error, where(t), std::move(message), std::move(code)});
  }

  [[noreturn]] void fail(const Token& t, std::string message, std::string code = "syntax") {
    error_at(t, std::move(message), std::move(code));
    throw Abort{};
  }

  const Token& expect(TokenKind kind, std::string_view context) {
    if (peek().kind != kind)
      fail(peek(), std::string("expected ") + describe(kind) + " " + std::string(context) + ", found " + show(peek()));
    return advance();
  }

  const Token& expect_word(std::string_view word, std::string_view context) {
    if (!peek().is_word(word))
      fail(peek(), "expected '" + std::string(word) + "' " + std::string(context) + ", found " + show(peek()));
    return advance();
  }

  double number(std::string_view context) {
    const Token& t = expect(TokenKind::number, context);
    auto v = parse_double(t.text);
    if (!v) fail(t, "malformed number '" + t.text + "'");
    return *v;
  }

  // Skip to the next plausible statement start.
  void resync() {
    while (!at_end()) {
      const Token& t = peek();
      if (t.kind == TokenKind::kw_if || t.is_word("variable")) return;
      if (t.kind == TokenKind::semicolon) {
        advance();
        return;
      }
      advance();
    }
  }

  Clause clause_body(std::string_view context) {
    const Token& var = expect(TokenKind::identifier, context);
    expect(TokenKind::kw_is, "after variable '" + var.value + "'");
    const Token& term = expect(TokenKind::identifier, "after IS");
    return Clause{var.value, term.value, var.location};
  }

  Rule rule() {
    Rule r;
    const Token& head = expect(TokenKind::kw_if, "at start of rule");
    r.location = head.location;
    std::set<std::string> seen;
    do {
      expect(TokenKind::lparen, r.antecedents.empty() ? "after IF" : "after AND");
      Clause c = clause_body("inside antecedent clause");
      expect(TokenKind::rparen, "to close antecedent clause");
      if (!seen.insert(c.variable).second)
        error_at_loc(c.location, "variable '" + c.variable + "' appears twice in the antecedents", "dup-antecedent");
      r.antecedents.push_back(std::move(c));
    } while (peek().kind == TokenKind::kw_and && (advance(), true));
    expect(TokenKind::kw_then, "or AND after antecedent clause");
    r.consequent = clause_body("after THEN");
    if (peek().kind == TokenKind::semicolon) advance();
    return r;
  }

  void error_at_loc(Location loc, std::string message, std::string code) {
    diags_.push_back({Severity::error, loc, std::move(message), std::move(code)});
  }

  MembershipFunction membership(const Token& kind_tok) {
    if (kind_tok.is_word("tri")) {
      double a = number("for triangle"), b = number("for triangle"), c = number("for triangle");
      return MembershipFunction::triangular(a, b, c);
    }
    if (kind_tok.is_word("trap")) {
      double a = number("for trapezoid"), b = number("for trapezoid"), c = number("for trapezoid"),
             d = number("for trapezoid");
      return MembershipFunction::trapezoidal(a, b, c, d);
    }
    if (kind_tok.is_word("points")) {
      std::vector<Vertex> pts;
      do {
        expect(TokenKind::lparen, "to open a point");
        double x = number("for point x");
        expect(TokenKind::comma, "between point coordinates");
        double mu = number("for point degree");
        expect(TokenKind::rparen, "to close a point");
        pts.push_back({x, mu});
      } while (peek().kind == TokenKind::lparen);
      return MembershipFunction::piecewise(std::move(pts));
    }
    fail(kind_tok, "expected 'tri', 'trap' or 'points', found " + show(kind_tok));
  }

  std::optional<LinguisticTerm> term() {
    expect_word("term", "or '}' inside variable block");
    const Token& name = expect(TokenKind::identifier, "for term name");
    const Token& kind_tok = advance();
    try {
      return LinguisticTerm{name.value, membership(kind_tok)};
    } catch (const ValidationError& e) {
      error_at(name, "term '" + name.value + "': " + e.what(), e.code());
      return std::nullopt;
    }
  }

  std::optional<LinguisticVariable> variable() {
    expect_word("variable", "");
    const Token& name = expect(TokenKind::identifier, "for variable name");
    VariableRole role;
    if (peek().is_word("input"))
      role = VariableRole::input;
    else if (peek().is_word("output"))
      role = VariableRole::output;
    else
      fail(peek(), "expected 'input' or 'output' after variable name, found " + show(peek()));
    advance();
    expect_word("range", "after variable role");
    double lo = number("for range lower bound");
    double hi = number("for range upper bound");
    expect(TokenKind::lbrace, "to open variable block");

    std::vector<LinguisticTerm> terms;
    bool term_failed = false;
    while (peek().kind != TokenKind::rbrace) {
      if (at_end() || peek().kind == TokenKind::kw_if || peek().is_word("variable"))
        fail(peek(), "expected '}' to close variable '" + name.value + "', found " + show(peek()));
      try {
        if (auto t = term())
          terms.push_back(std::move(*t));
        else
          term_failed = true;
      } catch (const Abort&) {
        term_failed = true;
        while (!at_end() && !peek().is_word("term") && peek().kind != TokenKind::rbrace &&
               peek().kind != TokenKind::kw_if && !peek().is_word("variable"))
          advance();
      }
    }
    advance();  // '}'
    if (term_failed) return std::nullopt;
    try {
      return LinguisticVariable(name.value, role, Universe(lo, hi), std::move(terms));
    } catch (const ValidationError& e) {
      error_at(name, e.what(), e.code());
      return std::nullopt;
    }
  }

  TokenStream stream_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic> diags_;
};

}  // namespace detail

inline Parsed<Rule> parse_rule(std::string_view source) {
  detail::Parser p(source);
  auto r = p.single_rule();
  Parsed<Rule> out;
  out.diagnostics = std::move(p.diagnostics());
  if (r && !has_errors(out.diagnostics)) out.value = std::move(*r);
  return out;
}

/// Parses a knowledge-base document. Parsing continues past recoverable errors;
/// the result carries every diagnostic found. A returned KB is at revision 0.
inline Parsed<KnowledgeBase> parse_kb(std::string_view document) {
  detail::Parser p(document);
  return p.document();
}

/// Canonical rule text: `IF (v1 is t1) and (v2 is t2) THEN vo is to;`
inline std::string render(const Rule& rule) {
  std::string out = "IF ";
  for (std::size_t i = 0; i < rule.antecedents.size(); ++i) {
    if (i) out += " and ";
    out += "(" + rule.antecedents[i].variable + " is " + rule.antecedents[i].term + ")";
  }
  out += " THEN " + rule.consequent.variable + " is " + rule.consequent.term + ";";
  return out;
}

inline std::string render(const MembershipFunction& mf) {
  using detail::shortest;
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Triangular>) {
          return "tri " + shortest(s.a) + " " + shortest(s.b) + " " + shortest(s.c);
        } else if constexpr (std::is_same_v<S, Trapezoidal>) {
          return "trap " + shortest(s.a) + " " + shortest(s.b) + " " + shortest(s.c) + " " + shortest(s.d);
        } else {
          std::string out = "points";
          for (const auto& p : s.points) out += " (" + shortest(p.x) + ", " + shortest(p.mu) + ")";
          return out;
        }
      },
      mf.shape());
}

inline std::string render(const LinguisticVariable& var) {
  std::string out = "variable " + var.name() + " " + to_string(var.role()) + " range " +
                    detail::shortest(var.universe().lo()) + " " + detail::shortest(var.universe().hi()) + " {\n";
  for (const auto& t : var.terms()) out += "  term " + t.name + " " + render(t.mf) + "\n";
  out += "}\n";
  return out;
}

/// Canonical document: variable blocks, a blank line, then one rule per line.
/// Comments and original spacing are not preserved.
inline std::string render(const KnowledgeBase& kb) {
  std::string out;
  for (std::size_t i = 0; i < kb.variables.size(); ++i) {
    if (i) out += "\n";
    out += render(kb.variables[i]);
  }
  if (!kb.rules.empty()) {
    out += "\n";
    for (const auto& r : kb.rules) out += render(r) + "\n";
  }
  return out;
}

}  // namespace therafuzz
