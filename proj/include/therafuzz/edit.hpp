#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "therafuzz/knowledge_base.hpp"
#include "therafuzz/parser.hpp"
#include "therafuzz/validate.hpp"

namespace therafuzz {

enum class EditKind { replace_document, upsert_rule, delete_rule, upsert_variable };

inline const char* to_string(EditKind k) {
  switch (k) {
    case EditKind::replace_document: return "replace_document";
    case EditKind::upsert_rule: return "upsert_rule";
    case EditKind::delete_rule: return "delete_rule";
    case EditKind::upsert_variable: return "upsert_variable";
  }
  return "?";
}

inline std::optional<EditKind> parse_edit_kind(std::string_view s) {
  for (auto k : {EditKind::replace_document, EditKind::upsert_rule, EditKind::delete_rule, EditKind::upsert_variable})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

/// A change to the knowledge base, valid only against `expected_revision`.
///
/// Payloads: replace_document takes a whole document; upsert_rule takes one rule
/// and replaces the rule with the same antecedent set and output variable, or
/// appends; delete_rule takes a rule id (`r3`) or the rule text; upsert_variable
/// takes one variable block and replaces the same-named variable, or appends.
struct Edit {
  EditKind kind = EditKind::replace_document;
  std::string payload;
  std::uint64_t expected_revision = 0;
};

struct Conflict {
  std::uint64_t current_revision = 0;
};

struct EditRejected {
  std::vector<Diagnostic> diagnostics;
};

struct EditAccepted {
  KnowledgeBase kb;
  std::vector<Diagnostic> warnings;
};

using EditOutcome = std::variant<EditAccepted, Conflict, EditRejected>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline bool looks_like_rule_id(std::string_view s) {
  if (s.size() < 2 || s[0] != 'r') return false;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!is_digit(s[i])) return false;
  return true;
}

inline EditRejected reject(std::string message, std::string code) {
  return EditRejected{{Diagnostic{Severity::error, Location{1, 1}, std::move(message), std::move(code)}}};
}

inline bool same_slot(const Rule& a, const Rule& b) {
  return a.consequent.variable == b.consequent.variable && antecedent_key(a) == antecedent_key(b);
}

}  // namespace detail

/// Applies an edit without touching `kb`. Accepted results are re-rendered and
/// re-parsed so ids and locations refer to the canonical document, and carry
/// revision + 1.
inline EditOutcome apply_edit(const KnowledgeBase& kb, const Edit& edit) {
  if (edit.expected_revision != kb.revision) return Conflict{kb.revision};

  KnowledgeBase next;
  switch (edit.kind) {
    case EditKind::replace_document: {
      auto parsed = parse_kb(edit.payload);
      if (!parsed) return EditRejected{std::move(parsed.diagnostics)};
      auto diags = validate(*parsed.value);
      if (has_errors(diags)) return EditRejected{std::move(diags)};
      next = std::move(*parsed.value);
      break;
    }
    case EditKind::upsert_rule: {
      auto parsed = parse_rule(edit.payload);
      if (!parsed) return EditRejected{std::move(parsed.diagnostics)};
      next = kb;
      auto it = std::find_if(next.rules.begin(), next.rules.end(),
                             [&](const Rule& r) { return detail::same_slot(r, *parsed.value); });
      if (it != next.rules.end())
        *it = std::move(*parsed.value);
      else
        next.rules.push_back(std::move(*parsed.value));
      break;
    }
    case EditKind::delete_rule: {
      next = kb;
      auto target = detail::trim(edit.payload);
      std::vector<Rule>::iterator it;
      if (detail::looks_like_rule_id(target)) {
        it = std::find_if(next.rules.begin(), next.rules.end(), [&](const Rule& r) { return r.id == target; });
      } else {
        auto parsed = parse_rule(target);
        if (!parsed) return EditRejected{std::move(parsed.diagnostics)};
        it = std::find_if(next.rules.begin(), next.rules.end(), [&](const Rule& r) {
          return detail::same_slot(r, *parsed.value) && r.consequent.term == parsed.value->consequent.term;
        });
      }
      if (it == next.rules.end()) return detail::reject("no rule matches '" + std::string(target) + "'", "unknown-rule");
      next.rules.erase(it);
      break;
    }
    case EditKind::upsert_variable: {
      auto parsed = parse_kb(edit.payload);
      if (!parsed) return EditRejected{std::move(parsed.diagnostics)};
      if (parsed.value->variables.size() != 1 || !parsed.value->rules.empty())
        return detail::reject("upsert_variable payload must hold exactly one variable block and no rules",
                              "bad-payload");
      next = kb;
      auto& var = parsed.value->variables.front();
      auto it = std::find_if(next.variables.begin(), next.variables.end(),
                             [&](const LinguisticVariable& v) { return v.name() == var.name(); });
      if (it != next.variables.end())
        *it = std::move(var);
      else
        next.variables.push_back(std::move(var));
      break;
    }
  }

  auto canonical = parse_kb(render(next));
  if (!canonical) return EditRejected{std::move(canonical.diagnostics)};
  auto diags = validate(*canonical.value);
  if (has_errors(diags)) return EditRejected{std::move(diags)};
  EditAccepted out{std::move(*canonical.value), std::move(diags)};
  out.kb.revision = kb.revision + 1;
  return out;
}

}  // namespace therafuzz
