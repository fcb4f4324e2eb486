#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "therafuzz/error.hpp"
#include "therafuzz/knowledge_base.hpp"

namespace therafuzz {

/// Semantic checks over a parsed knowledge base.
///
/// Errors: unknown-variable, unknown-term, antecedent-not-input,
/// consequent-not-output, contradiction (same antecedent set, same output
/// variable, different term). Warnings: duplicate-rule, uncovered-term (an
/// output term no rule concludes).
inline std::vector<Diagnostic> validate(const KnowledgeBase& kb) {
  std::vector<Diagnostic> out;
  auto error = [&](Location at, std::string msg, std::string code) {
    out.push_back({Severity::error, at, std::move(msg), std::move(code)});
  };

  auto check_clause = [&](const Rule& r, const Clause& c, VariableRole want) {
    const auto* var = kb.find_variable(c.variable);
    if (!var) {
      error(c.location, r.id + ": unknown variable '" + c.variable + "'", "unknown-variable");
      return;
    }
    if (!var->find_term(c.term))
      error(c.location, r.id + ": '" + c.term + "' is not a term of '" + c.variable + "'", "unknown-term");
    if (var->role() != want) {
      if (want == VariableRole::input)
        error(c.location, r.id + ": antecedent variable '" + c.variable + "' is an output", "antecedent-not-input");
      else
        error(c.location, r.id + ": consequent variable '" + c.variable + "' is an input", "consequent-not-output");
    }
  };

  // key: sorted antecedents + consequent variable -> first rule seen
  std::map<std::pair<std::vector<Clause>, std::string>, const Rule*> seen;
  std::set<std::pair<std::string, std::string>> concluded;

  for (const auto& r : kb.rules) {
    std::set<std::string> vars;
    for (const auto& c : r.antecedents) {
      check_clause(r, c, VariableRole::input);
      if (!vars.insert(c.variable).second)
        error(c.location, r.id + ": variable '" + c.variable + "' appears twice in the antecedents",
              "dup-antecedent");
    }
    check_clause(r, r.consequent, VariableRole::output);
    concluded.insert({r.consequent.variable, r.consequent.term});

    auto [it, inserted] = seen.emplace(std::make_pair(antecedent_key(r), r.consequent.variable), &r);
    if (inserted) continue;
    const Rule& first = *it->second;
    if (first.consequent.term == r.consequent.term)
      out.push_back({Severity::warning, r.location, r.id + " duplicates " + first.id, "duplicate-rule"});
    else
      error(r.location,
            r.id + " contradicts " + first.id + ": same conditions conclude '" + r.consequent.term + "' instead of '" +
                first.consequent.term + "'",
            "contradiction");
  }

  for (const auto& v : kb.variables) {
    if (v.role() != VariableRole::output) continue;
    for (const auto& t : v.terms())
      if (!concluded.count({v.name(), t.name}))
        out.push_back({Severity::warning, kb.location_of(v.name()),
                       "output term '" + t.name + "' of '" + v.name() + "' is not concluded by any rule",
                       "uncovered-term"});
  }
  return out;
}

}  // namespace therafuzz
