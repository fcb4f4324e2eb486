#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "therafuzz/rule.hpp"
#include "therafuzz/variable.hpp"

namespace therafuzz {

/// Variables, rules and the revision they were accepted at. Rule ids are r1..rN
/// in document order.
struct KnowledgeBase {
  std::vector<LinguisticVariable> variables;
  std::vector<Rule> rules;
  std::uint64_t revision = 0;
  std::map<std::string, Location, std::less<>> declared_at;  // variable name -> where its block starts

  Location location_of(std::string_view variable) const {
    auto it = declared_at.find(variable);
    return it == declared_at.end() ? Location{1, 1} : it->second;
  }

  const LinguisticVariable* find_variable(std::string_view name) const noexcept {
    for (const auto& v : variables)
      if (v.name() == name) return &v;
    return nullptr;
  }

  const Rule* find_rule(std::string_view id) const noexcept {
    for (const auto& r : rules)
      if (r.id == id) return &r;
    return nullptr;
  }

  void renumber_rules() {
    for (std::size_t i = 0; i < rules.size(); ++i) rules[i].id = "r" + std::to_string(i + 1);
  }
};

/// Same variables and same rules in the same order; ids, locations and revision ignored.
inline bool same_content(const KnowledgeBase& a, const KnowledgeBase& b) {
  if (a.variables != b.variables || a.rules.size() != b.rules.size()) return false;
  for (std::size_t i = 0; i < a.rules.size(); ++i)
    if (!same_structure(a.rules[i], b.rules[i])) return false;
  return true;
}

}  // namespace therafuzz
