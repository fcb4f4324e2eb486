#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "therafuzz/error.hpp"

namespace therafuzz {

/// `variable is term`. Location is where the clause was read from, if anywhere;
/// it never takes part in comparisons.
struct Clause {
  std::string variable;
  std::string term;
  Location location{};

  friend bool operator==(const Clause& a, const Clause& b) {
    return a.variable == b.variable && a.term == b.term;
  }
  friend bool operator<(const Clause& a, const Clause& b) {
    return std::tie(a.variable, a.term) < std::tie(b.variable, b.term);
  }
};

struct Rule {
  std::string id;  // assigned by the knowledge base (r1..rN), empty for free-standing rules
  std::vector<Clause> antecedents;
  Clause consequent;
  Location location{};
};

/// Equal antecedent lists (in order) and consequent; ignores id and locations.
inline bool same_structure(const Rule& a, const Rule& b) {
  return a.antecedents == b.antecedents && a.consequent == b.consequent;
}

/// Antecedents as an order-free key: two rules with equal keys fire on exactly the same conditions.
inline std::vector<Clause> antecedent_key(const Rule& r) {
  auto key = r.antecedents;
  std::sort(key.begin(), key.end());
  return key;
}

}  // namespace therafuzz
