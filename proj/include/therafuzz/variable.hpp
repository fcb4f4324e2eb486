#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "therafuzz/detail/numbers.hpp"
#include "therafuzz/error.hpp"
#include "therafuzz/membership.hpp"

namespace therafuzz {

struct LinguisticTerm {
  std::string name;
  MembershipFunction mf;

  friend bool operator==(const LinguisticTerm&, const LinguisticTerm&) = default;
};

enum class VariableRole { input, output };

inline const char* to_string(VariableRole r) { return r == VariableRole::input ? "input" : "output"; }

/// A named universe split into at least two named fuzzy terms.
class LinguisticVariable {
 public:
  LinguisticVariable(std::string name, VariableRole role, Universe universe, std::vector<LinguisticTerm> terms)
      : name_(std::move(name)), role_(role), universe_(universe), terms_(std::move(terms)) {
    if (name_.empty()) throw ValidationError("variable name must not be empty", "bad-name");
    if (terms_.size() < 2)
      throw ValidationError("variable '" + name_ + "' needs at least 2 terms, has " + std::to_string(terms_.size()),
                            "few-terms");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const auto& t = terms_[i];
      for (std::size_t j = 0; j < i; ++j)
        if (terms_[j].name == t.name)
          throw ValidationError("variable '" + name_ + "' declares term '" + t.name + "' twice", "dup-term");
      if (t.mf.support_lo() < universe_.lo() || t.mf.support_hi() > universe_.hi())
        throw ValidationError("term '" + t.name + "' of '" + name_ + "' has support [" +
                                  detail::shortest(t.mf.support_lo()) + ", " + detail::shortest(t.mf.support_hi()) +
                                  "] outside the universe " + interval_text(),
                              "term-outside-universe");
    }
  }

  const std::string& name() const noexcept { return name_; }
  VariableRole role() const noexcept { return role_; }
  const Universe& universe() const noexcept { return universe_; }
  const std::vector<LinguisticTerm>& terms() const noexcept { return terms_; }

  std::optional<std::size_t> term_index(std::string_view term) const noexcept {
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (terms_[i].name == term) return i;
    return std::nullopt;
  }

  const LinguisticTerm* find_term(std::string_view term) const noexcept {
    auto i = term_index(term);
    return i ? &terms_[*i] : nullptr;
  }

  std::string interval_text() const {
    return "[" + detail::shortest(universe_.lo()) + ", " + detail::shortest(universe_.hi()) + "]";
  }

  /// Copy with the universe and every term moved right by `delta`.
  LinguisticVariable shifted(double delta) const {
    std::vector<LinguisticTerm> moved;
    moved.reserve(terms_.size());
    for (const auto& t : terms_) moved.push_back({t.name, t.mf.shifted(delta)});
    return LinguisticVariable(name_, role_, Universe(universe_.lo() + delta, universe_.hi() + delta),
                              std::move(moved));
  }

  friend bool operator==(const LinguisticVariable&, const LinguisticVariable&) = default;

 private:
  std::string name_;
  VariableRole role_;
  Universe universe_;
  std::vector<LinguisticTerm> terms_;
};

struct TermDegree {
  std::string term;
  double degree = 0;

  friend bool operator==(const TermDegree&, const TermDegree&) = default;
};

/// Degree of membership of one crisp value in every term of a variable,
/// in the variable's declaration order.
struct FuzzifiedValue {
  std::string variable;
  double crisp = 0;
  std::vector<TermDegree> degrees;

  std::optional<double> degree(std::string_view term) const noexcept {
    for (const auto& d : degrees)
      if (d.term == term) return d.degree;
    return std::nullopt;
  }

  friend bool operator==(const FuzzifiedValue&, const FuzzifiedValue&) = default;
};

inline double membership_degree(const MembershipFunction& mf, double x) noexcept { return mf.degree(x); }

inline FuzzifiedValue fuzzify(const LinguisticVariable& var, double x) {
  if (!var.universe().contains(x))
    throw DomainError("value " + detail::shortest(x) + " for '" + var.name() + "' is outside its universe " +
                      var.interval_text());
  FuzzifiedValue fv{var.name(), x, {}};
  fv.degrees.reserve(var.terms().size());
  for (const auto& t : var.terms()) fv.degrees.push_back({t.name, t.mf.degree(x)});
  return fv;
}

/// `name (1.62) = {"low"/0.38, "normal"/0.62, "high"/0.00}`
inline std::string format_fuzzified(const FuzzifiedValue& fv) {
  std::string out = fv.variable + " (" + detail::fixed2(fv.crisp) + ") = {";
  for (std::size_t i = 0; i < fv.degrees.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + fv.degrees[i].term + "\"/" + detail::fixed2(fv.degrees[i].degree);
  }
  out += "}";
  return out;
}

}  // namespace therafuzz
